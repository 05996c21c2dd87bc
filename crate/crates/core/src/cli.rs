//! Command-line front end. JSON goes to standard output, diagnostics to
//! standard error. Exit status 0 means success, 1 a failed check, 2 a usage
//! or input error.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::casd::{complex_asd_residual, pi7_norm, ComplexStructure, CurvatureSample};
use crate::error::Error;
use crate::forms::{cayley_form, hodge_star, inner, wedge, KForm};
use crate::gluing::{gluing_scan, ScanNorm};
use crate::index::{example_vdim, index_su, index_u, kx_dim, ChernData, ExampleGluingData, DIM_CZ};
use crate::lattice::{gradient_descent, picard_iterate, write_field, GaugeField, Group, LatticeSpec, SolveMethod};
use crate::selfcheck::{run_selfcheck, SelfcheckOptions};
use crate::split::{
    gamma8_elements, is_closed_under_products, project7_formula, verify_spin7_membership, Convention,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "spin7", version = crate::VERSION, about = "Spin(7) forms, index arithmetic, gluing scalings and a lattice instanton solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Hodge star, norm and self-duality of a form (the Cayley form by default).
    Forms(InputArgs),
    /// π₇ and π₂₁ components of a 2-form.
    Split(InputArgs),
    /// The eight elements of Γ₈ with membership checks.
    Group {
        /// Complex-structure convention, I or II.
        #[arg(long, default_value = "I")]
        convention: Convention,
    },
    /// Complex ASD residuals and π₇ norm of a curvature sample.
    Casd {
        #[command(flatten)]
        input: InputArgs,
        /// Complex-structure convention, I or II.
        #[arg(long, default_value = "I")]
        convention: Convention,
    },
    /// Index of the deformation operator from characteristic numbers.
    Index(InputArgs),
    /// Virtual dimension of the glued example.
    Vdim {
        #[arg(long, allow_negative_numbers = true)]
        k: i64,
        #[arg(long, allow_negative_numbers = true)]
        l: i64,
    },
    /// Scan a model norm over log-spaced t and fit its exponent.
    GluingScan(ScanArgs),
    /// Run the lattice solver from a seeded random start.
    Solve(SolveArgs),
    /// Run acceptance criteria 1 to 9 and print a scoreboard.
    Selfcheck {
        /// Comma-separated criterion numbers; all when omitted.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
}

#[derive(Args, Debug)]
pub struct InputArgs {
    /// JSON input file; standard input when omitted or "-".
    #[arg(long)]
    pub file: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ScanArgs {
    #[arg(long, default_value_t = 1e-5)]
    pub t_min: f64,
    #[arg(long, default_value_t = 1e-2)]
    pub t_max: f64,
    #[arg(long, default_value_t = 10)]
    pub samples: usize,
    /// l4err, l8curv, l8dchi or bound; all four when omitted.
    #[arg(long)]
    pub norm: Option<ScanNorm>,
    /// Also write the (norm, t, value) table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// u1 or su2.
    #[arg(long, default_value = "u1")]
    pub group: Group,
    #[arg(long, default_value_t = 1.0)]
    pub spacing: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Entries of the start are uniform in [−amp, amp].
    #[arg(long, default_value_t = 1e-2)]
    pub amp: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_steps: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// gd or picard.
    #[arg(long, default_value = "gd")]
    pub method: SolveMethod,
    /// Write the final field in the binary field format.
    #[arg(long)]
    pub field_out: Option<PathBuf>,
}

/// A failure together with its exit status.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidInput(_)
            | Error::FieldFormat(_)
            | Error::InconsistentCharacteristicNumbers(_)
            | Error::GradeMismatch { .. }
            | Error::GradeOverflow { .. }
            | Error::InvalidGrade(_)
            | Error::CoefficientLength { .. }
            | Error::InvalidIndex(..)
            | Error::InvalidGluingParams(_)
            | Error::InvalidLattice(_)
            | Error::DimensionMismatch { .. }
            | Error::RadiusOutOfRange { .. }
            | Error::NotSkewHermitian(_) => EXIT_USAGE,
            _ => EXIT_FAIL,
        };
        CliError {
            code,
            message: e.to_string(),
        }
    }
}

/// Checked output: the JSON document and whether its verdict is a pass.
pub struct Outcome {
    pub json: Value,
    pub pass: bool,
}

fn ok(json: Value) -> Result<Outcome, CliError> {
    Ok(Outcome { json, pass: true })
}

/// Parses `args` (program name first) and runs the command.
pub fn run_from<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(&cli.command, &mut *err) {
        Ok(outcome) => {
            let text = serde_json::to_string_pretty(&outcome.json).expect("JSON values serialize");
            if writeln!(out, "{text}").is_err() {
                return EXIT_FAIL;
            }
            if outcome.pass {
                EXIT_OK
            } else {
                EXIT_FAIL
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

pub fn dispatch(cmd: &Command, err: &mut dyn Write) -> Result<Outcome, CliError> {
    match cmd {
        Command::Forms(input) => forms(input),
        Command::Split(input) => split(input),
        Command::Group { convention } => group(*convention),
        Command::Casd { input, convention } => casd(input, *convention),
        Command::Index(input) => index(input),
        Command::Vdim { k, l } => vdim(*k, *l),
        Command::GluingScan(args) => scan(args),
        Command::Solve(args) => solve(args, err),
        Command::Selfcheck { only } => selfcheck(only, err),
    }
}

fn read_input(input: &InputArgs) -> Result<String, CliError> {
    match input.file.as_deref() {
        Some(p) if p != Path::new("-") => {
            fs::read_to_string(p).map_err(|e| CliError::usage(format!("{}: {e}", p.display())))
        }
        _ => {
            let mut s = String::new();
            std::io::stdin()
                .read_to_string(&mut s)
                .map_err(|e| CliError::usage(format!("standard input: {e}")))?;
            Ok(s)
        }
    }
}

fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T, CliError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| match e.path().to_string().as_str() {
        "." => CliError::usage(format!("malformed input: {}", e.inner())),
        path => CliError::usage(format!("malformed input at `{path}`: {}", e.inner())),
    })
}

pub(crate) fn big(v: &BigInt) -> Value {
    match v.to_i64() {
        Some(i) => json!(i),
        None => json!(v.to_string()),
    }
}

fn forms(input: &InputArgs) -> Result<Outcome, CliError> {
    let form = if input.file.is_some() {
        parse_json(&read_input(input)?)?
    } else {
        cayley_form()
    };
    let star = hodge_star(&form);
    let mut doc = json!({
        "form": form,
        "norm": inner(&form, &form)?.sqrt(),
        "hodge_star": star,
    });
    if form.grade() == 4 {
        doc["self_dual_residual"] = json!(star.max_abs_diff(&form));
        doc["wedge_square_top"] = json!(wedge(&form, &form)?.coefficient(&[1, 2, 3, 4, 5, 6, 7, 8]));
    }
    ok(doc)
}

fn split(input: &InputArgs) -> Result<Outcome, CliError> {
    let a: KForm = parse_json(&read_input(input)?)?;
    if a.grade() != 2 {
        return Err(CliError::usage(format!("expected a 2-form, got grade {}", a.grade())));
    }
    let p7 = project7_formula(&a)?;
    let p21 = a.sub(&p7)?;
    ok(json!({
        "p7": p7,
        "p21": p21,
        "p7_norm": inner(&p7, &p7)?.sqrt(),
        "p21_norm": inner(&p21, &p21)?.sqrt(),
    }))
}

fn group(convention: Convention) -> Result<Outcome, CliError> {
    let els = gamma8_elements(convention);
    let members: Vec<bool> = els.iter().map(verify_spin7_membership).collect();
    let closed = is_closed_under_products(&els);
    let non_abelian = els.iter().any(|a| {
        els.iter()
            .any(|b| (a.map.compose(&b.map).0 - b.map.compose(&a.map).0).amax() > 1e-12)
    });
    let elements: Vec<Value> = els
        .iter()
        .zip(&members)
        .map(|(g, m)| json!({"name": g.name, "matrix": g.map.rows(), "in_spin7": m}))
        .collect();
    let pass = els.len() == 8 && members.iter().all(|&m| m) && closed && non_abelian;
    Ok(Outcome {
        json: json!({
            "convention": convention.to_string(),
            "order": els.len(),
            "closed": closed,
            "non_abelian": non_abelian,
            "elements": elements,
        }),
        pass,
    })
}

fn casd(input: &InputArgs, convention: Convention) -> Result<Outcome, CliError> {
    let f: CurvatureSample = parse_json(&read_input(input)?)?;
    let cs = ComplexStructure::new(convention);
    let (asd, trace) = complex_asd_residual(&cs, &f)?;
    let pi7 = pi7_norm(&f);
    ok(json!({
        "convention": convention.to_string(),
        "asd_residual": asd,
        "trace_residual": trace,
        "pi7_norm": pi7,
        "complex_asd": asd <= 1e-10 && trace <= 1e-10,
        "instanton": pi7 <= 1e-10,
    }))
}

fn index(input: &InputArgs) -> Result<Outcome, CliError> {
    let d: ChernData = parse_json(&read_input(input)?)?;
    ok(json!({
        "rank": d.rank,
        "index_u": big(&index_u(&d)?),
        "index_su": big(&index_su(&d)?),
    }))
}

fn vdim(k: i64, l: i64) -> Result<Outcome, CliError> {
    let v = example_vdim(ExampleGluingData { k, l })?;
    ok(json!({
        "vdim": big(&v),
        "decomposition": {
            "dim_kz": 0,
            "dim_cz": DIM_CZ,
            "dim_kx": [big(&kx_dim(k)), big(&kx_dim(l))],
        },
    }))
}

fn scan(args: &ScanArgs) -> Result<Outcome, CliError> {
    let norms = match args.norm {
        Some(n) => vec![n],
        None => vec![ScanNorm::L4Err, ScanNorm::L8Curv, ScanNorm::L8Dchi, ScanNorm::Bound],
    };
    let results = norms
        .iter()
        .map(|&n| gluing_scan(n, args.t_min, args.t_max, args.samples))
        .collect::<crate::Result<Vec<_>>>()?;
    if let Some(path) = &args.csv {
        let mut csv = String::from("norm,t,value\n");
        for r in &results {
            for p in &r.points {
                csv.push_str(&format!("{},{:e},{:e}\n", r.norm, p.t, p.value));
            }
        }
        fs::write(path, csv).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    }
    let pass = results.iter().all(|r| r.pass);
    Ok(Outcome {
        json: json!({"scans": results, "pass": pass}),
        pass,
    })
}

fn solve(args: &SolveArgs, err: &mut dyn Write) -> Result<Outcome, CliError> {
    let spec = LatticeSpec::new(args.n, args.spacing, args.group)?;
    if !(args.amp >= 0.0 && args.amp.is_finite()) {
        return Err(CliError::usage(format!("amplitude {} must be non-negative", args.amp)));
    }
    let a0 = GaugeField::random(spec, args.seed, args.amp);
    let (a, report) = match args.method {
        SolveMethod::Gd => gradient_descent(spec, &a0, args.max_steps, args.tol)?,
        SolveMethod::Picard => picard_iterate(spec, &a0, args.max_steps, args.tol)?,
    };
    let _ = writeln!(
        err,
        "{} {} n={} finished after {} iterations, residual {:e}",
        args.method,
        args.group,
        args.n,
        report.iterations,
        report.final_residual()
    );
    if let Some(path) = &args.field_out {
        write_field(path, &a).map_err(|e| CliError::usage(e.to_string()))?;
    }
    let pass = report.converged;
    Ok(Outcome {
        json: serde_json::to_value(&report).expect("reports serialize"),
        pass,
    })
}

fn selfcheck(only: &[u8], err: &mut dyn Write) -> Result<Outcome, CliError> {
    if let Some(bad) = only.iter().find(|&&i| !(1..=9).contains(&i)) {
        return Err(CliError::usage(format!("no criterion {bad}")));
    }
    let board = run_selfcheck(&SelfcheckOptions {
        only: only.to_vec(),
        ..SelfcheckOptions::default()
    });
    for c in &board.criteria {
        let _ = writeln!(
            err,
            "{} {} {} ({:.2} s)",
            if c.passed { "PASS" } else { "FAIL" },
            c.id,
            c.name,
            c.seconds
        );
    }
    Ok(Outcome {
        pass: board.passed,
        json: serde_json::to_value(&board).expect("scoreboards serialize"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_from(std::iter::once("spin7").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn vdim_example() {
        let (code, out, _) = run(&["vdim", "--k", "0", "--l", "0"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["vdim"], json!(-3));
    }

    #[test]
    fn missing_file_is_usage_error() {
        let (code, _, err) = run(&["index", "--file", "/nonexistent/missing.json"]);
        assert_eq!(code, 2);
        assert!(err.contains("missing.json"));
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        assert_eq!(run(&["vdim", "--k", "0", "--l", "0", "--bogus"]).0, 2);
        assert_eq!(run(&["selfcheck", "--only", "11"]).0, 2);
    }

    #[test]
    fn group_passes() {
        for conv in ["I", "II"] {
            let (code, out, _) = run(&["group", "--convention", conv]);
            assert_eq!(code, 0);
            let v: Value = serde_json::from_str(&out).unwrap();
            assert_eq!(v["order"], json!(8));
        }
    }

    #[test]
    fn version_mentions_model() {
        let (code, out, _) = run(&["--version"]);
        assert_eq!(code, 0);
        assert!(out.contains("model"));
    }
}
