//! The acceptance battery, criteria 1 to 9, as a library.
//!
//! Criteria 1 to 4 take the 4-form under test as a parameter so that a
//! corrupted Cayley form can be fed through the same checks.

use std::time::Instant;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::casd::{complex_asd_residual, pi7_norm, verify_split_match, ComplexStructure, CurvatureSample};
use crate::forms::{cayley_form, hodge_star, pullback, wedge, KForm, Matrix8, MultiIndex};
use crate::gluing::{gluing_scan, ScanNorm};
use crate::index::{example_vdim, h0_exceptional, h1_delta, h3_delta, index_su2, ExampleGluingData};
use crate::lattice::{
    energy, fourier_oracle_u1, gradient, gradient_descent, picard_iterate, GaugeField, Group, LatticeSpec,
};
use crate::split::{eigensplit, eigenvalue_clusters, gamma8_elements, lambda_operator, Convention, Vec28, CLUSTER_TOL};

/// Starts, step budget and tolerance for the SU(2) descent runs.
pub const SU2_GD_SEEDS: [u64; 3] = [1, 2, 3];
pub const SU2_GD_MAX_STEPS: usize = 5000;
pub const SU2_GD_TOL: f64 = 1e-6;
pub const SU2_PICARD_SEEDS: [u64; 2] = [1, 2];

#[derive(Clone, Debug, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    /// Wall time, kept out of the JSON so output is reproducible.
    #[serde(skip)]
    pub seconds: f64,
    pub details: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct Scoreboard {
    pub version: String,
    pub criteria: Vec<CriterionResult>,
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct SelfcheckOptions {
    /// The 4-form examined by criteria 1 to 4.
    pub omega: KForm,
    /// Criteria to run; all of 1..=9 when empty.
    pub only: Vec<u8>,
}

impl Default for SelfcheckOptions {
    fn default() -> Self {
        SelfcheckOptions {
            omega: cayley_form(),
            only: Vec::new(),
        }
    }
}

pub const CRITERIA: [(u8, &str); 9] = [
    (1, "eigenstructure"),
    (2, "projection formula"),
    (3, "cayley identities"),
    (4, "gamma8 group"),
    (5, "complex asd dimensions"),
    (6, "index arithmetic"),
    (7, "gluing scalings"),
    (8, "u1 lattice solver"),
    (9, "su2 lattice solver"),
];

pub fn run_selfcheck(opts: &SelfcheckOptions) -> Scoreboard {
    let criteria: Vec<CriterionResult> = CRITERIA
        .iter()
        .filter(|(id, _)| opts.only.is_empty() || opts.only.contains(id))
        .map(|&(id, _)| run_criterion(id, &opts.omega))
        .collect();
    Scoreboard {
        version: crate::VERSION.to_string(),
        passed: criteria.iter().all(|c| c.passed),
        criteria,
    }
}

/// Runs one criterion; unknown ids fail.
pub fn run_criterion(id: u8, omega: &KForm) -> CriterionResult {
    let start = Instant::now();
    let name = CRITERIA
        .iter()
        .find(|(i, _)| *i == id)
        .map(|(_, n)| *n)
        .unwrap_or("unknown");
    let (passed, details) = match id {
        1 => eigenstructure(omega),
        2 => projection_formula(omega),
        3 => cayley_identities(omega),
        4 => gamma8_group(omega),
        5 => complex_asd_dimensions(),
        6 => index_arithmetic(),
        7 => gluing_scalings(),
        8 => u1_solver(),
        9 => su2_solver(),
        _ => (false, json!({"error": format!("no criterion {id}")})),
    };
    CriterionResult {
        id,
        name,
        passed,
        seconds: start.elapsed().as_secs_f64(),
        details,
    }
}

fn failure(e: impl std::fmt::Display) -> (bool, Value) {
    (false, json!({"error": e.to_string()}))
}

fn random_two_form(rng: &mut ChaCha8Rng) -> KForm {
    let c = (0..28).map(|_| rng.random_range(-1.0..1.0)).collect();
    KForm::from_coeffs(2, c).expect("28 coefficients")
}

fn eigenstructure(omega: &KForm) -> (bool, Value) {
    let clusters = match lambda_operator(omega).and_then(|op| eigenvalue_clusters(&op)) {
        Ok(c) => c,
        Err(e) => return failure(e),
    };
    let passed = clusters.len() == 2
        && (clusters[0].0 + 1.0).abs() <= CLUSTER_TOL
        && clusters[0].1 == 21
        && (clusters[1].0 - 3.0).abs() <= CLUSTER_TOL
        && clusters[1].1 == 7;
    let listed: Vec<Value> = clusters
        .iter()
        .map(|(v, m)| json!({"eigenvalue": v, "multiplicity": m}))
        .collect();
    (passed, json!({"clusters": listed}))
}

fn projection_formula(omega: &KForm) -> (bool, Value) {
    let pair = match lambda_operator(omega).and_then(|op| eigensplit(&op)) {
        Ok(p) => p,
        Err(e) => return failure(e),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let a = random_two_form(&mut rng);
        let formula = match wedge(omega, &a) {
            Ok(w) => hodge_star(&w).add(&a).expect("grade 2").scaled(0.25),
            Err(e) => return failure(e),
        };
        let spectral = pair.p7 * Vec28::from_column_slice(a.coeffs());
        let diff = formula
            .coeffs()
            .iter()
            .zip(spectral.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max);
        worst = worst.max(diff);
    }
    (worst <= 1e-12, json!({"samples": 1000, "max_abs_diff": worst}))
}

/// Dense antisymmetric tensor of a 4-form, `8⁴` entries.
fn dense4(omega: &KForm) -> Vec<f64> {
    let mut t = vec![0.0; 4096];
    for (idx, c) in omega.terms() {
        let axes: Vec<usize> = idx.axes().iter().map(|a| a - 1).collect();
        for p in permutations(4) {
            let v: Vec<usize> = p.iter().map(|&i| axes[i]).collect();
            t[((v[0] * 8 + v[1]) * 8 + v[2]) * 8 + v[3]] = parity(&p) * c;
        }
    }
    t
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Sign of a sequence of distinct integers, by counting inversions.
fn parity(p: &[usize]) -> f64 {
    let mut inv = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn cayley_identities(omega: &KForm) -> (bool, Value) {
    if omega.grade() != 4 {
        return failure("not a 4-form");
    }
    let t = dense4(omega);
    let at = |v: &[usize]| t[((v[0] * 8 + v[1]) * 8 + v[2]) * 8 + v[3]];

    // (∗Ω)_k = ε(j, k) Ω_j with j the complement of k, both increasing.
    let lib_star = hodge_star(omega);
    let mut star_err: f64 = 0.0;
    let mut lib_err: f64 = 0.0;
    for r in 0..70 {
        let k: Vec<usize> = MultiIndex::from_rank(4, r).axes().iter().map(|a| a - 1).collect();
        let j: Vec<usize> = (0..8).filter(|x| !k.contains(x)).collect();
        let mut seq = j.clone();
        seq.extend(&k);
        let star_k = parity(&seq) * at(&j);
        star_err = star_err.max((star_k - at(&k)).abs());
        lib_err = lib_err.max((star_k - lib_star.coeffs()[r]).abs());
    }

    // (Ω ∧ Ω)_{12…8} = (1/(4!·4!)) Σ_σ sgn σ Ω_{σ1…σ4} Ω_{σ5…σ8}.
    let mut top = 0.0;
    for p in permutations(8) {
        let a = at(&p[..4]);
        if a == 0.0 {
            continue;
        }
        top += parity(&p) * a * at(&p[4..]);
    }
    top /= 576.0;
    let vol_err = (top - 14.0).abs();
    match wedge(omega, omega) {
        Ok(sq) => lib_err = lib_err.max((sq.coefficient(&[1, 2, 3, 4, 5, 6, 7, 8]) - top).abs()),
        Err(e) => return failure(e),
    }

    (
        star_err <= 1e-12 && vol_err <= 1e-12,
        json!({
            "star_residual": star_err,
            "wedge_top_coefficient": top,
            "wedge_residual": vol_err,
            "library_vs_oracle": lib_err,
        }),
    )
}

fn gamma8_group(omega: &KForm) -> (bool, Value) {
    let mut passed = true;
    let mut per = Vec::new();
    for conv in [Convention::I, Convention::II] {
        let els = gamma8_elements(conv);
        let non_abelian = els.iter().any(|a| {
            els.iter()
                .any(|b| (a.map.compose(&b.map).0 - b.map.compose(&a.map).0).amax() > 1e-12)
        });
        let mut metric_err: f64 = 0.0;
        let mut form_err: f64 = 0.0;
        for g in &els {
            let m = g.map.matrix();
            metric_err = metric_err.max((m.transpose() * m - Matrix8::identity()).amax());
            form_err = form_err.max(match pullback(&g.map, omega) {
                Ok(p) => p.max_abs_diff(omega),
                Err(_) => f64::INFINITY,
            });
        }
        let ok = els.len() == 8 && non_abelian && metric_err <= 1e-12 && form_err <= 1e-12;
        passed &= ok;
        per.push(json!({
            "convention": conv.to_string(),
            "order": els.len(),
            "non_abelian": non_abelian,
            "metric_residual": metric_err,
            "form_residual": form_err,
        }));
    }
    (passed, json!({"conventions": per}))
}

fn random_skew_hermitian(rank: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let m = DMatrix::from_fn(rank, rank, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    (&m - m.adjoint()).scale(0.5)
}

/// Random `u(r)`-valued 2-form sample; kind 0 is generic, 1 lies in Λ²₂₁,
/// 2 is a Λ²₂₁ sample perturbed by a small Λ²₇ part.
pub fn random_curvature_sample(kind: usize, rank: usize, rng: &mut ChaCha8Rng) -> CurvatureSample {
    let pair = crate::split::standard_projectors();
    let generic = CurvatureSample {
        rank,
        components: (0..28).map(|_| random_skew_hermitian(rank, rng)).collect(),
    };
    match kind {
        0 => generic,
        1 => generic.map_forms(&pair.p21),
        _ => {
            let mut f = generic.map_forms(&pair.p21);
            let extra = CurvatureSample {
                rank,
                components: (0..28).map(|_| random_skew_hermitian(rank, rng)).collect(),
            }
            .map_forms(&(pair.p7 * 1e-6));
            for (c, e) in f.components.iter_mut().zip(extra.components) {
                *c += e;
            }
            f
        }
    }
}

fn complex_asd_dimensions() -> (bool, Value) {
    let mut passed = true;
    let mut per = Vec::new();
    for conv in [Convention::I, Convention::II] {
        let cs = ComplexStructure::new(conv);
        let r = verify_split_match(&cs);
        let ok = r.matched && r.dims21 == (15, 6) && r.dims7 == (1, 6);
        passed &= ok;

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut disagreements = 0;
        let mut instantons = 0;
        for i in 0..1000 {
            let f = random_curvature_sample(i % 3, 2 + i % 2, &mut rng);
            let (asd, trace) = match complex_asd_residual(&cs, &f) {
                Ok(v) => v,
                Err(e) => return failure(e),
            };
            let casd_zero = asd <= 1e-10 && trace <= 1e-10;
            let pi7_zero = pi7_norm(&f) <= 1e-10;
            instantons += pi7_zero as usize;
            disagreements += (casd_zero != pi7_zero) as usize;
        }
        passed &= disagreements == 0;
        per.push(json!({
            "convention": conv.to_string(),
            "dims21": [r.dims21.0, r.dims21.1],
            "dims7": [r.dims7.0, r.dims7.1],
            "max_angle21": r.max_angle21,
            "max_angle7": r.max_angle7,
            "samples": 1000,
            "instanton_samples": instantons,
            "disagreements": disagreements,
        }));
    }
    (passed, json!({"conventions": per}))
}

fn index_arithmetic() -> (bool, Value) {
    let su2 = index_su2(0, 0).ok();
    let vdim = example_vdim(ExampleGluingData { k: 0, l: 0 }).ok();
    let recursion = (-10..=0).all(|m| h1_delta(m - 1) - h1_delta(m) == h0_exceptional(m));
    let duality = (-10..=10).all(|m| h3_delta(m) == h1_delta(-m));
    let minus3 = Some(BigInt::from(-3));
    let passed = su2 == minus3
        && vdim == minus3
        && recursion
        && duality
        && h1_delta(-1) == BigInt::from(1)
        && h0_exceptional(-1) == BigInt::from(35);
    (
        passed,
        json!({
            "index_su2_0_0": su2.as_ref().map(crate::cli::big),
            "example_vdim_0_0": vdim.as_ref().map(crate::cli::big),
            "recursion": recursion,
            "duality": duality,
            "h1_delta_m1": crate::cli::big(&h1_delta(-1)),
            "h0_exceptional_m1": crate::cli::big(&h0_exceptional(-1)),
        }),
    )
}

fn gluing_scalings() -> (bool, Value) {
    let mut passed = true;
    let mut per = Vec::new();
    for norm in [ScanNorm::L4Err, ScanNorm::L8Curv, ScanNorm::Bound, ScanNorm::L8Dchi] {
        match gluing_scan(norm, 1e-5, 1e-2, 10) {
            Ok(r) => {
                passed &= r.pass;
                per.push(json!({
                    "norm": norm.to_string(),
                    "exponent": r.exponent,
                    "expected": r.expected,
                    "tolerance": r.tolerance,
                    "r_squared": r.r_squared,
                    "pass": r.pass,
                }));
            }
            Err(e) => return failure(e),
        }
    }
    (passed, json!({"scans": per}))
}

fn u1_solver() -> (bool, Value) {
    let spec = LatticeSpec::new(2, 1.0, Group::U1).expect("valid lattice");
    let oracle = match fourier_oracle_u1(spec) {
        Ok(o) => o,
        Err(e) => return failure(e),
    };
    let mut passed = true;
    let mut runs = Vec::new();
    for seed in 1..=5 {
        let a0 = GaugeField::random(spec, seed, 1e-2);
        let (a, r) = match gradient_descent(spec, &a0, 5000, 1e-10) {
            Ok(v) => v,
            Err(e) => return failure(e),
        };
        let dist = oracle.distance(&a).unwrap_or(f64::INFINITY);
        let ok = r.converged && r.final_residual() < 1e-8 && dist <= 1e-8;
        passed &= ok;
        runs.push(json!({
            "seed": seed,
            "iterations": r.iterations,
            "residual": r.final_residual(),
            "oracle_distance": dist,
            "pass": ok,
        }));
    }
    (passed, json!({"runs": runs}))
}

/// Largest relative error of `⟨∇E, v⟩` against a central difference, step 1e−5.
pub fn gradient_probe_error(spec: LatticeSpec, probes: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..probes {
        let a = GaugeField::random(spec, rng.random(), 0.5);
        let v = GaugeField::random(spec, rng.random(), 1.0);
        let v_norm = v.norm();
        let g = gradient(spec, &a).expect("matching lattice");
        let analytic: f64 = g.data().iter().zip(v.data()).map(|(x, y)| x * y).sum::<f64>() / v_norm;
        let h = 1e-5;
        let shifted = |s: f64| {
            let data = a.data().iter().zip(v.data()).map(|(x, y)| x + s * h * y / v_norm).collect();
            energy(spec, &GaugeField::from_vec(spec, data).expect("finite")).expect("matching lattice")
        };
        let fd = (shifted(1.0) - shifted(-1.0)) / (2.0 * h);
        worst = worst.max((analytic - fd).abs() / analytic.abs().max(fd.abs()).max(1e-300));
    }
    worst
}

fn su2_solver() -> (bool, Value) {
    let spec = LatticeSpec::new(2, 1.0, Group::SU2).expect("valid lattice");
    let fd_err = gradient_probe_error(spec, 20, 9);
    let fd_ok = fd_err < 1e-6;

    let mut gd_ok = true;
    let mut gd_runs = Vec::new();
    for &seed in &SU2_GD_SEEDS {
        let a0 = GaugeField::random(spec, seed, 0.05);
        let (_, r) = match gradient_descent(spec, &a0, SU2_GD_MAX_STEPS, SU2_GD_TOL) {
            Ok(v) => v,
            Err(e) => return failure(e),
        };
        let ok = r.converged && r.final_residual() < SU2_GD_TOL && r.energy_monotone();
        gd_ok &= ok;
        gd_runs.push(json!({
            "seed": seed,
            "iterations": r.iterations,
            "initial_residual": r.residual_history[0],
            "residual": r.final_residual(),
            "converged": r.converged,
            "energy_monotone": r.energy_monotone(),
        }));
    }

    let mut converging = 0;
    let mut picard_ok = true;
    let mut picard_runs = Vec::new();
    for &seed in &SU2_PICARD_SEEDS {
        let a0 = GaugeField::random(spec, seed, 0.05);
        let (_, r) = match picard_iterate(spec, &a0, 30, 1e-10) {
            Ok(v) => v,
            Err(e) => return failure(e),
        };
        let tail = r.tail_ratio(3);
        if r.converged {
            converging += 1;
            picard_ok &= tail.is_some_and(|t| t <= 0.6);
        }
        picard_runs.push(json!({
            "seed": seed,
            "iterations": r.iterations,
            "converged": r.converged,
            "tail_ratio": tail,
            "residual": r.final_residual(),
            "cokernel_component": r.cokernel_history.last(),
        }));
    }
    picard_ok &= converging > 0;

    (
        fd_ok && gd_ok && picard_ok,
        json!({
            "gradient_check": {"probes": 20, "max_relative_error": fd_err, "pass": fd_ok},
            "gradient_descent": {"tol": SU2_GD_TOL, "max_steps": SU2_GD_MAX_STEPS, "runs": gd_runs, "pass": gd_ok},
            "picard": {"runs": picard_runs, "converging_runs": converging, "pass": picard_ok},
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::rank_of;

    #[test]
    fn oracle_helpers() {
        assert_eq!(permutations(4).len(), 24);
        assert_eq!(parity(&[1, 0, 2]), -1.0);
        assert_eq!(parity(&[1, 2, 0]), 1.0);
        let t = dense4(&cayley_form());
        let at = |i: usize, j: usize, k: usize, l: usize| t[((i * 8 + j) * 8 + k) * 8 + l];
        assert_eq!(at(0, 1, 4, 5), 1.0);
        assert_eq!(at(1, 0, 4, 5), -1.0);
    }

    #[test]
    fn fast_criteria_pass() {
        for id in [1, 2, 3, 4, 6] {
            let r = run_criterion(id, &cayley_form());
            assert!(r.passed, "{}: {}", r.name, r.details);
        }
    }

    #[test]
    fn flipped_term_breaks_multiplicities() {
        let mut omega = cayley_form();
        let i = rank_of(MultiIndex::new(&[1, 2, 5, 6]).unwrap().mask());
        omega.coeffs_mut()[i] = -omega.coeffs()[i];
        let r = run_criterion(1, &omega);
        assert!(!r.passed, "{}", r.details);
    }

    #[test]
    fn unknown_criterion_fails() {
        assert!(!run_criterion(42, &cayley_form()).passed);
    }
}
