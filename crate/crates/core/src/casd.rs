//! SU(4) ⊂ Spin(7): type decomposition of 2-forms, the anti-linear operator
//! `*_θ` on (0,2)-forms, and the complex anti-self-dual form of the instanton
//! equation.
//!
//! Complex coordinates are `w_k = u_k + i v_k` with `(u, v)` read off the rows
//! of [`complex_coordinates`]. `(0,2)`-forms are stored by their coefficients
//! in the basis `dw̄_a ∧ dw̄_b`, `a < b`, taken as orthonormal; this is the
//! normalisation in which `φ ∧ *_θ ψ = ⟨φ, ψ⟩ θ̄` makes `*_θ` an involution.

use nalgebra::{DMatrix, SMatrix};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{inner, pullback, wedge, KForm, LinearMap8, Matrix8, MultiIndex};
use crate::split::{complex_coordinates, standard_projectors, Convention, Mat28, Vec28};

/// Index pairs `(a, b)` of the basis `dw̄_a ∧ dw̄_b`, 0-based.
pub const PAIRS4: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

// `*_θ dw̄_I = sign · dw̄_{I^c}`, from `dw̄_I ∧ dw̄_{I^c} = sign · θ̄`.
const STAR_TABLE: [(usize, f64); 6] = [(5, 1.0), (4, -1.0), (3, 1.0), (2, 1.0), (1, -1.0), (0, 1.0)];

/// A complex-valued form stored as real and imaginary parts.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexForm {
    pub re: KForm,
    pub im: KForm,
}

impl ComplexForm {
    pub fn real(re: KForm) -> Result<Self> {
        let im = KForm::zero(re.grade())?;
        Ok(ComplexForm { re, im })
    }

    pub fn zero(grade: usize) -> Result<Self> {
        Ok(ComplexForm {
            re: KForm::zero(grade)?,
            im: KForm::zero(grade)?,
        })
    }

    pub fn grade(&self) -> usize {
        self.re.grade()
    }

    pub fn wedge(&self, other: &ComplexForm) -> Result<ComplexForm> {
        let rr = wedge(&self.re, &other.re)?;
        let ii = wedge(&self.im, &other.im)?;
        let ri = wedge(&self.re, &other.im)?;
        let ir = wedge(&self.im, &other.re)?;
        Ok(ComplexForm {
            re: rr.sub(&ii)?,
            im: ri.add(&ir)?,
        })
    }

    pub fn conj(&self) -> ComplexForm {
        ComplexForm {
            re: self.re.clone(),
            im: self.im.scaled(-1.0),
        }
    }

    pub fn scale(&self, c: Complex64) -> ComplexForm {
        ComplexForm {
            re: self.re.scaled(c.re).sub(&self.im.scaled(c.im)).expect("same grade"),
            im: self.re.scaled(c.im).add(&self.im.scaled(c.re)).expect("same grade"),
        }
    }

    pub fn add(&self, other: &ComplexForm) -> Result<ComplexForm> {
        Ok(ComplexForm {
            re: self.re.add(&other.re)?,
            im: self.im.add(&other.im)?,
        })
    }

    pub fn max_abs_diff(&self, other: &ComplexForm) -> f64 {
        self.re.max_abs_diff(&other.re).max(self.im.max_abs_diff(&other.im))
    }

    /// Complex-bilinear evaluation of a 2-form on two complex vectors.
    pub fn eval2(&self, v: &[Complex64; 8], w: &[Complex64; 8]) -> Complex64 {
        debug_assert_eq!(self.grade(), 2);
        let mut acc = Complex64::new(0.0, 0.0);
        for (r, ((idx, re), im)) in (0..28)
            .map(|r| MultiIndex::from_rank(2, r))
            .zip(self.re.coeffs())
            .zip(self.im.coeffs())
            .enumerate()
        {
            let _ = r;
            let (i, j) = (idx.axes()[0] - 1, idx.axes()[1] - 1);
            acc += Complex64::new(*re, *im) * (v[i] * w[j] - v[j] * w[i]);
        }
        acc
    }
}

/// Coefficients of a (0,2)-form in the basis `dw̄_a ∧ dw̄_b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZeroTwoForm(pub [Complex64; 6]);

impl ZeroTwoForm {
    pub fn zero() -> Self {
        ZeroTwoForm([Complex64::new(0.0, 0.0); 6])
    }

    pub fn scale(&self, c: Complex64) -> Self {
        ZeroTwoForm(self.0.map(|x| x * c))
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.0;
        for (o, b) in out.iter_mut().zip(other.0) {
            *o += b;
        }
        ZeroTwoForm(out)
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Real coordinates `(Re c₀, Im c₀, …)`.
    pub fn to_real(&self) -> [f64; 12] {
        let mut out = [0.0; 12];
        for (k, c) in self.0.iter().enumerate() {
            out[2 * k] = c.re;
            out[2 * k + 1] = c.im;
        }
        out
    }

    pub fn from_real(v: &[f64]) -> Self {
        let mut out = [Complex64::new(0.0, 0.0); 6];
        for (k, c) in out.iter_mut().enumerate() {
            *c = Complex64::new(v[2 * k], v[2 * k + 1]);
        }
        ZeroTwoForm(out)
    }
}

/// Hermitian product, linear in the first slot.
pub fn zero_two_inner(phi: &ZeroTwoForm, psi: &ZeroTwoForm) -> Complex64 {
    phi.0.iter().zip(&psi.0).map(|(a, b)| a * b.conj()).sum()
}

/// `*_θ` in coordinates.
pub fn star_theta_coords(phi: &ZeroTwoForm) -> ZeroTwoForm {
    let mut out = [Complex64::new(0.0, 0.0); 6];
    for (k, c) in phi.0.iter().enumerate() {
        let (target, sign) = STAR_TABLE[k];
        out[target] = c.conj() * sign;
    }
    ZeroTwoForm(out)
}

/// The flat Calabi–Yau structure underlying one of the two conventions.
#[derive(Clone, Debug)]
pub struct ComplexStructure {
    pub convention: Convention,
    coords: Matrix8<f64>,
    pub j_matrix: LinearMap8,
    pub kahler_form: KForm,
    /// θ₀ = dw₁ ∧ dw₂ ∧ dw₃ ∧ dw₄ as (Re, Im).
    pub hol_volume: (KForm, KForm),
}

impl ComplexStructure {
    pub fn new(convention: Convention) -> Self {
        let coords = complex_coordinates(convention);
        let mut jy = Matrix8::zeros();
        for k in 0..4 {
            jy[(2 * k + 1, 2 * k)] = 1.0;
            jy[(2 * k, 2 * k + 1)] = -1.0;
        }
        let j_matrix = LinearMap8(coords.transpose() * jy * coords);

        let one_form = |row: usize| {
            KForm::from_coeffs(1, (0..8).map(|j| coords[(row, j)]).collect()).expect("8 coefficients")
        };
        let mut kahler_form = KForm::zero(2).expect("grade 2");
        let mut theta = ComplexForm::real(KForm::scalar(1.0)).expect("grade 0");
        for k in 0..4 {
            let du = one_form(2 * k);
            let dv = one_form(2 * k + 1);
            kahler_form = kahler_form.add(&wedge(&du, &dv).expect("grade 2")).expect("grade 2");
            let dw = ComplexForm { re: du, im: dv };
            theta = theta.wedge(&dw).expect("grade ≤ 4");
        }
        ComplexStructure {
            convention,
            coords,
            j_matrix,
            kahler_form,
            hol_volume: (theta.re, theta.im),
        }
    }

    /// Same complex structure with a replaced Kähler form (negative controls).
    pub fn with_kahler_form(mut self, omega: KForm) -> Result<Self> {
        if omega.grade() != 2 {
            return Err(Error::GradeMismatch {
                expected: 2,
                got: omega.grade(),
            });
        }
        self.kahler_form = omega;
        Ok(self)
    }

    pub fn theta(&self) -> ComplexForm {
        ComplexForm {
            re: self.hol_volume.0.clone(),
            im: self.hol_volume.1.clone(),
        }
    }

    // x-space vector of ∂/∂w_a (holomorphic = false gives ∂/∂w̄_a).
    fn wirtinger(&self, a: usize, holomorphic: bool) -> [Complex64; 8] {
        let s = if holomorphic { -0.5 } else { 0.5 };
        let mut v = [Complex64::new(0.0, 0.0); 8];
        for (j, vj) in v.iter_mut().enumerate() {
            *vj = Complex64::new(0.5 * self.coords[(2 * a, j)], s * self.coords[(2 * a + 1, j)]);
        }
        v
    }

    fn dw(&self, a: usize) -> ComplexForm {
        let row = |r: usize| KForm::from_coeffs(1, (0..8).map(|j| self.coords[(r, j)]).collect()).expect("8");
        ComplexForm {
            re: row(2 * a),
            im: row(2 * a + 1),
        }
    }

    /// `Σ φ_{ab} dw̄_a ∧ dw̄_b` in the real basis.
    pub fn zero_two_to_form(&self, phi: &ZeroTwoForm) -> ComplexForm {
        let mut out = ComplexForm::zero(2).expect("grade 2");
        for (k, &(a, b)) in PAIRS4.iter().enumerate() {
            let basis = self
                .dw(a)
                .conj()
                .wedge(&self.dw(b).conj())
                .expect("grade 2");
            out = out.add(&basis.scale(phi.0[k])).expect("grade 2");
        }
        out
    }

    /// Real form `φ + φ̄` of an element of A^{0,2}.
    pub fn real_form(&self, phi: &ZeroTwoForm) -> KForm {
        self.zero_two_to_form(phi).re.scaled(2.0)
    }

    /// Coordinates of a complex 2-form that must be of pure type (0,2).
    pub fn to_zero_two(&self, form: &ComplexForm) -> Result<ZeroTwoForm> {
        if form.grade() != 2 {
            return Err(Error::GradeMismatch {
                expected: 2,
                got: form.grade(),
            });
        }
        let phi = self.zero_two_part(form);
        let residual = self.zero_two_to_form(&phi).max_abs_diff(form);
        if residual > 1e-12 {
            return Err(Error::NotZeroTwo(residual));
        }
        Ok(phi)
    }

    fn zero_two_part(&self, form: &ComplexForm) -> ZeroTwoForm {
        let mut phi = ZeroTwoForm::zero();
        for (k, &(a, b)) in PAIRS4.iter().enumerate() {
            phi.0[k] = form.eval2(&self.wirtinger(a, false), &self.wirtinger(b, false));
        }
        phi
    }

    fn two_zero_part(&self, form: &ComplexForm) -> [Complex64; 6] {
        let mut out = [Complex64::new(0.0, 0.0); 6];
        for (k, &(a, b)) in PAIRS4.iter().enumerate() {
            out[k] = form.eval2(&self.wirtinger(a, true), &self.wirtinger(b, true));
        }
        out
    }

    /// Matrix of the action `a ↦ J* a` on 2-form coefficients.
    pub fn j_action(&self) -> Mat28 {
        let mut m = Mat28::zeros();
        for j in 0..28 {
            let mut e = KForm::zero(2).expect("grade 2");
            e.coeffs_mut()[j] = 1.0;
            let image = pullback(&self.j_matrix, &e).expect("J is invertible");
            for (i, &c) in image.coeffs().iter().enumerate() {
                m[(i, j)] = c;
            }
        }
        m
    }
}

/// Type decomposition of a real 2-form.
#[derive(Clone, Debug)]
pub struct PQDecomposition {
    /// Coefficients on `dw_a ∧ dw_b`.
    pub part20: [Complex64; 6],
    /// Real (1,1) part.
    pub part11: KForm,
    /// Coefficients on `dw̄_a ∧ dw̄_b`.
    pub part02: ZeroTwoForm,
    /// Multiple of the Kähler form.
    pub trace_part: f64,
    pub traceless11: KForm,
}

impl PQDecomposition {
    /// Real 2-form carried by the (2,0) ⊕ (0,2) components.
    pub fn real_20_02(&self, cs: &ComplexStructure) -> KForm {
        cs.real_form(&self.part02)
    }

    pub fn trace_form(&self, cs: &ComplexStructure) -> KForm {
        cs.kahler_form.scaled(self.trace_part)
    }
}

pub fn decompose_pq(cs: &ComplexStructure, a: &KForm) -> Result<PQDecomposition> {
    if a.grade() != 2 {
        return Err(Error::GradeMismatch {
            expected: 2,
            got: a.grade(),
        });
    }
    let ja = pullback(&cs.j_matrix, a)?;
    let part11 = a.add(&ja)?.scaled(0.5);
    let rest = ComplexForm::real(a.sub(&part11)?)?;
    let part20 = cs.two_zero_part(&rest);
    let part02 = cs.zero_two_part(&rest);
    let trace_part = inner(a, &cs.kahler_form)? / inner(&cs.kahler_form, &cs.kahler_form)?;
    let traceless11 = part11.sub(&cs.kahler_form.scaled(trace_part))?;
    Ok(PQDecomposition {
        part20,
        part11,
        part02,
        trace_part,
        traceless11,
    })
}

/// `*_θ` on a complex 2-form of pure type (0,2).
pub fn star_theta(cs: &ComplexStructure, phi: &ComplexForm) -> Result<ComplexForm> {
    let coords = cs.to_zero_two(phi)?;
    Ok(cs.zero_two_to_form(&star_theta_coords(&coords)))
}

/// Real 12×12 matrix of `*_θ` acting on `ZeroTwoForm::to_real` coordinates.
pub fn star_theta_real_matrix() -> SMatrix<f64, 12, 12> {
    let mut m = SMatrix::<f64, 12, 12>::zeros();
    for j in 0..12 {
        let mut e = [0.0; 12];
        e[j] = 1.0;
        let image = star_theta_coords(&ZeroTwoForm::from_real(&e)).to_real();
        for (i, v) in image.iter().enumerate() {
            m[(i, j)] = *v;
        }
    }
    m
}

/// Orthonormal real basis of the ±1 eigenspace of `*_θ`.
pub fn star_theta_eigenbasis(sign: f64) -> Vec<ZeroTwoForm> {
    let shifted = star_theta_real_matrix() - SMatrix::<f64, 12, 12>::identity() * sign;
    null_space(&DMatrix::from_column_slice(12, 12, shifted.as_slice()), 1e-10)
        .into_iter()
        .map(|v| ZeroTwoForm::from_real(&v))
        .collect()
}

/// Orthonormal basis of the null space of `m` (right singular vectors with σ² ≤ tol).
pub(crate) fn null_space(m: &DMatrix<f64>, tol: f64) -> Vec<Vec<f64>> {
    let n = m.ncols();
    let gram = m.transpose() * m;
    let eig = gram.symmetric_eigen();
    (0..n)
        .filter(|&i| eig.eigenvalues[i].abs() <= tol)
        .map(|i| eig.eigenvectors.column(i).iter().copied().collect())
        .collect()
}

// Orthonormal basis for the span of the given vectors.
fn orthonormal_span(vectors: &[Vec<f64>], tol: f64) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::new();
    for v in vectors {
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let d: f64 = w.iter().zip(q).map(|(a, b)| a * b).sum();
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= d * qi;
                }
            }
        }
        let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > tol {
            out.push(w.into_iter().map(|x| x / n).collect());
        }
    }
    out
}

// Largest principal angle between span(q) and the image of the projector.
fn max_angle_to(q: &[Vec<f64>], projector: &Mat28) -> f64 {
    if q.is_empty() {
        return 0.0;
    }
    let mut resid = DMatrix::<f64>::zeros(28, q.len());
    for (c, v) in q.iter().enumerate() {
        let v = Vec28::from_column_slice(v);
        let r = v - projector * v;
        resid.set_column(c, &r);
    }
    let s = resid.singular_values().max();
    s.min(1.0).asin()
}

/// Outcome of comparing the spectral summands with their complex descriptions.
#[derive(Clone, Debug, Serialize)]
pub struct SplitMatchReport {
    pub convention: Convention,
    /// Real dimensions (Λ₀^{1,1}, Λ^{0,2}₋ | ℝω, Λ^{0,2}₊).
    pub dims21: (usize, usize),
    pub dims7: (usize, usize),
    pub max_angle21: f64,
    pub max_angle7: f64,
    pub matched: bool,
}

/// Checks `Λ²₂₁ = Λ₀^{1,1} ⊕ [Λ^{0,2}₋]` and `Λ²₇ = ℝω ⊕ [Λ^{0,2}₊]`.
pub fn verify_split_match(cs: &ComplexStructure) -> SplitMatchReport {
    let pair = standard_projectors();
    let j = cs.j_action();
    let inv = DMatrix::from_column_slice(28, 28, (j - Mat28::identity()).as_slice());
    let invariant = null_space(&inv, 1e-10);

    // J-invariant forms orthogonal to the J-invariant part of ω.
    let omega = Vec28::from_column_slice(cs.kahler_form.coeffs());
    let omega11 = (omega + j * omega) * 0.5;
    let w = omega11.norm();
    let mut traceless = Vec::new();
    for v in &invariant {
        let mut v = Vec28::from_column_slice(v);
        if w > 1e-12 {
            v -= omega11 * (omega11.dot(&v) / (w * w));
        }
        traceless.push(v.as_slice().to_vec());
    }
    let traceless = orthonormal_span(&traceless, 1e-8);

    let real_parts = |sign: f64| -> Vec<Vec<f64>> {
        let forms: Vec<Vec<f64>> = star_theta_eigenbasis(sign)
            .iter()
            .map(|phi| cs.real_form(phi).into_coeffs())
            .collect();
        orthonormal_span(&forms, 1e-8)
    };
    let minus = real_parts(-1.0);
    let plus = real_parts(1.0);

    let mut side21 = traceless.clone();
    side21.extend(minus.iter().cloned());
    let side21 = orthonormal_span(&side21, 1e-8);
    let mut side7 = vec![cs.kahler_form.coeffs().to_vec()];
    side7.extend(plus.iter().cloned());
    let side7 = orthonormal_span(&side7, 1e-8);

    let max_angle21 = max_angle_to(&side21, &pair.p21);
    let max_angle7 = max_angle_to(&side7, &pair.p7);
    let matched = side21.len() == 21 && side7.len() == 7 && max_angle21 < 1e-9 && max_angle7 < 1e-9;
    SplitMatchReport {
        convention: cs.convention,
        dims21: (traceless.len(), minus.len()),
        dims7: (1, plus.len()),
        max_angle21,
        max_angle7,
        matched,
    }
}

type Extractor = Box<dyn Fn(&DMatrix<Complex64>) -> f64>;

/// Pointwise curvature: one skew-Hermitian `r × r` matrix per 2-form basis element.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureSample {
    pub rank: usize,
    pub components: Vec<DMatrix<Complex64>>,
}

impl CurvatureSample {
    pub fn zero(rank: usize) -> Self {
        CurvatureSample {
            rank,
            components: vec![DMatrix::zeros(rank, rank); 28],
        }
    }

    /// `form ⊗ x`.
    pub fn tensor(form: &KForm, x: &DMatrix<Complex64>) -> Result<Self> {
        if form.grade() != 2 {
            return Err(Error::GradeMismatch {
                expected: 2,
                got: form.grade(),
            });
        }
        let sample = CurvatureSample {
            rank: x.nrows(),
            components: form.coeffs().iter().map(|&c| x * Complex64::new(c, 0.0)).collect(),
        };
        sample.validate()?;
        Ok(sample)
    }

    pub fn validate(&self) -> Result<()> {
        if self.components.len() != 28 {
            return Err(Error::DimensionMismatch {
                expected: 28,
                got: self.components.len(),
            });
        }
        for (k, m) in self.components.iter().enumerate() {
            if m.nrows() != self.rank || m.ncols() != self.rank {
                return Err(Error::InvalidInput(format!("component {k} is not {0}×{0}", self.rank)));
            }
            if (m + m.adjoint()).iter().any(|z| z.norm() > 1e-12) {
                return Err(Error::NotSkewHermitian(k));
            }
        }
        Ok(())
    }

    /// Real 2-forms `f^c`, one per real coordinate of u(r), Frobenius-isometric.
    pub fn real_components(&self) -> Vec<KForm> {
        let r = self.rank;
        let mut extract: Vec<Extractor> = Vec::new();
        for a in 0..r {
            extract.push(Box::new(move |m| m[(a, a)].im));
        }
        let s2 = std::f64::consts::SQRT_2;
        for a in 0..r {
            for b in (a + 1)..r {
                extract.push(Box::new(move |m| s2 * m[(a, b)].re));
                extract.push(Box::new(move |m| s2 * m[(a, b)].im));
            }
        }
        extract
            .iter()
            .map(|f| {
                KForm::from_coeffs(2, self.components.iter().map(f).collect()).expect("28 coefficients")
            })
            .collect()
    }

    /// Apply a real operator on the form index of every matrix entry.
    pub fn map_forms(&self, m: &Mat28) -> CurvatureSample {
        let mut out = CurvatureSample::zero(self.rank);
        for i in 0..28 {
            for j in 0..28 {
                let c = m[(i, j)];
                if c != 0.0 {
                    out.components[i] += &self.components[j] * Complex64::new(c, 0.0);
                }
            }
        }
        out
    }

    pub fn norm(&self) -> f64 {
        self.components.iter().map(|m| m.norm_squared()).sum::<f64>().sqrt()
    }
}

/// `i σ₃`.
pub fn i_sigma3() -> DMatrix<Complex64> {
    DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(0.0, 1.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, 0.0),
            Complex64::new(0.0, -1.0),
        ],
    )
}

/// ‖π₇(f)‖ with the Spin(7) projector.
pub fn pi7_norm(f: &CurvatureSample) -> f64 {
    f.map_forms(&standard_projectors().p7).norm()
}

/// `(‖(1 + *_θ) f^{0,2}‖, ‖Λ f^{1,1}‖)`.
pub fn complex_asd_residual(cs: &ComplexStructure, f: &CurvatureSample) -> Result<(f64, f64)> {
    f.validate()?;
    let omega_sq = inner(&cs.kahler_form, &cs.kahler_form)?;
    let mut asd = 0.0;
    let mut trace = 0.0;
    for form in f.real_components() {
        let d = decompose_pq(cs, &form)?;
        let phi = d.part02;
        asd += phi.add(&star_theta_coords(&phi)).norm().powi(2);
        trace += (d.trace_part * omega_sq).powi(2);
    }
    Ok((asd.sqrt(), trace.sqrt()))
}

/// Result of checking "Hermitian–Einstein with zero trace ⇒ Spin(7)-instanton" at a point.
#[derive(Clone, Debug, Serialize)]
pub struct HeReport {
    pub hypothesis_holds: bool,
    pub zero_two_norm: f64,
    pub trace_norm: f64,
    pub pi7_norm: f64,
    pub implication_holds: bool,
}

pub fn he_implies_instanton(cs: &ComplexStructure, f: &CurvatureSample) -> Result<HeReport> {
    f.validate()?;
    let mut zero_two = 0.0;
    let mut trace = 0.0;
    for form in f.real_components() {
        let d = decompose_pq(cs, &form)?;
        zero_two += d.part02.norm().powi(2);
        trace += d.trace_part.powi(2);
    }
    let zero_two_norm = zero_two.sqrt();
    let trace_norm = trace.sqrt();
    let hypothesis_holds = zero_two_norm <= 1e-10 && trace_norm <= 1e-10;
    let pi7 = pi7_norm(f);
    Ok(HeReport {
        hypothesis_holds,
        zero_two_norm,
        trace_norm,
        pi7_norm: pi7,
        implication_holds: !hypothesis_holds || pi7 <= 1e-10,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ComponentJson {
    idx: Vec<usize>,
    matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleJson {
    rank: usize,
    components: Vec<ComponentJson>,
}

impl Serialize for CurvatureSample {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let components = self
            .components
            .iter()
            .enumerate()
            .filter(|(_, m)| m.iter().any(|z| z.norm() != 0.0))
            .map(|(k, m)| ComponentJson {
                idx: MultiIndex::from_rank(2, k).axes().to_vec(),
                matrix: (0..m.nrows())
                    .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
                    .collect(),
            })
            .collect();
        SampleJson {
            rank: self.rank,
            components,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CurvatureSample {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let j = SampleJson::deserialize(d)?;
        if j.rank == 0 {
            return Err(D::Error::custom("rank must be at least 1"));
        }
        let mut sample = CurvatureSample::zero(j.rank);
        for c in j.components {
            let idx = MultiIndex::new(&c.idx).map_err(D::Error::custom)?;
            if idx.grade() != 2 {
                return Err(D::Error::custom(format!("components.idx {:?} is not a 2-form index", c.idx)));
            }
            if c.matrix.len() != j.rank || c.matrix.iter().any(|row| row.len() != j.rank) {
                return Err(D::Error::custom(format!("components.matrix for {idx} is not {0}×{0}", j.rank)));
            }
            let m = &mut sample.components[idx.rank()];
            for (i, row) in c.matrix.iter().enumerate() {
                for (k, z) in row.iter().enumerate() {
                    m[(i, k)] = Complex64::new(z[0], z[1]);
                }
            }
        }
        sample.validate().map_err(D::Error::custom)?;
        Ok(sample)
    }
}
