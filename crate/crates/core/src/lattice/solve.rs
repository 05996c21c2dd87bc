//! Energy minimisation and the Picard scheme for `π₇(F) = 0` on the lattice.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::ops::{Geometry, LinearizedOperator};
use super::{dot, GaugeField, LatticeSpec};
use crate::error::{Error, Result};

const ARMIJO_C: f64 = 1e-4;
const MIN_STEP: f64 = 1e-30;
const CGLS_RTOL: f64 = 1e-13;
const CGLS_MAX_ITER: usize = 5000;
const EIG_RTOL: f64 = 1e-10;
const EIG_MAX_OUTER: usize = 300;
const CHEB_DEGREE: usize = 20;
const KERNEL_RTOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMethod {
    Gd,
    Picard,
}

impl FromStr for SolveMethod {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gd" => Ok(SolveMethod::Gd),
            "picard" => Ok(SolveMethod::Picard),
            _ => Err(Error::InvalidInput(format!("unknown method {s:?} (expected gd or picard)"))),
        }
    }
}

impl fmt::Display for SolveMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SolveMethod::Gd => "gd",
            SolveMethod::Picard => "picard",
        })
    }
}

/// Histories are indexed by iterate, starting from the initial field.
#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub method: SolveMethod,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub energy_history: Vec<f64>,
    /// `‖x_k − x_{k−1}‖ / ‖x_{k−1} − x_{k−2}‖`, undefined for the first two iterates.
    pub ratio_history: Vec<Option<f64>>,
    pub converged: bool,
    /// Exact kernel dimension of the linearisation (Picard only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kernel_dimension: Option<usize>,
    /// Smallest singular values of the linearisation, the first `8 · dim g` spanning K.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub small_singular_values: Option<Vec<f64>>,
    /// Norm of the right-hand side's component along the approximate cokernel (Picard only).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub cokernel_history: Vec<f64>,
}

impl SolveReport {
    fn new(method: SolveMethod) -> Self {
        SolveReport {
            method,
            iterations: 0,
            residual_history: Vec::new(),
            energy_history: Vec::new(),
            ratio_history: Vec::new(),
            converged: false,
            kernel_dimension: None,
            small_singular_values: None,
            cokernel_history: Vec::new(),
        }
    }

    fn record(&mut self, energy: f64, step: Option<f64>, prev_step: Option<f64>) {
        self.energy_history.push(energy);
        self.residual_history.push(energy.sqrt());
        let ratio = match (step, prev_step) {
            (Some(s), Some(p)) if p > 0.0 => Some(s / p),
            _ => None,
        };
        self.ratio_history.push(ratio);
    }

    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&f64::NAN)
    }

    /// Whether accepted iterates never increased the energy.
    pub fn energy_monotone(&self) -> bool {
        self.energy_history.windows(2).all(|w| w[1] <= w[0])
    }

    /// Largest ratio over the last `count` defined entries.
    pub fn tail_ratio(&self, count: usize) -> Option<f64> {
        let defined: Vec<f64> = self.ratio_history.iter().flatten().copied().collect();
        if defined.is_empty() {
            return None;
        }
        let start = defined.len().saturating_sub(count);
        defined[start..].iter().copied().reduce(f64::max)
    }
}

fn check_spec(spec: LatticeSpec, a: &GaugeField) -> Result<()> {
    if a.spec() != spec {
        return Err(Error::DimensionMismatch {
            expected: spec.field_len(),
            got: a.data().len(),
        });
    }
    Ok(())
}

/// Gradient descent on `Σ ‖π₇F‖²` with Armijo backtracking from step 1.
pub fn gradient_descent(
    spec: LatticeSpec,
    a0: &GaugeField,
    max_steps: usize,
    tol: f64,
) -> Result<(GaugeField, SolveReport)> {
    check_spec(spec, a0)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance {tol} must be positive")));
    }
    let geo = Geometry::new(spec);
    let mut x = a0.data().to_vec();
    let mut e = geo.energy(&x);
    if !e.is_finite() {
        return Err(Error::NonFiniteEnergy(0));
    }
    let mut report = SolveReport::new(SolveMethod::Gd);
    report.record(e, None, None);
    let mut prev_step = None;
    let mut trial = vec![0.0; x.len()];
    while report.iterations < max_steps && e.sqrt() >= tol {
        let g = geo.gradient(&x);
        let gg = dot(&g, &g);
        if gg == 0.0 {
            break;
        }
        let mut t = 1.0;
        let accepted = loop {
            for ((tr, xi), gi) in trial.iter_mut().zip(&x).zip(&g) {
                *tr = xi - t * gi;
            }
            let et = geo.energy(&trial);
            if !et.is_finite() {
                return Err(Error::NonFiniteEnergy(report.iterations + 1));
            }
            if et <= e - ARMIJO_C * t * gg {
                break Some(et);
            }
            t *= 0.5;
            if t < MIN_STEP {
                break None;
            }
        };
        let Some(et) = accepted else { break };
        std::mem::swap(&mut x, &mut trial);
        e = et;
        let step = t * gg.sqrt();
        report.iterations += 1;
        report.record(e, Some(step), prev_step);
        prev_step = Some(step);
    }
    report.converged = e.sqrt() < tol;
    Ok((GaugeField::from_vec(spec, x)?, report))
}

fn apply_block(apply: &dyn Fn(&[f64], &mut [f64]), y: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::<f64>::zeros(y.nrows(), y.ncols());
    let mut buf = vec![0.0; y.nrows()];
    for j in 0..y.ncols() {
        apply(y.column(j).as_slice(), &mut buf);
        out.set_column(j, &DVector::from_column_slice(&buf));
    }
    out
}

fn orthonormalize(y: DMatrix<f64>) -> DMatrix<f64> {
    let cols = y.ncols();
    let q = y.qr().q();
    q.columns(0, cols).into_owned()
}

/// Smallest eigenpairs of a positive semi-definite operator bounded by `upper`,
/// by Chebyshev-filtered subspace iteration. Values ascend and come with their
/// residual norms; the first `want` pairs are converged.
pub(crate) fn smallest_eigenpairs(
    apply: &dyn Fn(&[f64], &mut [f64]),
    dim: usize,
    want: usize,
    block: usize,
    upper: f64,
    seed: u64,
) -> (Vec<f64>, DMatrix<f64>, Vec<f64>) {
    let block = block.min(dim);
    let want = want.min(block);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut y = orthonormalize(DMatrix::from_fn(dim, block, |_, _| rng.random::<f64>() - 0.5));
    let mut values = vec![0.0; block];
    let mut residuals = vec![f64::INFINITY; block];
    for _ in 0..EIG_MAX_OUTER {
        let sy = apply_block(apply, &y);
        let h = y.transpose() * &sy;
        let h = (&h + h.transpose()) * 0.5;
        let eig = h.symmetric_eigen();
        let mut order: Vec<usize> = (0..block).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
        let v = DMatrix::from_fn(block, block, |i, j| eig.eigenvectors[(i, order[j])]);
        values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        y = &y * &v;
        let sy = sy * &v;
        residuals = (0..block).map(|j| (sy.column(j) - y.column(j) * values[j]).norm()).collect();
        if residuals[..want].iter().all(|&r| r <= EIG_RTOL * upper) {
            break;
        }
        let mut a = values[block - 1];
        if !(a > 0.0 && a < 0.99 * upper) {
            a = 0.5 * upper;
        }
        let (e, c) = ((upper - a) / 2.0, (upper + a) / 2.0);
        let mut y0 = y.clone();
        let mut y1 = (apply_block(apply, &y0) - &y0 * c) / e;
        for _ in 2..=CHEB_DEGREE {
            let y2 = (apply_block(apply, &y1) - &y1 * c) * (2.0 / e) - &y0;
            y0 = y1;
            y1 = y2;
        }
        y = orthonormalize(y1);
    }
    (values, y, residuals)
}

/// Minimum-norm least-squares solution of `A x = b` by CGLS from zero.
pub(crate) fn cgls(
    apply: &dyn Fn(&[f64], &mut [f64]),
    apply_t: &dyn Fn(&[f64], &mut [f64]),
    cols: usize,
    b: &[f64],
) -> Vec<f64> {
    let mut x = vec![0.0; cols];
    let mut r = b.to_vec();
    let mut s = vec![0.0; cols];
    apply_t(&r, &mut s);
    let mut p = s.clone();
    let mut gamma = dot(&s, &s);
    let gamma0 = gamma;
    let mut q = vec![0.0; b.len()];
    for _ in 0..CGLS_MAX_ITER {
        if gamma <= (CGLS_RTOL * CGLS_RTOL) * gamma0 || gamma == 0.0 {
            break;
        }
        apply(&p, &mut q);
        let qq = dot(&q, &q);
        if qq == 0.0 {
            break;
        }
        let alpha = gamma / qq;
        x.iter_mut().zip(&p).for_each(|(xi, pi)| *xi += alpha * pi);
        r.iter_mut().zip(&q).for_each(|(ri, qi)| *ri -= alpha * qi);
        apply_t(&r, &mut s);
        let gamma_new = dot(&s, &s);
        let beta = gamma_new / gamma;
        p.iter_mut().zip(&s).for_each(|(pi, si)| *pi = si + beta * *pi);
        gamma = gamma_new;
    }
    x
}

fn project_out(basis: &DMatrix<f64>, v: &mut [f64]) {
    let mut w = DVector::from_column_slice(v);
    let coeffs = basis.transpose() * &w;
    w -= basis * coeffs;
    v.copy_from_slice(w.as_slice());
}

fn component_norm(basis: &DMatrix<f64>, v: &[f64]) -> f64 {
    (basis.transpose() * DVector::from_column_slice(v)).norm()
}

/// Picard iteration about the background `a0`.
///
/// Step `k` solves `L a^{k+1} = (0, −π₇F(a0) − π₇[a^k ∧ a^k])` in the least-squares
/// sense on the complement K^⊥ of the approximate kernel K (the `8 · dim g`
/// smallest singular directions of `L = (d*_A, π₇ d_A)`), with the right-hand
/// side's approximate-cokernel component dropped and recorded. The returned
/// field is `a0 + a^k`.
pub fn picard_iterate(
    spec: LatticeSpec,
    a0: &GaugeField,
    k_max: usize,
    tol: f64,
) -> Result<(GaugeField, SolveReport)> {
    check_spec(spec, a0)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance {tol} must be positive")));
    }
    let op = LinearizedOperator::new(a0);
    let geo = &op.geo;
    let (rows, cols) = (op.rows(), op.cols());
    let m = 8 * geo.dg;
    let upper = op.norm_sq_bound();

    let normal = |x: &[f64], out: &mut [f64]| {
        let mut y = vec![0.0; rows];
        op.apply(x, &mut y);
        op.apply_t(&y, out);
    };
    let co_normal = |y: &[f64], out: &mut [f64]| {
        let mut x = vec![0.0; cols];
        op.apply_t(y, &mut x);
        op.apply(&x, out);
    };
    let (right_vals, right, right_res) = smallest_eigenpairs(&normal, cols, m, m + 6, upper, 0x5eed);
    let (_, left, _) = smallest_eigenpairs(&co_normal, rows, m, m + 6, upper, 0x1eaf);
    let kernel = right_vals
        .iter()
        .zip(&right_res)
        .filter(|(&l, &r)| l <= KERNEL_RTOL * upper && r <= EIG_RTOL * upper)
        .count();
    if kernel > m {
        return Err(Error::NotSurjective { kernel, expected: m });
    }
    let k_basis = right.columns(0, m).into_owned();
    let c_basis = left.columns(0, m).into_owned();

    let reduced = |x: &[f64], out: &mut [f64]| {
        let mut x = x.to_vec();
        project_out(&k_basis, &mut x);
        op.apply(&x, out);
        project_out(&c_basis, out);
    };
    let reduced_t = |y: &[f64], out: &mut [f64]| {
        let mut y = y.to_vec();
        project_out(&c_basis, &mut y);
        op.apply_t(&y, out);
        project_out(&k_basis, out);
    };

    let mut f = vec![0.0; spec.curvature_len()];
    geo.curvature(a0.data(), &mut f);
    let mut base = vec![0.0; rows];
    geo.project7(&f, &mut base[op.div_len()..]);
    base.iter_mut().for_each(|v| *v = -*v);

    let rhs = |a: &[f64]| -> Vec<f64> {
        let mut b = base.clone();
        if !spec.group.is_abelian() {
            let mut q = vec![0.0; spec.curvature_len()];
            geo.quadratic(a, &mut q);
            let mut bq = vec![0.0; rows - op.div_len()];
            geo.project7(&q, &mut bq);
            for (bi, qi) in b[op.div_len()..].iter_mut().zip(&bq) {
                *bi -= qi;
            }
        }
        b
    };
    let total_energy = |a: &[f64]| -> f64 {
        let x: Vec<f64> = a0.data().iter().zip(a).map(|(p, q)| p + q).collect();
        geo.energy(&x)
    };

    let mut report = SolveReport::new(SolveMethod::Picard);
    report.kernel_dimension = Some(kernel);
    report.small_singular_values = Some(right_vals.iter().take(m + 1).map(|l| l.max(0.0).sqrt()).collect());
    let mut a = vec![0.0; cols];
    let mut b = rhs(&a);
    report.record(total_energy(&a), None, None);
    report.cokernel_history.push(component_norm(&c_basis, &b));
    let mut prev_step = None;
    while report.iterations < k_max {
        project_out(&c_basis, &mut b);
        let next = cgls(&reduced, &reduced_t, cols, &b);
        let step = next.iter().zip(&a).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        a = next;
        report.iterations += 1;
        let e = total_energy(&a);
        if !e.is_finite() {
            return Err(Error::NonFiniteEnergy(report.iterations));
        }
        report.record(e, Some(step), prev_step);
        prev_step = Some(step);
        b = rhs(&a);
        report.cokernel_history.push(component_norm(&c_basis, &b));
        if spec.group.is_abelian() || step < tol {
            report.converged = true;
            break;
        }
    }
    let out: Vec<f64> = a0.data().iter().zip(&a).map(|(p, q)| p + q).collect();
    Ok((GaugeField::from_vec(spec, out)?, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{energy, Group};

    fn spec(g: Group) -> LatticeSpec {
        LatticeSpec::new(2, 1.0, g).unwrap()
    }

    #[test]
    fn zero_start_is_converged() {
        let s = spec(Group::SU2);
        let (a, r) = gradient_descent(s, &GaugeField::zeros(s), 10, 1e-8).unwrap();
        assert_eq!(r.iterations, 0);
        assert!(r.converged && a.norm() == 0.0);
        assert_eq!(r.residual_history, vec![0.0]);
    }

    #[test]
    fn gd_u1_reaches_tolerance() {
        let s = spec(Group::U1);
        let a0 = GaugeField::random(s, 1, 1e-2);
        let (a, r) = gradient_descent(s, &a0, 5000, 1e-10).unwrap();
        assert!(r.converged, "{:?}", r.residual_history.last());
        assert!(r.energy_monotone());
        assert!(energy(s, &a).unwrap().sqrt() < 1e-10);
        assert_eq!(r.residual_history.len(), r.ratio_history.len());
    }

    #[test]
    fn gd_rejects_bad_tolerance() {
        let s = spec(Group::U1);
        assert!(gradient_descent(s, &GaugeField::zeros(s), 1, 0.0).is_err());
    }

    #[test]
    fn cgls_min_norm() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0, 0.0]);
        let ap = |x: &[f64], o: &mut [f64]| o.copy_from_slice((&a * DVector::from_column_slice(x)).as_slice());
        let atp = |x: &[f64], o: &mut [f64]| {
            o.copy_from_slice((a.transpose() * DVector::from_column_slice(x)).as_slice())
        };
        let x = cgls(&ap, &atp, 3, &[1.0, 4.0, 5.0]);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12 && x[2].abs() < 1e-12);
    }

    #[test]
    fn subspace_iteration_small_diagonal() {
        let d: Vec<f64> = (0..40).map(|i| if i < 3 { 1e-3 * i as f64 } else { 1.0 + i as f64 }).collect();
        let ap = |x: &[f64], o: &mut [f64]| {
            for i in 0..40 {
                o[i] = d[i] * x[i];
            }
        };
        let (vals, _, _) = smallest_eigenpairs(&ap, 40, 4, 8, 50.0, 3);
        for (v, e) in vals.iter().zip([0.0, 1e-3, 2e-3, 4.0]) {
            assert!((v - e).abs() < 1e-8, "{vals:?}");
        }
    }

    #[test]
    fn picard_u1_one_step() {
        let s = spec(Group::U1);
        let a0 = GaugeField::random(s, 2, 1e-2);
        let (a, r) = picard_iterate(s, &a0, 10, 1e-12).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.converged);
        assert_eq!(r.kernel_dimension, Some(8));
        assert!(energy(s, &a).unwrap().sqrt() < 1e-10);
    }

    #[test]
    fn picard_zero_is_fixed_point() {
        let s = spec(Group::SU2);
        let (a, r) = picard_iterate(s, &GaugeField::zeros(s), 5, 1e-12).unwrap();
        assert!(r.converged && a.norm() == 0.0);
    }
}
