//! Mode-by-mode description of the abelian solution space: on a plane wave
//! `v e^{2πi k·x/n}` the lattice operator `π₇∘d` acts as the 28 × 8 matrix
//! `v ↦ π₇(s ∧ v)` with `s_μ = (e^{2πi k_μ/n} − 1)/h`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use super::{GaugeField, Group, LatticeSpec};
use crate::error::{Error, Result};
use crate::forms::MultiIndex;
use crate::split::standard_projectors;

#[derive(Clone, Debug, Serialize)]
pub struct ModeNullSpace {
    pub k: [usize; 8],
    pub rank: usize,
    pub nullity: usize,
    /// Orthonormal null vectors of the mode matrix.
    #[serde(skip)]
    pub basis: Vec<DVector<Complex64>>,
}

#[derive(Clone, Debug)]
pub struct FourierOracle {
    pub spec: LatticeSpec,
    pub modes: Vec<ModeNullSpace>,
}

/// `π₇(s ∧ ·)` in the orthonormal Λ²₇ basis, a 7 × 8 matrix.
pub fn mode_matrix(spec: LatticeSpec, k: &[usize; 8]) -> DMatrix<Complex64> {
    let s: Vec<Complex64> = k
        .iter()
        .map(|&kk| {
            let th = 2.0 * std::f64::consts::PI * kk as f64 / spec.n as f64;
            (Complex64::from_polar(1.0, th) - 1.0) / spec.spacing
        })
        .collect();
    let mut m = DMatrix::<Complex64>::zeros(28, 8);
    for r in 0..28 {
        let idx = MultiIndex::from_rank(2, r);
        let (a, b) = (idx.axes()[0] - 1, idx.axes()[1] - 1);
        m[(r, b)] += s[a];
        m[(r, a)] -= s[b];
    }
    let basis7 = standard_projectors().basis7;
    let b = DMatrix::<Complex64>::from_fn(7, 28, |i, j| Complex64::new(basis7[(i, j)], 0.0));
    b * m
}

/// Null spaces of the mode matrices for every wave vector of the lattice.
pub fn fourier_oracle_u1(spec: LatticeSpec) -> Result<FourierOracle> {
    if spec.group != Group::U1 {
        return Err(Error::InvalidInput("the Fourier oracle is for the U(1) lattice".into()));
    }
    let modes = (0..spec.sites())
        .map(|site| {
            let k = spec.site_coords(site);
            let m = mode_matrix(spec, &k);
            let gram = m.adjoint() * &m;
            let scale = gram.trace().re.max(1.0);
            let eig = gram.symmetric_eigen();
            let basis: Vec<DVector<Complex64>> = (0..8)
                .filter(|&i| eig.eigenvalues[i].abs() <= 1e-12 * scale)
                .map(|i| eig.eigenvectors.column(i).into_owned())
                .collect();
            ModeNullSpace {
                k,
                rank: 8 - basis.len(),
                nullity: basis.len(),
                basis,
            }
        })
        .collect();
    Ok(FourierOracle { spec, modes })
}

/// Unitary 8-dimensional DFT of each direction of a U(1) field, `[k][μ]`.
pub fn field_transform(a: &GaugeField) -> Vec<[Complex64; 8]> {
    let spec = a.spec();
    let n = spec.n;
    let sites = spec.sites();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let norm = 1.0 / (sites as f64).sqrt();
    let mut out = vec![[Complex64::new(0.0, 0.0); 8]; sites];
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for mu in 0..8 {
        let mut buf: Vec<Complex64> = (0..sites).map(|s| Complex64::new(a.get(s, mu, 0), 0.0)).collect();
        for axis in 0..8 {
            let stride = n.pow(axis as u32);
            for base in 0..sites {
                if (base / stride) % n != 0 {
                    continue;
                }
                for (j, l) in line.iter_mut().enumerate() {
                    *l = buf[base + j * stride];
                }
                fft.process(&mut line);
                for (j, l) in line.iter().enumerate() {
                    buf[base + j * stride] = *l;
                }
            }
        }
        for (o, v) in out.iter_mut().zip(buf) {
            o[mu] = v * norm;
        }
    }
    out
}

impl FourierOracle {
    /// ℓ² distance from a U(1) field to the solution space of `π₇(dA) = 0`.
    pub fn distance(&self, a: &GaugeField) -> Result<f64> {
        if a.spec() != self.spec {
            return Err(Error::InvalidInput("field and oracle lattices differ".into()));
        }
        let hat = field_transform(a);
        let mut total = 0.0;
        for (mode, v) in self.modes.iter().zip(&hat) {
            let v = DVector::from_column_slice(v);
            let mut r = v.clone();
            for b in &mode.basis {
                r -= b * b.dotc(&v);
            }
            total += r.norm_squared();
        }
        Ok(total.sqrt())
    }

    pub fn total_nullity(&self) -> usize {
        self.modes.iter().map(|m| m.nullity).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::energy;

    fn spec() -> LatticeSpec {
        LatticeSpec::new(2, 1.0, Group::U1).unwrap()
    }

    #[test]
    fn zero_mode_is_fully_flat() {
        let o = fourier_oracle_u1(spec()).unwrap();
        assert_eq!(o.modes[0].nullity, 8);
        assert!(o.modes[1..].iter().all(|m| m.nullity == 1 && m.rank == 7));
    }

    #[test]
    fn transform_is_unitary() {
        let a = GaugeField::random(spec(), 3, 1.0);
        let hat = field_transform(&a);
        let n2: f64 = hat.iter().flat_map(|v| v.iter()).map(|z| z.norm_sqr()).sum();
        assert!((n2.sqrt() - a.norm()).abs() < 1e-12);
    }

    #[test]
    fn distance_vanishes_on_solutions() {
        let o = fourier_oracle_u1(spec()).unwrap();
        let pure_gauge = GaugeField::from_fn(spec(), |x, mu, _| {
            let phi = |y: &[usize; 8]| (y[0] + 2 * y[3]) as f64 + 0.5 * (y[6] * y[1]) as f64;
            let mut y = *x;
            y[mu] = (x[mu] + 1) % 2;
            phi(&y) - phi(x)
        });
        assert!(o.distance(&pure_gauge).unwrap() < 1e-12);
        let r = GaugeField::random(spec(), 9, 1.0);
        assert!(energy(spec(), &r).unwrap() > 0.0 && o.distance(&r).unwrap() > 0.1);
    }

    #[test]
    fn rejects_su2() {
        assert!(fourier_oracle_u1(LatticeSpec::new(2, 1.0, Group::SU2).unwrap()).is_err());
    }
}
