//! Flat periodic lattice model of the Spin(7)-instanton equation
//! `π₇(F_A) = 0` for U(1) and SU(2) connections on `(ℤ/n)⁸`.
//!
//! A connection is an algebra-valued 1-form per site. Curvature uses forward
//! differences, divergence backward differences, so that `d∘d = 0` and
//! `d*` is the adjoint of `d` on functions exactly.

mod io;
mod ops;
mod oracle;
mod solve;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use io::{read_field, read_field_from, write_field, write_field_to};
pub use ops::{
    curvature, energy, gauge_fix_residual, gradient, pi7_curvature, su2_bracket, LinearizedOperator,
};
pub use oracle::{fourier_oracle_u1, FourierOracle, ModeNullSpace};
pub use solve::{gradient_descent, picard_iterate, SolveMethod, SolveReport};

/// Largest supported site count.
pub const MAX_SITES: usize = 65536;

/// Structure group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    U1,
    SU2,
}

impl Group {
    pub fn dim(self) -> usize {
        match self {
            Group::U1 => 1,
            Group::SU2 => 3,
        }
    }

    pub fn tag(self) -> u8 {
        match self {
            Group::U1 => 0,
            Group::SU2 => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Result<Self> {
        match tag {
            0 => Ok(Group::U1),
            1 => Ok(Group::SU2),
            _ => Err(Error::FieldFormat(format!("unknown group tag {tag}"))),
        }
    }

    pub fn is_abelian(self) -> bool {
        self == Group::U1
    }
}

impl FromStr for Group {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "u1" => Ok(Group::U1),
            "su2" => Ok(Group::SU2),
            _ => Err(Error::InvalidInput(format!("unknown group {s:?} (expected u1 or su2)"))),
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Group::U1 => "u1",
            Group::SU2 => "su2",
        })
    }
}

/// `n` sites per axis, lattice spacing and structure group.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub n: usize,
    pub spacing: f64,
    pub group: Group,
}

impl LatticeSpec {
    pub fn new(n: usize, spacing: f64, group: Group) -> Result<Self> {
        if !(2..=4).contains(&n) {
            return Err(Error::InvalidLattice(format!("n = {n} is not in 2..=4")));
        }
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::InvalidLattice(format!("spacing {spacing} must be positive")));
        }
        Ok(LatticeSpec { n, spacing, group })
    }

    pub fn sites(&self) -> usize {
        self.n.pow(8)
    }

    pub fn dim_g(&self) -> usize {
        self.group.dim()
    }

    /// Entries of a gauge field: sites × 8 × dim g.
    pub fn field_len(&self) -> usize {
        self.sites() * 8 * self.dim_g()
    }

    /// Entries of a curvature field: sites × 28 × dim g.
    pub fn curvature_len(&self) -> usize {
        self.sites() * 28 * self.dim_g()
    }

    /// Site index of lattice coordinates, axis 0 fastest.
    pub fn site_index(&self, coords: &[usize; 8]) -> usize {
        coords.iter().rev().fold(0, |acc, &x| acc * self.n + x % self.n)
    }

    pub fn site_coords(&self, mut site: usize) -> [usize; 8] {
        let mut out = [0; 8];
        for c in &mut out {
            *c = site % self.n;
            site /= self.n;
        }
        out
    }
}

/// Algebra-valued 1-form, indexed `(site · 8 + μ) · dim g + c`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeField {
    spec: LatticeSpec,
    data: Vec<f64>,
}

impl GaugeField {
    pub fn zeros(spec: LatticeSpec) -> Self {
        GaugeField {
            spec,
            data: vec![0.0; spec.field_len()],
        }
    }

    pub fn from_vec(spec: LatticeSpec, data: Vec<f64>) -> Result<Self> {
        if data.len() != spec.field_len() {
            return Err(Error::DimensionMismatch {
                expected: spec.field_len(),
                got: data.len(),
            });
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("gauge field has non-finite entries".into()));
        }
        Ok(GaugeField { spec, data })
    }

    /// Entries uniform in `[−amp, amp]` from a seeded ChaCha8 stream.
    pub fn random(spec: LatticeSpec, seed: u64, amp: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..spec.field_len())
            .map(|_| amp * (2.0 * rng.random::<f64>() - 1.0))
            .collect();
        GaugeField { spec, data }
    }

    /// Field whose value at each site is produced by `f(coords, μ, c)`.
    pub fn from_fn(spec: LatticeSpec, f: impl Fn(&[usize; 8], usize, usize) -> f64) -> Self {
        let dg = spec.dim_g();
        let mut data = vec![0.0; spec.field_len()];
        for site in 0..spec.sites() {
            let x = spec.site_coords(site);
            for mu in 0..8 {
                for c in 0..dg {
                    data[(site * 8 + mu) * dg + c] = f(&x, mu, c);
                }
            }
        }
        GaugeField { spec, data }
    }

    pub fn spec(&self) -> LatticeSpec {
        self.spec
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, site: usize, mu: usize, c: usize) -> f64 {
        self.data[(site * 8 + mu) * self.spec.dim_g() + c]
    }

    pub fn norm(&self) -> f64 {
        norm(&self.data)
    }

    pub fn distance(&self, other: &GaugeField) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt()
    }
}

/// Algebra-valued 2-form, indexed `(site · 28 + I) · dim g + c`.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureField {
    spec: LatticeSpec,
    data: Vec<f64>,
}

impl CurvatureField {
    pub fn spec(&self) -> LatticeSpec {
        self.spec
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, site: usize, pair: usize, c: usize) -> f64 {
        self.data[(site * 28 + pair) * self.spec.dim_g() + c]
    }

    /// `F_{μν}` for any ordered pair, using antisymmetry.
    pub fn component(&self, site: usize, mu: usize, nu: usize, c: usize) -> f64 {
        use crate::forms::{rank_of, MultiIndex};
        if mu == nu {
            return 0.0;
        }
        let (lo, hi, sign) = if mu < nu { (mu, nu, 1.0) } else { (nu, mu, -1.0) };
        let idx = MultiIndex::new(&[lo + 1, hi + 1]).expect("distinct axes");
        sign * self.get(site, rank_of(idx.mask()), c)
    }

    pub fn norm(&self) -> f64 {
        norm(&self.data)
    }
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    compensated_sum(v.iter().map(|x| x * x)).sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    compensated_sum(a.iter().zip(b).map(|(x, y)| x * y))
}

/// Neumaier summation in iteration order.
pub(crate) fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let t = sum + v;
        if f64::abs(sum) >= f64::abs(v) {
            carry += (sum - t) + v;
        } else {
            carry += (v - t) + sum;
        }
        sum = t;
    }
    sum + carry
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(LatticeSpec::new(1, 1.0, Group::U1).is_err());
        assert!(LatticeSpec::new(5, 1.0, Group::U1).is_err());
        assert!(LatticeSpec::new(2, 0.0, Group::U1).is_err());
        let s = LatticeSpec::new(4, 1.0, Group::SU2).unwrap();
        assert_eq!(s.sites(), MAX_SITES);
        assert_eq!(s.field_len(), 65536 * 24);
    }

    #[test]
    fn site_coordinates_round_trip() {
        let s = LatticeSpec::new(3, 1.0, Group::U1).unwrap();
        for site in [0, 1, 2, 3, 100, 6560] {
            assert_eq!(s.site_index(&s.site_coords(site)), site);
        }
    }

    #[test]
    fn random_fields_are_seeded() {
        let s = LatticeSpec::new(2, 1.0, Group::SU2).unwrap();
        let a = GaugeField::random(s, 7, 0.1);
        assert_eq!(a, GaugeField::random(s, 7, 0.1));
        assert_ne!(a, GaugeField::random(s, 8, 0.1));
        assert!(a.data().iter().all(|x| x.abs() <= 0.1));
    }

    #[test]
    fn compensated_sum_recovers_cancellation() {
        let v = [1e16, 1.0, -1e16, 1.0];
        assert_eq!(compensated_sum(v.iter().copied()), 2.0);
        assert_eq!(compensated_sum(std::iter::empty()), 0.0);
    }

    #[test]
    fn from_vec_checks_length() {
        let s = LatticeSpec::new(2, 1.0, Group::U1).unwrap();
        assert!(matches!(
            GaugeField::from_vec(s, vec![0.0; 3]),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
