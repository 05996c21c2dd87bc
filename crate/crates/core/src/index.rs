//! Exact index arithmetic: the index of the linearised instanton operator in
//! terms of characteristic numbers, the cohomology dimensions of the example
//! gluing, and virtual-dimension bookkeeping.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `⟨−4p₂(M) + 7p₁(M)², [M]⟩`.
pub const SIGNATURE_PAIRING: i64 = 5760;

/// dim C_Z for the trivial SU(2) bundle.
pub const DIM_CZ: i64 = 3;

/// Characteristic numbers of `E → M`, each evaluated on `[M]`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChernData {
    pub rank: u32,
    #[serde(default)]
    pub c1_4: i64,
    #[serde(default)]
    pub c1sq_c2: i64,
    #[serde(default)]
    pub c2_sq: i64,
    #[serde(default)]
    pub c1_c3: i64,
    #[serde(default)]
    pub c4: i64,
    #[serde(default)]
    pub p1_c1sq: i64,
    #[serde(default)]
    pub p1_c2: i64,
}

impl ChernData {
    pub fn trivial(rank: u32) -> Self {
        ChernData {
            rank,
            ..Default::default()
        }
    }
}

/// Twists `(k, ℓ)` of `L_D^k ⊕ L_D^{−k}` at the two pairs of singular points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExampleGluingData {
    pub k: i64,
    pub l: i64,
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn frac(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn to_integer(x: BigRational, what: &str) -> Result<BigInt> {
    if x.is_integer() {
        Ok(x.to_integer())
    } else {
        Err(Error::InconsistentCharacteristicNumbers(format!("{what} evaluates to {x}")))
    }
}

/// The bracketed pairing in the index formula, i.e. the index plus the leading term.
pub fn index_pairing(d: &ChernData) -> Result<BigRational> {
    if d.rank == 0 {
        return Err(Error::InvalidInput("rank must be at least 1".into()));
    }
    let r = q(d.rank as i64);
    let p1_part = -frac(1, 24) * (-q(d.p1_c1sq) + &r * (q(d.p1_c1sq) - q(2) * q(d.p1_c2)));
    let r_part = &r / q(12)
        * (q(d.c1_4) - q(4) * q(d.c1sq_c2) + q(2) * q(d.c2_sq) + q(4) * q(d.c1_c3) - q(4) * q(d.c4));
    let rest = -frac(1, 12) * q(d.c1_4) - q(d.c1_c3) + q(d.c2_sq);
    Ok(p1_part + r_part + rest)
}

// `⟨−4p₂ + 7p₁², [M]⟩ / 5760`, the factor carried by the leading term.
fn signature_weight() -> BigRational {
    frac(SIGNATURE_PAIRING, 5760)
}

/// Index of `L_A` for a U(r)-bundle.
pub fn index_u(d: &ChernData) -> Result<BigInt> {
    let r = q(d.rank as i64);
    let value = -(&r * &r) * signature_weight() - index_pairing(d)?;
    to_integer(value, "index")
}

/// Index for an SU(r)-bundle: the leading `r²` becomes `r² − 1`.
pub fn index_su(d: &ChernData) -> Result<BigInt> {
    let r = q(d.rank as i64);
    let value = -(&r * &r - BigRational::one()) * signature_weight() - index_pairing(d)?;
    to_integer(value, "index")
}

/// Index for SU(2): `−3 − ⟨p₁c₂ + 8c₂², [M]⟩/6`.
pub fn index_su2(p1_c2: i64, c2_sq: i64) -> Result<BigInt> {
    let num = BigInt::from(p1_c2) + BigInt::from(8) * BigInt::from(c2_sq);
    if !(&num % BigInt::from(6)).is_zero() {
        return Err(Error::InconsistentCharacteristicNumbers(format!(
            "p1_c2 + 8·c2_sq = {num} is not divisible by 6"
        )));
    }
    Ok(BigInt::from(-3) - num / BigInt::from(6))
}

/// `dim H⁰(D, O_D(−4m))` on the exceptional divisor `D ≅ ℂℙ³`.
pub fn h0_exceptional(m: i64) -> BigInt {
    if m > 0 {
        return BigInt::zero();
    }
    let m = BigInt::from(m);
    let f = |c: i64| BigInt::from(c) - BigInt::from(4) * &m;
    f(3) * f(2) * f(1) / BigInt::from(6)
}

fn third_m2_8m2_minus5(m: i64) -> BigInt {
    let m2 = BigInt::from(m) * BigInt::from(m);
    &m2 * (BigInt::from(8) * &m2 - BigInt::from(5)) / BigInt::from(3)
}

/// `dim H¹_δ(X, O_X(mD))`.
pub fn h1_delta(m: i64) -> BigInt {
    if m <= 0 {
        third_m2_8m2_minus5(m)
    } else {
        BigInt::zero()
    }
}

/// `dim H³_δ(X, O_X(mD))`.
pub fn h3_delta(m: i64) -> BigInt {
    if m > 0 {
        third_m2_8m2_minus5(m)
    } else {
        BigInt::zero()
    }
}

/// `(4k²/3)(32k² − 5)`, the contribution of one twisted piece.
///
/// Stated as a real dimension while it coincides with the complex dimension
/// `h1_delta(−2k)`; the value is taken as printed.
pub fn kx_dim(k: i64) -> BigInt {
    let k2 = BigInt::from(k) * BigInt::from(k);
    BigInt::from(4) * &k2 * (BigInt::from(32) * &k2 - BigInt::from(5)) / BigInt::from(3)
}

/// `dim K_Z − dim C_Z + Σ dim K_{X_j}`.
pub fn index_decomposition(dim_kz: i64, dim_cz: i64, dim_kx: &[BigInt]) -> Result<BigInt> {
    if dim_kz < 0 || dim_cz < 0 || dim_kx.iter().any(|d| d < &BigInt::zero()) {
        return Err(Error::InvalidInput("dimensions must be non-negative".into()));
    }
    Ok(BigInt::from(dim_kz) - BigInt::from(dim_cz) + dim_kx.iter().sum::<BigInt>())
}

/// Virtual dimension of the glued example.
pub fn example_vdim(d: ExampleGluingData) -> Result<BigInt> {
    let (dk, dl) = (kx_dim(d.k), kx_dim(d.l));
    for (twist, dim) in [(d.k, &dk), (d.l, &dl)] {
        if *dim != h1_delta(-2 * twist.abs()) {
            return Err(Error::InconsistentCharacteristicNumbers(format!(
                "K_X dimension {dim} differs from h1_delta({})",
                -2 * twist.abs()
            )));
        }
    }
    let total = BigInt::from(-DIM_CZ) + &dk + &dl;
    debug_assert_eq!(Ok(total.clone()), index_decomposition(0, DIM_CZ, &[dk, dl]));
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn index_u_trivial() {
        assert_eq!(index_u(&ChernData::trivial(1)).unwrap(), b(-1));
        assert_eq!(index_u(&ChernData::trivial(2)).unwrap(), b(-4));
        assert!(index_u(&ChernData::trivial(0)).is_err());
    }

    #[test]
    fn index_su2_examples() {
        assert_eq!(index_su2(0, 0).unwrap(), b(-3));
        assert_eq!(index_su2(-6, 0).unwrap(), b(-2));
        assert_eq!(index_su2(4, 1).unwrap(), b(-5));
        assert!(matches!(index_su2(1, 0), Err(Error::InconsistentCharacteristicNumbers(_))));
    }

    #[test]
    fn non_integral_index_is_rejected() {
        let d = ChernData {
            c4: 1,
            ..ChernData::trivial(1)
        };
        assert!(matches!(index_u(&d), Err(Error::InconsistentCharacteristicNumbers(_))));
    }

    // Each monomial coefficient is read off from a unit input.
    #[test]
    fn monomial_coefficients() {
        let r = 3i64;
        let unit = |f: fn(&mut ChernData)| {
            let mut d = ChernData::trivial(r as u32);
            f(&mut d);
            index_pairing(&d).unwrap()
        };
        assert_eq!(unit(|d| d.p1_c1sq = 1), frac(1 - r, 24));
        assert_eq!(unit(|d| d.p1_c2 = 1), frac(2 * r, 24));
        assert_eq!(unit(|d| d.c1_4 = 1), frac(r - 1, 12));
        assert_eq!(unit(|d| d.c1sq_c2 = 1), frac(-4 * r, 12));
        assert_eq!(unit(|d| d.c2_sq = 1), frac(2 * r + 12, 12));
        assert_eq!(unit(|d| d.c1_c3 = 1), frac(4 * r - 12, 12));
        assert_eq!(unit(|d| d.c4 = 1), frac(-4 * r, 12));
    }

    #[test]
    fn cohomology_dimensions() {
        assert_eq!(h0_exceptional(0), b(1));
        assert_eq!(h0_exceptional(-1), b(35));
        assert_eq!(h0_exceptional(1), b(0));
        assert_eq!(h1_delta(0), b(0));
        assert_eq!(h1_delta(-1), b(1));
        assert_eq!(h1_delta(-2), b(36));
        assert_eq!(h3_delta(1), b(1));
        assert_eq!(h3_delta(0), b(0));
        assert_eq!(h3_delta(2), b(36));
    }

    #[test]
    fn virtual_dimensions() {
        let v = |k, l| example_vdim(ExampleGluingData { k, l }).unwrap();
        assert_eq!(v(0, 0), b(-3));
        assert_eq!(v(1, 0), b(33));
        assert_eq!(v(1, 1), b(69));
        assert_eq!(index_decomposition(0, 3, &[]).unwrap(), b(-3));
        assert_eq!(index_decomposition(0, 0, &[b(5)]).unwrap(), b(5));
        assert_eq!(index_decomposition(0, 3, &[b(36), b(36)]).unwrap(), b(69));
    }
}
