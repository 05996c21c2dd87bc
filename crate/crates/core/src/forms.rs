//! Multilinear algebra on the exterior algebra of (ℝ⁸)*.
//!
//! A [`KForm`] stores one coefficient per basis element `dx^{i₁}∧…∧dx^{i_k}`
//! with `i₁ < … < i_k`, ordered lexicographically on the index tuple. Axes are
//! numbered `1..=8` in every public interface; bitmasks (bit `i-1` for axis
//! `i`) are used internally. The metric is the standard one on ℝ⁸ and the
//! orientation is `vol₈ = dx¹∧…∧dx⁸`.

use std::fmt;
use std::sync::OnceLock;

use nalgebra::{DMatrix, Matrix4, SMatrix};

pub type Matrix8<T> = SMatrix<T, 8, 8>;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub const DIM: usize = 8;

/// Binomial coefficient C(8, k).
pub const fn basis_len(grade: usize) -> usize {
    const TABLE: [usize; 9] = [1, 8, 28, 56, 70, 56, 28, 8, 1];
    TABLE[grade]
}

struct BasisTables {
    masks: [Vec<u8>; 9],
    rank: [u16; 256],
}

fn tables() -> &'static BasisTables {
    static TABLES: OnceLock<BasisTables> = OnceLock::new();
    TABLES.get_or_init(|| {
        let mut masks: [Vec<u8>; 9] = Default::default();
        let mut rank = [0u16; 256];
        for (grade, list) in masks.iter_mut().enumerate() {
            let mut combo: Vec<u8> = Vec::with_capacity(grade);
            push_combinations(0, grade, &mut combo, list);
            for (r, &m) in list.iter().enumerate() {
                rank[m as usize] = r as u16;
            }
        }
        BasisTables { masks, rank }
    })
}

// Emits subsets of {start..7} of the requested size in lexicographic order.
fn push_combinations(start: u8, remaining: usize, combo: &mut Vec<u8>, out: &mut Vec<u8>) {
    if remaining == 0 {
        out.push(combo.iter().fold(0u8, |m, &a| m | (1 << a)));
        return;
    }
    for axis in start..=(DIM as u8 - remaining as u8) {
        combo.push(axis);
        push_combinations(axis + 1, remaining - 1, combo, out);
        combo.pop();
    }
}

/// Bitmask of the `rank`-th basis element of the given grade.
#[inline]
pub fn mask_of(grade: usize, rank: usize) -> u8 {
    tables().masks[grade][rank]
}

/// Lexicographic rank of a bitmask within its grade.
#[inline]
pub fn rank_of(mask: u8) -> usize {
    tables().rank[mask as usize] as usize
}

/// Sign of `e_a ∧ e_b` relative to `e_{a∪b}` (zero when the masks overlap).
#[inline]
pub fn merge_sign(a: u8, b: u8) -> f64 {
    if a & b != 0 {
        return 0.0;
    }
    let mut inversions = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        inversions += (a >> j).count_ones();
        rest &= rest - 1;
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// A strictly increasing list of axes drawn from `1..=8`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(axes: &[usize]) -> Result<Self> {
        if axes.len() > DIM {
            return Err(Error::InvalidIndex(axes.to_vec(), "more than 8 axes"));
        }
        if axes.iter().any(|&a| !(1..=DIM).contains(&a)) {
            return Err(Error::InvalidIndex(axes.to_vec(), "axes must lie in 1..=8"));
        }
        if axes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidIndex(axes.to_vec(), "axes must be strictly increasing"));
        }
        Ok(MultiIndex(axes.to_vec()))
    }

    pub fn from_mask(mask: u8) -> Self {
        MultiIndex((0..DIM).filter(|&a| mask & (1 << a) != 0).map(|a| a + 1).collect())
    }

    pub fn from_rank(grade: usize, rank: usize) -> Self {
        Self::from_mask(mask_of(grade, rank))
    }

    pub fn axes(&self) -> &[usize] {
        &self.0
    }

    pub fn grade(&self) -> usize {
        self.0.len()
    }

    pub fn mask(&self) -> u8 {
        self.0.iter().fold(0u8, |m, &a| m | (1 << (a - 1)))
    }

    pub fn rank(&self) -> usize {
        rank_of(self.mask())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "τ^")?;
        for a in &self.0 {
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

/// A degree-`k` alternating form on ℝ⁸.
#[derive(Clone, Debug, PartialEq)]
pub struct KForm {
    grade: usize,
    coeffs: Vec<f64>,
}

impl KForm {
    pub fn zero(grade: usize) -> Result<Self> {
        if grade > DIM {
            return Err(Error::InvalidGrade(grade));
        }
        Ok(KForm {
            grade,
            coeffs: vec![0.0; basis_len(grade)],
        })
    }

    pub fn from_coeffs(grade: usize, coeffs: Vec<f64>) -> Result<Self> {
        if grade > DIM {
            return Err(Error::InvalidGrade(grade));
        }
        if coeffs.len() != basis_len(grade) {
            return Err(Error::CoefficientLength {
                grade,
                expected: basis_len(grade),
                got: coeffs.len(),
            });
        }
        Ok(KForm { grade, coeffs })
    }

    /// The constant function `c` as a 0-form.
    pub fn scalar(c: f64) -> Self {
        KForm {
            grade: 0,
            coeffs: vec![c],
        }
    }

    /// Basis element `τ^{i₁…i_k}`.
    pub fn basis(axes: &[usize]) -> Result<Self> {
        let idx = MultiIndex::new(axes)?;
        let mut form = KForm::zero(idx.grade())?;
        form.coeffs[idx.rank()] = 1.0;
        Ok(form)
    }

    /// The 1-form `dxⁱ`, `i ∈ 1..=8`.
    pub fn dx(axis: usize) -> Result<Self> {
        Self::basis(&[axis])
    }

    /// Build from `(axes, coefficient)` pairs; repeated indices accumulate.
    pub fn from_terms(grade: usize, terms: &[(&[usize], f64)]) -> Result<Self> {
        let mut form = KForm::zero(grade)?;
        for (axes, c) in terms {
            let idx = MultiIndex::new(axes)?;
            if idx.grade() != grade {
                return Err(Error::GradeMismatch {
                    expected: grade,
                    got: idx.grade(),
                });
            }
            form.coeffs[idx.rank()] += c;
        }
        Ok(form)
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Coefficient of the basis element with the given axes (0 for other grades).
    pub fn coefficient(&self, axes: &[usize]) -> f64 {
        match MultiIndex::new(axes) {
            Ok(idx) if idx.grade() == self.grade => self.coeffs[idx.rank()],
            _ => 0.0,
        }
    }

    /// Nonzero terms in basis order.
    pub fn terms(&self) -> impl Iterator<Item = (MultiIndex, f64)> + '_ {
        let grade = self.grade;
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(move |(r, &c)| (MultiIndex::from_rank(grade, r), c))
    }

    pub fn add(&self, other: &KForm) -> Result<KForm> {
        self.check_same_grade(other)?;
        Ok(KForm {
            grade: self.grade,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &KForm) -> Result<KForm> {
        self.check_same_grade(other)?;
        Ok(KForm {
            grade: self.grade,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn scaled(&self, s: f64) -> KForm {
        KForm {
            grade: self.grade,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// Largest coefficientwise difference; infinite when grades differ.
    pub fn max_abs_diff(&self, other: &KForm) -> f64 {
        if self.grade != other.grade {
            return f64::INFINITY;
        }
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    fn check_same_grade(&self, other: &KForm) -> Result<()> {
        if self.grade != other.grade {
            return Err(Error::GradeMismatch {
                expected: self.grade,
                got: other.grade,
            });
        }
        Ok(())
    }
}

/// `vol₈ = τ^{12345678}`.
pub fn volume_form() -> KForm {
    KForm {
        grade: 8,
        coeffs: vec![1.0],
    }
}

/// Exterior product.
pub fn wedge(a: &KForm, b: &KForm) -> Result<KForm> {
    let grade = a.grade + b.grade;
    if grade > DIM {
        return Err(Error::GradeOverflow(a.grade, b.grade));
    }
    let mut out = KForm::zero(grade)?;
    for (ra, &ca) in a.coeffs.iter().enumerate() {
        if ca == 0.0 {
            continue;
        }
        let ma = mask_of(a.grade, ra);
        for (rb, &cb) in b.coeffs.iter().enumerate() {
            if cb == 0.0 {
                continue;
            }
            let mb = mask_of(b.grade, rb);
            let s = merge_sign(ma, mb);
            if s != 0.0 {
                out.coeffs[rank_of(ma | mb)] += s * ca * cb;
            }
        }
    }
    Ok(out)
}

/// Flat Hodge star, `a ∧ *b = ⟨a, b⟩ vol₈`.
pub fn hodge_star(a: &KForm) -> KForm {
    let grade = DIM - a.grade;
    let mut out = KForm::zero(grade).expect("complementary grade is valid");
    for (r, &c) in a.coeffs.iter().enumerate() {
        let m = mask_of(a.grade, r);
        let comp = !m;
        out.coeffs[rank_of(comp)] = merge_sign(m, comp) * c;
    }
    out
}

/// Metric pairing; the τ basis is orthonormal.
pub fn inner(a: &KForm, b: &KForm) -> Result<f64> {
    a.check_same_grade(b)?;
    Ok(a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x * y).sum())
}

/// The Cayley 4-form Ω₀.
pub fn cayley_form() -> KForm {
    KForm::from_terms(4, CAYLEY_TERMS).expect("static Cayley terms are valid")
}

pub(crate) const CAYLEY_TERMS: &[(&[usize], f64)] = &[
    (&[1, 2, 5, 6], 1.0),
    (&[1, 2, 7, 8], 1.0),
    (&[3, 4, 5, 6], 1.0),
    (&[3, 4, 7, 8], 1.0),
    (&[1, 3, 5, 7], 1.0),
    (&[1, 3, 6, 8], -1.0),
    (&[2, 4, 5, 7], -1.0),
    (&[2, 4, 6, 8], 1.0),
    (&[1, 4, 5, 8], -1.0),
    (&[1, 4, 6, 7], -1.0),
    (&[2, 3, 5, 8], -1.0),
    (&[2, 3, 6, 7], -1.0),
    (&[1, 2, 3, 4], 1.0),
    (&[5, 6, 7, 8], 1.0),
];

/// A linear map of ℝ⁸ acting on coordinates, `x ↦ M x`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap8(pub Matrix8<f64>);

impl LinearMap8 {
    pub fn identity() -> Self {
        LinearMap8(Matrix8::identity())
    }

    pub fn diag(entries: [f64; 8]) -> Self {
        LinearMap8(Matrix8::from_diagonal(&entries.into()))
    }

    pub fn from_row_slice(rows: &[f64]) -> Result<Self> {
        if rows.len() != DIM * DIM {
            return Err(Error::InvalidInput(format!("expected 64 entries, got {}", rows.len())));
        }
        Ok(LinearMap8(Matrix8::from_row_slice(rows)))
    }

    pub fn matrix(&self) -> &Matrix8<f64> {
        &self.0
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &LinearMap8) -> LinearMap8 {
        LinearMap8(self.0 * other.0)
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    pub fn is_orthogonal(&self, tol: f64) -> bool {
        (self.0.transpose() * self.0 - Matrix8::identity()).amax() <= tol
    }

    pub fn rows(&self) -> [[f64; 8]; 8] {
        let mut out = [[0.0; 8]; 8];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = self.0[(i, j)];
            }
        }
        out
    }
}

fn minor(m: &Matrix8<f64>, rows: u8, cols: u8) -> f64 {
    let ri: Vec<usize> = (0..DIM).filter(|&a| rows & (1 << a) != 0).collect();
    let ci: Vec<usize> = (0..DIM).filter(|&a| cols & (1 << a) != 0).collect();
    match ri.len() {
        0 => 1.0,
        1 => m[(ri[0], ci[0])],
        2 => m[(ri[0], ci[0])] * m[(ri[1], ci[1])] - m[(ri[0], ci[1])] * m[(ri[1], ci[0])],
        4 => Matrix4::from_fn(|i, j| m[(ri[i], ci[j])]).determinant(),
        k => DMatrix::from_fn(k, k, |i, j| m[(ri[i], ci[j])]).determinant(),
    }
}

/// Pullback `m* a`, with `m*(dxⁱ) = Σⱼ mᵢⱼ dxʲ`.
///
/// Contravariant: `pullback(m₁∘m₂, a) = pullback(m₂, pullback(m₁, a))`.
pub fn pullback(m: &LinearMap8, a: &KForm) -> Result<KForm> {
    let det = m.determinant();
    if det.abs() < 1e-12 {
        return Err(Error::SingularMap(det));
    }
    let k = a.grade;
    let mut out = KForm::zero(k)?;
    for (ri, &c) in a.coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        let rows = mask_of(k, ri);
        for (rj, o) in out.coeffs.iter_mut().enumerate() {
            *o += c * minor(&m.0, rows, mask_of(k, rj));
        }
    }
    Ok(out)
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermJson {
    idx: Vec<usize>,
    c: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct KFormJson {
    grade: usize,
    terms: Vec<TermJson>,
}

impl TryFrom<KFormJson> for KForm {
    type Error = Error;

    fn try_from(j: KFormJson) -> Result<Self> {
        let mut form = KForm::zero(j.grade)?;
        let mut seen = std::collections::HashSet::new();
        for t in j.terms {
            let idx = MultiIndex::new(&t.idx)?;
            if idx.grade() != j.grade {
                return Err(Error::InvalidIndex(t.idx, "term length differs from grade"));
            }
            if !seen.insert(idx.mask()) {
                return Err(Error::InvalidIndex(t.idx, "duplicate term"));
            }
            if !t.c.is_finite() {
                return Err(Error::InvalidInput(format!("non-finite coefficient for {idx}")));
            }
            form.coeffs[idx.rank()] = t.c;
        }
        Ok(form)
    }
}

impl Serialize for KForm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        KFormJson {
            grade: self.grade,
            terms: self
                .terms()
                .map(|(idx, c)| TermJson {
                    idx: idx.axes().to_vec(),
                    c,
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for KForm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = KFormJson::deserialize(d)?;
        KForm::try_from(j).map_err(serde::de::Error::custom)
    }
}
