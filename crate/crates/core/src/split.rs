//! The Λ² = Λ²₂₁ ⊕ Λ²₇ splitting induced by a Spin(7) 4-form, and the
//! order-8 group Γ₈ = ⟨α, β⟩.
//!
//! The splitting is computed twice: once spectrally from the self-adjoint
//! operator `a ↦ *(Ω ∧ a)` on 2-forms, once from the closed formula
//! `π₇(a) = ¼(*(Ω ∧ a) + a)`. Tests hold the two against each other.

use std::fmt;
use std::sync::OnceLock;

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{cayley_form, hodge_star, pullback, wedge, KForm, LinearMap8, Matrix8};

pub type Mat28 = SMatrix<f64, 28, 28>;
pub type Vec28 = SVector<f64, 28>;

/// Eigenvalues closer than this are treated as one cluster.
pub const CLUSTER_TOL: f64 = 1e-9;

/// A linear operator on 2-form coefficient vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoFormOperator {
    pub matrix: Mat28,
}

impl TwoFormOperator {
    pub fn apply(&self, a: &KForm) -> Result<KForm> {
        check_grade(a, 2)?;
        let v = self.matrix * Vec28::from_column_slice(a.coeffs());
        KForm::from_coeffs(2, v.as_slice().to_vec())
    }

    pub fn max_asymmetry(&self) -> f64 {
        (self.matrix - self.matrix.transpose()).amax()
    }
}

/// Orthogonal projectors onto the 7- and 21-dimensional summands.
#[derive(Clone, Debug)]
pub struct ProjectorPair {
    pub p7: Mat28,
    pub p21: Mat28,
    /// Orthonormal basis of the image of `p7`, one row per vector.
    pub basis7: SMatrix<f64, 7, 28>,
    /// Cluster centres, (value on the `p7` summand, value on the `p21` summand).
    pub eigenvalues: (f64, f64),
    /// Multiplicities of the two clusters, in the same order.
    pub multiplicities: (usize, usize),
}

impl ProjectorPair {
    pub fn project7(&self, a: &KForm) -> Result<KForm> {
        apply(&self.p7, a)
    }

    pub fn project21(&self, a: &KForm) -> Result<KForm> {
        apply(&self.p21, a)
    }
}

fn apply(m: &Mat28, a: &KForm) -> Result<KForm> {
    check_grade(a, 2)?;
    let v = m * Vec28::from_column_slice(a.coeffs());
    KForm::from_coeffs(2, v.as_slice().to_vec())
}

fn check_grade(a: &KForm, grade: usize) -> Result<()> {
    if a.grade() != grade {
        return Err(Error::GradeMismatch {
            expected: grade,
            got: a.grade(),
        });
    }
    Ok(())
}

/// Matrix of `a ↦ *(Ω ∧ a)` on 2-forms.
pub fn lambda_operator(omega4: &KForm) -> Result<TwoFormOperator> {
    check_grade(omega4, 4)?;
    let mut matrix = Mat28::zeros();
    for j in 0..28 {
        let mut e = KForm::zero(2)?;
        e.coeffs_mut()[j] = 1.0;
        let col = hodge_star(&wedge(omega4, &e)?);
        for (i, &c) in col.coeffs().iter().enumerate() {
            matrix[(i, j)] = c;
        }
    }
    Ok(TwoFormOperator { matrix })
}

/// Sorted eigenvalues of a symmetric operator grouped into clusters.
pub fn eigenvalue_clusters(op: &TwoFormOperator) -> Result<Vec<(f64, usize)>> {
    let asym = op.max_asymmetry();
    if asym > 1e-12 {
        return Err(Error::NotSymmetric(asym));
    }
    let mut values: Vec<f64> = op.matrix.symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(cluster(&values))
}

fn cluster(sorted: &[f64]) -> Vec<(f64, usize)> {
    let mut clusters: Vec<(f64, usize, f64)> = Vec::new();
    for &v in sorted {
        match clusters.last_mut() {
            Some((sum, count, last)) if (v - *last).abs() <= CLUSTER_TOL => {
                *sum += v;
                *count += 1;
                *last = v;
            }
            _ => clusters.push((v, 1, v)),
        }
    }
    clusters
        .into_iter()
        .map(|(sum, count, _)| (sum / count as f64, count))
        .collect()
}

/// Spectral projectors of an operator whose spectrum has exactly two clusters.
///
/// `p7` belongs to the upper cluster (eigenvalue 3 for the Cayley form).
pub fn eigensplit(op: &TwoFormOperator) -> Result<ProjectorPair> {
    let asym = op.max_asymmetry();
    if asym > 1e-12 {
        return Err(Error::NotSymmetric(asym));
    }
    let eig = op.matrix.symmetric_eigen();
    let mut order: Vec<usize> = (0..28).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let sorted: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let clusters = cluster(&sorted);
    if clusters.len() != 2 {
        return Err(Error::NotSpin7 {
            clusters: clusters.len(),
        });
    }
    let (low, n_low) = clusters[0];
    let (high, n_high) = clusters[1];

    let mut p7 = Mat28::zeros();
    for &i in &order[n_low..] {
        let v = eig.eigenvectors.column(i);
        p7 += v * v.transpose();
    }
    let p21 = Mat28::identity() - p7;

    let mut basis7 = SMatrix::<f64, 7, 28>::zeros();
    for (row, &i) in order[n_low..].iter().take(7).enumerate() {
        basis7.set_row(row, &eig.eigenvectors.column(i).transpose());
    }

    Ok(ProjectorPair {
        p7,
        p21,
        basis7,
        eigenvalues: (high, low),
        multiplicities: (n_high, n_low),
    })
}

/// Projectors for the Cayley form, computed once.
pub fn standard_projectors() -> &'static ProjectorPair {
    static PAIR: OnceLock<ProjectorPair> = OnceLock::new();
    PAIR.get_or_init(|| {
        let op = lambda_operator(&cayley_form()).expect("Cayley form has grade 4");
        eigensplit(&op).expect("Cayley form splits Λ² in two")
    })
}

/// `π₇(a) = ¼(*(Ω₀ ∧ a) + a)`.
pub fn project7_formula(alpha: &KForm) -> Result<KForm> {
    check_grade(alpha, 2)?;
    let star = hodge_star(&wedge(&cayley_form(), alpha)?);
    Ok(star.add(alpha)?.scaled(0.25))
}

/// Which complex structure on ℝ⁸ the generators are written in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Convention {
    /// `z = (x₁+ix₂, x₃+ix₄, x₅+ix₆, x₇+ix₈)`; α multiplies by i, β conjugates.
    I,
    /// `w = (−x₁+ix₃, x₂+ix₄, −x₅+ix₇, x₆+ix₈)`; α conjugates, β multiplies by i.
    II,
}

impl std::str::FromStr for Convention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "I" | "i" | "1" => Ok(Convention::I),
            "II" | "ii" | "2" => Ok(Convention::II),
            other => Err(Error::InvalidInput(format!("unknown convention `{other}`"))),
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Convention::I => f.write_str("I"),
            Convention::II => f.write_str("II"),
        }
    }
}

/// Real coordinate change `y = P x` with `y = (Re w₁, Im w₁, …, Re w₄, Im w₄)`.
pub fn complex_coordinates(convention: Convention) -> Matrix8<f64> {
    // (axis, sign) for Re wₖ and Im wₖ, axes 0-based.
    let layout: [(usize, f64); 8] = match convention {
        Convention::I => [
            (0, 1.0),
            (1, 1.0),
            (2, 1.0),
            (3, 1.0),
            (4, 1.0),
            (5, 1.0),
            (6, 1.0),
            (7, 1.0),
        ],
        Convention::II => [
            (0, -1.0),
            (2, 1.0),
            (1, 1.0),
            (3, 1.0),
            (4, -1.0),
            (6, 1.0),
            (5, 1.0),
            (7, 1.0),
        ],
    };
    let mut p = Matrix8::zeros();
    for (row, (axis, sign)) in layout.into_iter().enumerate() {
        p[(row, axis)] = sign;
    }
    p
}

// (w₁, …, w₄) ↦ (i w₁, …, i w₄) in (Re, Im) pairs.
fn multiply_by_i() -> Matrix8<f64> {
    let block = nalgebra::Matrix2::new(0.0, -1.0, 1.0, 0.0);
    let mut m = Matrix8::zeros();
    for k in 0..4 {
        m.fixed_view_mut::<2, 2>(2 * k, 2 * k).copy_from(&block);
    }
    m
}

// (w₁, w₂, w₃, w₄) ↦ (w̄₂, −w̄₁, w̄₄, −w̄₃) in (Re, Im) pairs.
fn conjugate_swap() -> Matrix8<f64> {
    let mut m = Matrix8::zeros();
    for pair in [0usize, 2] {
        let (a, b) = (2 * pair, 2 * pair + 2);
        // new w_a = conj(w_b)
        m[(a, b)] = 1.0;
        m[(a + 1, b + 1)] = -1.0;
        // new w_b = -conj(w_a)
        m[(b, a)] = -1.0;
        m[(b + 1, a + 1)] = 1.0;
    }
    m
}

/// A labelled element of Γ₈.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupElement {
    pub name: String,
    pub map: LinearMap8,
}

/// The generators (α, β) as real 8×8 matrices acting on `x`.
pub fn gamma8_generators(convention: Convention) -> (GroupElement, GroupElement) {
    let p = complex_coordinates(convention);
    let conj = |c: Matrix8<f64>| LinearMap8(p.transpose() * c * p);
    let (alpha, beta) = match convention {
        Convention::I => (multiply_by_i(), conjugate_swap()),
        Convention::II => (conjugate_swap(), multiply_by_i()),
    };
    (
        GroupElement {
            name: "a".into(),
            map: conj(alpha),
        },
        GroupElement {
            name: "b".into(),
            map: conj(beta),
        },
    )
}

/// All elements generated by α and β, breadth first from the identity.
pub fn gamma8_elements(convention: Convention) -> Vec<GroupElement> {
    let (alpha, beta) = gamma8_generators(convention);
    let mut elements = vec![GroupElement {
        name: "e".into(),
        map: LinearMap8::identity(),
    }];
    let mut frontier = 0;
    while frontier < elements.len() {
        let current = elements[frontier].clone();
        for g in [&alpha, &beta] {
            let product = current.map.compose(&g.map);
            if !elements.iter().any(|e| (e.map.0 - product.0).amax() < 1e-12) {
                let name = if current.name == "e" {
                    g.name.clone()
                } else {
                    format!("{}{}", current.name, g.name)
                };
                elements.push(GroupElement { name, map: product });
            }
        }
        frontier += 1;
    }
    elements
}

/// Orthogonal and preserves Ω₀, each to 1e−12.
pub fn verify_spin7_membership(g: &GroupElement) -> bool {
    if !g.map.is_orthogonal(1e-12) {
        return false;
    }
    match pullback(&g.map, &cayley_form()) {
        Ok(pulled) => pulled.max_abs_diff(&cayley_form()) <= 1e-12,
        Err(_) => false,
    }
}

/// Every pairwise product lands back in the set.
pub fn is_closed_under_products(elements: &[GroupElement]) -> bool {
    elements.iter().all(|a| {
        elements.iter().all(|b| {
            let ab = a.map.compose(&b.map);
            elements.iter().any(|c| (c.map.0 - ab.0).amax() < 1e-12)
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::inner;

    fn omega0() -> KForm {
        KForm::from_terms(2, &[(&[1, 2], 1.0), (&[3, 4], 1.0), (&[5, 6], 1.0), (&[7, 8], 1.0)]).unwrap()
    }

    #[test]
    fn lambda_operator_on_kahler_form() {
        let op = lambda_operator(&cayley_form()).unwrap();
        let image = op.apply(&omega0()).unwrap();
        assert!(image.max_abs_diff(&omega0().scaled(3.0)) < 1e-12);
    }

    #[test]
    fn lambda_operator_of_zero_is_zero() {
        let op = lambda_operator(&KForm::zero(4).unwrap()).unwrap();
        assert_eq!(op.matrix, Mat28::zeros());
        assert!(lambda_operator(&KForm::zero(3).unwrap()).is_err());
    }

    #[test]
    fn cayley_spectrum() {
        let op = lambda_operator(&cayley_form()).unwrap();
        let clusters = eigenvalue_clusters(&op).unwrap();
        assert_eq!(clusters.len(), 2);
        assert!((clusters[0].0 + 1.0).abs() < 1e-12 && clusters[0].1 == 21);
        assert!((clusters[1].0 - 3.0).abs() < 1e-12 && clusters[1].1 == 7);
    }

    #[test]
    fn eigensplit_rejects_single_cluster() {
        let op = TwoFormOperator {
            matrix: Mat28::identity() * 2.0,
        };
        assert_eq!(eigensplit(&op).unwrap_err(), Error::NotSpin7 { clusters: 1 });
    }

    #[test]
    fn projectors_on_kahler_form() {
        let pair = standard_projectors();
        assert!((pair.p7.trace() - 7.0).abs() < 1e-12);
        assert!((pair.p21.trace() - 21.0).abs() < 1e-12);
        assert!(pair.project7(&omega0()).unwrap().max_abs_diff(&omega0()) < 1e-12);
        assert!(pair.project21(&omega0()).unwrap().norm() < 1e-12);
        let bb = pair.basis7 * pair.basis7.transpose();
        assert!((bb - SMatrix::<f64, 7, 7>::identity()).amax() < 1e-12);
    }

    #[test]
    fn closed_formula_examples() {
        assert!(project7_formula(&omega0()).unwrap().max_abs_diff(&omega0()) < 1e-12);
        let traceless = KForm::from_terms(2, &[(&[1, 2], 1.0), (&[3, 4], -1.0)]).unwrap();
        assert!(project7_formula(&traceless).unwrap().norm() < 1e-12);
        assert_eq!(project7_formula(&KForm::zero(2).unwrap()).unwrap().norm(), 0.0);
        assert!(project7_formula(&KForm::dx(1).unwrap()).is_err());
    }

    #[test]
    fn group_examples() {
        for conv in [Convention::I, Convention::II] {
            let elements = gamma8_elements(conv);
            assert_eq!(elements.len(), 8);
            let (a, b) = gamma8_generators(conv);
            let ab = a.map.compose(&b.map);
            let ba = b.map.compose(&a.map);
            assert!((ab.0 - ba.0).amax() > 0.5);
            let a4 = a.map.compose(&a.map).compose(&a.map).compose(&a.map);
            assert!((a4.0 - Matrix8::identity()).amax() < 1e-12);
            assert!(elements.iter().all(verify_spin7_membership));
            assert!(is_closed_under_products(&elements));
        }
    }

    #[test]
    fn membership_negative() {
        let g = GroupElement {
            name: "stretch".into(),
            map: LinearMap8::diag([2.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]),
        };
        assert!(!verify_spin7_membership(&g));
        let refl = GroupElement {
            name: "reflect".into(),
            map: LinearMap8::diag([-1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]),
        };
        assert!(!verify_spin7_membership(&refl));
        assert!(verify_spin7_membership(&GroupElement {
            name: "e".into(),
            map: LinearMap8::identity()
        }));
    }

    #[test]
    fn kahler_form_norm() {
        assert_eq!(inner(&omega0(), &omega0()).unwrap(), 4.0);
    }
}
