//! Library results against independent brute-force computations.

use nalgebra::{DMatrix, DVector};
use num_bigint::BigInt;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spin7::forms::{basis_len, cayley_form, hodge_star, inner, pullback, wedge, KForm, LinearMap8, MultiIndex};
use spin7::gluing::{radial_norm, RadialProfile, WeightedNormSpec};
use spin7::index::{h0_exceptional, h1_delta, index_su2, kx_dim};
use spin7::lattice::{energy, fourier_oracle_u1, GaugeField, Group, LatticeSpec};

fn parity(p: &[usize]) -> f64 {
    let mut inv = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] == p[j] {
                return 0.0;
            }
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

fn tuples(len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..8).map(move |i| {
                    let mut t = t.clone();
                    t.push(i);
                    t
                })
            })
            .collect();
    }
    out
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

/// Fully antisymmetric component `A_{i₁…i_p}` for any tuple of 0-based axes.
fn component(a: &KForm, t: &[usize]) -> f64 {
    let s = parity(t);
    if s == 0.0 {
        return 0.0;
    }
    let mut sorted: Vec<usize> = t.iter().map(|i| i + 1).collect();
    sorted.sort();
    s * a.coefficient(&sorted)
}

fn increasing(grade: usize) -> Vec<Vec<usize>> {
    (0..basis_len(grade))
        .map(|r| MultiIndex::from_rank(grade, r).axes().iter().map(|a| a - 1).collect())
        .collect()
}

fn from_components(grade: usize, f: impl Fn(&[usize]) -> f64) -> KForm {
    let c = increasing(grade).iter().map(|k| f(k)).collect();
    KForm::from_coeffs(grade, c).unwrap()
}

fn random_form(grade: usize, rng: &mut ChaCha8Rng) -> KForm {
    let c = (0..basis_len(grade)).map(|_| rng.random_range(-1.0..1.0)).collect();
    KForm::from_coeffs(grade, c).unwrap()
}

fn factorial(n: usize) -> f64 {
    (1..=n).product::<usize>() as f64
}

fn wedge_oracle(a: &KForm, b: &KForm) -> KForm {
    let (p, q) = (a.grade(), b.grade());
    let perms = permutations(p + q);
    from_components(p + q, |k| {
        let mut sum = 0.0;
        for s in &perms {
            let t: Vec<usize> = s.iter().map(|&i| k[i]).collect();
            sum += parity(s) * component(a, &t[..p]) * component(b, &t[p..]);
        }
        sum / (factorial(p) * factorial(q))
    })
}

fn star_oracle(a: &KForm) -> KForm {
    let p = a.grade();
    let all = tuples(p);
    from_components(8 - p, |j| {
        let mut sum = 0.0;
        for i in &all {
            let mut seq = i.clone();
            seq.extend_from_slice(j);
            sum += component(a, i) * parity(&seq);
        }
        sum / factorial(p)
    })
}

fn inner_oracle(a: &KForm, b: &KForm) -> f64 {
    tuples(a.grade())
        .iter()
        .map(|t| component(a, t) * component(b, t))
        .sum::<f64>()
        / factorial(a.grade())
}

fn pullback_oracle(m: &LinearMap8, a: &KForm) -> KForm {
    let p = a.grade();
    let all = tuples(p);
    from_components(p, |j| {
        all.iter()
            .map(|i| {
                let w: f64 = i.iter().zip(j).map(|(&ii, &jj)| m.matrix()[(ii, jj)]).product();
                component(a, i) * w
            })
            .sum()
    })
}

#[test]
fn wedge_matches_permutation_expansion() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (p, q) in [(0, 3), (1, 1), (1, 2), (2, 2), (1, 3), (2, 3), (3, 3), (2, 4), (4, 4), (1, 6)] {
        let a = random_form(p, &mut rng);
        let b = random_form(q, &mut rng);
        let lib = wedge(&a, &b).unwrap();
        assert!(lib.max_abs_diff(&wedge_oracle(&a, &b)) < 1e-12, "grades {p}, {q}");
    }
}

#[test]
fn hodge_star_matches_levi_civita() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for p in 0..=4 {
        let a = random_form(p, &mut rng);
        assert!(hodge_star(&a).max_abs_diff(&star_oracle(&a)) < 1e-12, "grade {p}");
    }
}

#[test]
fn inner_matches_tensor_contraction() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for p in 0..=4 {
        let a = random_form(p, &mut rng);
        let b = random_form(p, &mut rng);
        assert!((inner(&a, &b).unwrap() - inner_oracle(&a, &b)).abs() < 1e-12);
    }
}

#[test]
fn pullback_matches_tensor_contraction() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let m = LinearMap8::from_row_slice(&(0..64).map(|_| rng.random_range(-1.0..1.0)).collect::<Vec<_>>()).unwrap();
    for p in 1..=3 {
        let a = random_form(p, &mut rng);
        assert!(pullback(&m, &a).unwrap().max_abs_diff(&pullback_oracle(&m, &a)) < 1e-12);
    }
}

#[test]
fn cayley_form_identities_by_expansion() {
    let omega = cayley_form();
    assert!(star_oracle(&omega).max_abs_diff(&omega) < 1e-12);
    let sq = wedge_oracle(&omega, &omega);
    assert!((sq.coefficient(&[1, 2, 3, 4, 5, 6, 7, 8]) - 14.0).abs() < 1e-12);
}

#[test]
fn lambda_spectrum_by_dense_eigen() {
    let omega = cayley_form();
    let cols: Vec<f64> = increasing(2)
        .iter()
        .flat_map(|k| {
            let e = from_components(2, |j| if j == k.as_slice() { 1.0 } else { 0.0 });
            star_oracle(&wedge_oracle(&omega, &e)).coeffs().to_vec()
        })
        .collect();
    let t = DMatrix::from_column_slice(28, 28, &cols);
    let mut ev: Vec<f64> = t.symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    assert!(ev[..21].iter().all(|v| (v + 1.0).abs() < 1e-9));
    assert!(ev[21..].iter().all(|v| (v - 3.0).abs() < 1e-9));
}

fn binomial(n: i64, k: i64) -> BigInt {
    let mut r = BigInt::from(1);
    for i in 0..k {
        r = r * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    r
}

#[test]
fn h0_counts_monomials() {
    for m in -4..=0i64 {
        let d = -4 * m;
        // The fourth exponent is fixed by the other three.
        let mut count = 0i64;
        for a in 0..=d {
            for b in 0..=d - a {
                count += d - a - b + 1;
            }
        }
        assert_eq!(h0_exceptional(m), BigInt::from(count));
        assert_eq!(h0_exceptional(m), binomial(d + 3, 3));
    }
    assert_eq!(h0_exceptional(1), BigInt::from(0));
}

#[test]
fn h1_is_the_accumulated_h0() {
    let mut acc = BigInt::from(0);
    for m in (-12..=0i64).rev() {
        assert_eq!(h1_delta(m), acc, "m = {m}");
        acc += h0_exceptional(m);
    }
}

#[test]
fn kx_dim_by_rational_evaluation() {
    for k in -6..=6i64 {
        let num = 4 * k * k * (32 * k * k - 5);
        assert_eq!(num % 3, 0);
        assert_eq!(kx_dim(k), BigInt::from(num / 3));
    }
}

#[test]
fn index_su2_examples() {
    assert_eq!(index_su2(0, 0).unwrap(), BigInt::from(-3));
    assert_eq!(index_su2(-8, 1).unwrap(), BigInt::from(-3));
    assert_eq!(index_su2(6, 0).unwrap(), BigInt::from(-4));
    assert!(index_su2(1, 0).is_err());
}

#[test]
fn power_profile_norm_in_closed_form() {
    for (s, p, delta, a, b) in [(-1.0, 8u32, -0.5, 1e-3, 1.0), (2.0, 4, -2.0, 0.1, 0.9), (0.5, 2, 0.3, 1e-2, 3.0)] {
        let prof = RadialProfile::from_fn(a, b, move |r: f64| r.powf(s)).unwrap();
        let e = p as f64 * (s - delta);
        let exact = ((b.powf(e) - a.powf(e)) / e).powf(1.0 / p as f64);
        let got = radial_norm(&prof, WeightedNormSpec::new(p, delta).unwrap()).unwrap();
        assert!((got - exact).abs() <= 1e-9 * exact, "{got} vs {exact}");
    }
    let flat = RadialProfile::constant(0.5, 1.5, 2.0).unwrap();
    let got = radial_norm(&flat, WeightedNormSpec::plain(4).unwrap()).unwrap();
    let exact = (16.0 * (1.5f64.powi(8) - 0.5f64.powi(8)) / 8.0).powf(0.25);
    assert!((got - exact).abs() < 1e-10 * exact);
}

/// Real plane waves `Re(v e^{2πi k·x/n})` are solutions exactly when `v` lies
/// in the mode null space; energies are checked through the lattice operator.
#[test]
fn fourier_oracle_matches_plane_waves() {
    let spec = LatticeSpec::new(2, 1.0, Group::U1).unwrap();
    let oracle = fourier_oracle_u1(spec).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for site in [1usize, 3, 17, 100, 255] {
        let mode = &oracle.modes[site];
        let k = mode.k;
        let wave = |v: &DVector<Complex64>| {
            GaugeField::from_fn(spec, |x, mu, _| {
                let phase: f64 = x.iter().zip(&k).map(|(&xi, &ki)| (xi * ki) as f64).sum::<f64>() * std::f64::consts::PI;
                (v[mu] * Complex64::from_polar(1.0, phase)).re
            })
        };
        for b in &mode.basis {
            assert!(energy(spec, &wave(b)).unwrap() < 1e-24);
        }
        let v = DVector::from_fn(8, |_, _| Complex64::new(rng.random_range(-1.0..1.0), 0.0));
        let mut r = v.clone();
        for b in &mode.basis {
            r -= b * b.dotc(&v);
        }
        assert!(energy(spec, &wave(&r)).unwrap() > 1e-6);
    }
    assert_eq!(oracle.modes[0].nullity, 8);
}
