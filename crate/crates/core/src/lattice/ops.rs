use nalgebra::SMatrix;

use super::{CurvatureField, GaugeField, LatticeSpec};
use crate::error::{Error, Result};
use crate::forms::MultiIndex;
use crate::split::standard_projectors;

/// `[a, b]^c = ε_{cde} a^d b^e`, accumulated into `out` with weight `w`.
#[inline]
pub fn su2_bracket(a: &[f64], b: &[f64], w: f64, out: &mut [f64]) {
    out[0] += w * (a[1] * b[2] - a[2] * b[1]);
    out[1] += w * (a[2] * b[0] - a[0] * b[2]);
    out[2] += w * (a[0] * b[1] - a[1] * b[0]);
}

/// Neighbour tables and constants shared by the lattice operators.
#[derive(Clone, Debug)]
pub(crate) struct Geometry {
    pub spec: LatticeSpec,
    pub sites: usize,
    pub dg: usize,
    pub inv_h: f64,
    pub fwd: Vec<usize>,
    pub bwd: Vec<usize>,
    pub pairs: [(usize, usize); 28],
    pub basis7: SMatrix<f64, 7, 28>,
}

impl Geometry {
    pub fn new(spec: LatticeSpec) -> Self {
        let sites = spec.sites();
        let mut fwd = vec![0; sites * 8];
        let mut bwd = vec![0; sites * 8];
        for site in 0..sites {
            let x = spec.site_coords(site);
            for mu in 0..8 {
                let mut y = x;
                y[mu] = (x[mu] + 1) % spec.n;
                fwd[site * 8 + mu] = spec.site_index(&y);
                y[mu] = (x[mu] + spec.n - 1) % spec.n;
                bwd[site * 8 + mu] = spec.site_index(&y);
            }
        }
        let mut pairs = [(0, 0); 28];
        for (r, p) in pairs.iter_mut().enumerate() {
            let idx = MultiIndex::from_rank(2, r);
            *p = (idx.axes()[0] - 1, idx.axes()[1] - 1);
        }
        Geometry {
            spec,
            sites,
            dg: spec.dim_g(),
            inv_h: 1.0 / spec.spacing,
            fwd,
            bwd,
            pairs,
            basis7: standard_projectors().basis7,
        }
    }

    pub fn check(&self, a: &[f64]) -> Result<()> {
        if a.len() != self.spec.field_len() {
            return Err(Error::DimensionMismatch {
                expected: self.spec.field_len(),
                got: a.len(),
            });
        }
        Ok(())
    }

    #[inline]
    fn at<'a>(&self, a: &'a [f64], site: usize, mu: usize) -> &'a [f64] {
        let k = (site * 8 + mu) * self.dg;
        &a[k..k + self.dg]
    }

    /// `F(a)` written into `out` (curvature layout).
    pub fn curvature(&self, a: &[f64], out: &mut [f64]) {
        let dg = self.dg;
        out.iter_mut().for_each(|x| *x = 0.0);
        for site in 0..self.sites {
            for (r, &(mu, nu)) in self.pairs.iter().enumerate() {
                let o = &mut out[(site * 28 + r) * dg..(site * 28 + r + 1) * dg];
                let a_mu = self.at(a, site, mu);
                let a_nu = self.at(a, site, nu);
                let a_nu_fwd = self.at(a, self.fwd[site * 8 + mu], nu);
                let a_mu_fwd = self.at(a, self.fwd[site * 8 + nu], mu);
                for c in 0..dg {
                    o[c] = (a_nu_fwd[c] - a_nu[c] - a_mu_fwd[c] + a_mu[c]) * self.inv_h;
                }
                if dg == 3 {
                    su2_bracket(a_mu, a_nu, 1.0, o);
                }
            }
        }
    }

    /// `d_A x`: the derivative of `F` at `A` in direction `x`.
    pub fn linearized_curvature(&self, bg: &[f64], x: &[f64], out: &mut [f64]) {
        let dg = self.dg;
        out.iter_mut().for_each(|v| *v = 0.0);
        for site in 0..self.sites {
            for (r, &(mu, nu)) in self.pairs.iter().enumerate() {
                let o = &mut out[(site * 28 + r) * dg..(site * 28 + r + 1) * dg];
                let x_mu = self.at(x, site, mu);
                let x_nu = self.at(x, site, nu);
                let x_nu_fwd = self.at(x, self.fwd[site * 8 + mu], nu);
                let x_mu_fwd = self.at(x, self.fwd[site * 8 + nu], mu);
                for c in 0..dg {
                    o[c] = (x_nu_fwd[c] - x_nu[c] - x_mu_fwd[c] + x_mu[c]) * self.inv_h;
                }
                if dg == 3 {
                    su2_bracket(self.at(bg, site, mu), x_nu, 1.0, o);
                    su2_bracket(x_mu, self.at(bg, site, nu), 1.0, o);
                }
            }
        }
    }

    /// `out += (d_A)ᵀ g` for `g` in curvature layout.
    pub fn linearized_curvature_adjoint(&self, bg: &[f64], g: &[f64], out: &mut [f64]) {
        let dg = self.dg;
        for site in 0..self.sites {
            for (r, &(mu, nu)) in self.pairs.iter().enumerate() {
                let k = (site * 28 + r) * dg;
                let gr = &g[k..k + dg];
                // x_ν(x + e_μ), x_ν(x), x_μ(x + e_ν), x_μ(x) with weights +, −, −, +.
                let targets = [
                    (self.fwd[site * 8 + mu], nu, self.inv_h),
                    (site, nu, -self.inv_h),
                    (self.fwd[site * 8 + nu], mu, -self.inv_h),
                    (site, mu, self.inv_h),
                ];
                for (s, dir, w) in targets {
                    let o = (s * 8 + dir) * dg;
                    for c in 0..dg {
                        out[o + c] += w * gr[c];
                    }
                }
                if dg == 3 {
                    let (o_mu, o_nu) = ((site * 8 + mu) * dg, (site * 8 + nu) * dg);
                    let bg_mu = self.at(bg, site, mu);
                    let bg_nu = self.at(bg, site, nu);
                    let mut t = [0.0; 3];
                    su2_bracket(bg_nu, gr, 1.0, &mut t);
                    for c in 0..3 {
                        out[o_mu + c] += t[c];
                    }
                    let mut t = [0.0; 3];
                    su2_bracket(gr, bg_mu, 1.0, &mut t);
                    for c in 0..3 {
                        out[o_nu + c] += t[c];
                    }
                }
            }
        }
    }

    /// `B f` per site and component, `B` the orthonormal Λ²₇ basis; layout `(site · 7 + i) · dg + c`.
    pub fn project7(&self, f: &[f64], out: &mut [f64]) {
        let dg = self.dg;
        for site in 0..self.sites {
            for i in 0..7 {
                for c in 0..dg {
                    let mut acc = 0.0;
                    for r in 0..28 {
                        acc += self.basis7[(i, r)] * f[(site * 28 + r) * dg + c];
                    }
                    out[(site * 7 + i) * dg + c] = acc;
                }
            }
        }
    }

    /// `Bᵀ y`, the adjoint of [`Geometry::project7`].
    pub fn lift7(&self, y: &[f64], out: &mut [f64]) {
        let dg = self.dg;
        out.iter_mut().for_each(|v| *v = 0.0);
        for site in 0..self.sites {
            for i in 0..7 {
                for c in 0..dg {
                    let v = y[(site * 7 + i) * dg + c];
                    if v != 0.0 {
                        for r in 0..28 {
                            out[(site * 28 + r) * dg + c] += self.basis7[(i, r)] * v;
                        }
                    }
                }
            }
        }
    }

    /// `d*_A x = −Σ_μ (Δ⁻_μ x_μ + [A_μ, x_μ])`, layout `site · dg + c`.
    pub fn divergence(&self, bg: Option<&[f64]>, x: &[f64], out: &mut [f64]) {
        let dg = self.dg;
        out.iter_mut().for_each(|v| *v = 0.0);
        for site in 0..self.sites {
            let o = &mut out[site * dg..(site + 1) * dg];
            for mu in 0..8 {
                let here = self.at(x, site, mu);
                let back = self.at(x, self.bwd[site * 8 + mu], mu);
                for c in 0..dg {
                    o[c] -= (here[c] - back[c]) * self.inv_h;
                }
                if let (Some(bg), 3) = (bg, dg) {
                    su2_bracket(self.at(bg, site, mu), here, -1.0, o);
                }
            }
        }
    }

    /// `out += (d*_A)ᵀ φ = d_A φ` (forward covariant derivative of a 0-form).
    pub fn divergence_adjoint(&self, bg: Option<&[f64]>, phi: &[f64], out: &mut [f64]) {
        let dg = self.dg;
        for site in 0..self.sites {
            let p = &phi[site * dg..(site + 1) * dg];
            for mu in 0..8 {
                let fwd = self.fwd[site * 8 + mu];
                let pf = &phi[fwd * dg..(fwd + 1) * dg];
                let o = (site * 8 + mu) * dg;
                for c in 0..dg {
                    out[o + c] += (pf[c] - p[c]) * self.inv_h;
                }
                if let (Some(bg), 3) = (bg, dg) {
                    su2_bracket(self.at(bg, site, mu), p, 1.0, &mut out[o..o + 3]);
                }
            }
        }
    }

    pub fn energy(&self, a: &[f64]) -> f64 {
        let mut f = vec![0.0; self.spec.curvature_len()];
        self.curvature(a, &mut f);
        let mut y = vec![0.0; self.sites * 7 * self.dg];
        self.project7(&f, &mut y);
        super::compensated_sum(y.iter().map(|v| v * v))
    }

    pub fn gradient(&self, a: &[f64]) -> Vec<f64> {
        let mut f = vec![0.0; self.spec.curvature_len()];
        self.curvature(a, &mut f);
        let mut y = vec![0.0; self.sites * 7 * self.dg];
        self.project7(&f, &mut y);
        let mut g = vec![0.0; f.len()];
        self.lift7(&y, &mut g);
        let mut out = vec![0.0; a.len()];
        self.linearized_curvature_adjoint(a, &g, &mut out);
        out.iter_mut().for_each(|v| *v *= 2.0);
        out
    }

    /// Lie bracket part `[a_μ, a_ν]` of the curvature (curvature layout).
    pub fn quadratic(&self, a: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|v| *v = 0.0);
        if self.dg != 3 {
            return;
        }
        for site in 0..self.sites {
            for (r, &(mu, nu)) in self.pairs.iter().enumerate() {
                let k = (site * 28 + r) * 3;
                su2_bracket(self.at(a, site, mu), self.at(a, site, nu), 1.0, &mut out[k..k + 3]);
            }
        }
    }

    pub fn max_abs_connection(&self, a: &[f64]) -> f64 {
        a.chunks(self.dg)
            .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }
}

fn geometry_for(a: &GaugeField) -> Geometry {
    Geometry::new(a.spec())
}

fn check_spec(spec: LatticeSpec, a: &GaugeField) -> Result<()> {
    if spec != a.spec() {
        return Err(Error::InvalidInput(format!(
            "field was built for n = {}, group {}, spacing {}",
            a.spec().n,
            a.spec().group,
            a.spec().spacing
        )));
    }
    Ok(())
}

/// `F_{μν} = Δ⁺_μ a_ν − Δ⁺_ν a_μ + [a_μ, a_ν]`.
pub fn curvature(spec: LatticeSpec, a: &GaugeField) -> Result<CurvatureField> {
    check_spec(spec, a)?;
    let geo = geometry_for(a);
    geo.check(a.data())?;
    let mut data = vec![0.0; spec.curvature_len()];
    geo.curvature(a.data(), &mut data);
    Ok(CurvatureField { spec, data })
}

/// `π₇ F` at every site, in curvature layout.
pub fn pi7_curvature(spec: LatticeSpec, a: &GaugeField) -> Result<CurvatureField> {
    let f = curvature(spec, a)?;
    let geo = geometry_for(a);
    let mut y = vec![0.0; geo.sites * 7 * geo.dg];
    geo.project7(f.data(), &mut y);
    let mut data = vec![0.0; f.data().len()];
    geo.lift7(&y, &mut data);
    Ok(CurvatureField { spec, data })
}

/// `Σ_sites ‖π₇ F‖²`.
pub fn energy(spec: LatticeSpec, a: &GaugeField) -> Result<f64> {
    check_spec(spec, a)?;
    Ok(geometry_for(a).energy(a.data()))
}

/// Exact gradient of [`energy`].
pub fn gradient(spec: LatticeSpec, a: &GaugeField) -> Result<GaugeField> {
    check_spec(spec, a)?;
    let g = geometry_for(a).gradient(a.data());
    Ok(GaugeField { spec, data: g })
}

/// L² norm of the flat divergence `Σ_μ Δ⁻_μ a_μ`.
pub fn gauge_fix_residual(spec: LatticeSpec, a: &GaugeField) -> Result<f64> {
    check_spec(spec, a)?;
    let geo = geometry_for(a);
    let mut out = vec![0.0; geo.sites * geo.dg];
    geo.divergence(None, a.data(), &mut out);
    Ok(super::norm(&out))
}

/// `L_A x = (d*_A x, B d_A x)` on a fixed background.
pub struct LinearizedOperator {
    pub(crate) geo: Geometry,
    pub(crate) background: Vec<f64>,
}

impl LinearizedOperator {
    pub fn new(background: &GaugeField) -> Self {
        LinearizedOperator {
            geo: Geometry::new(background.spec()),
            background: background.data().to_vec(),
        }
    }

    pub fn cols(&self) -> usize {
        self.geo.spec.field_len()
    }

    pub fn rows(&self) -> usize {
        self.geo.sites * self.geo.dg * 8
    }

    pub fn div_len(&self) -> usize {
        self.geo.sites * self.geo.dg
    }

    pub fn apply(&self, x: &[f64], out: &mut [f64]) {
        let g = &self.geo;
        let (div, rest) = out.split_at_mut(self.div_len());
        g.divergence(Some(&self.background), x, div);
        let mut f = vec![0.0; g.spec.curvature_len()];
        g.linearized_curvature(&self.background, x, &mut f);
        g.project7(&f, rest);
    }

    pub fn apply_t(&self, y: &[f64], out: &mut [f64]) {
        let g = &self.geo;
        out.iter_mut().for_each(|v| *v = 0.0);
        let (div, rest) = y.split_at(self.div_len());
        g.divergence_adjoint(Some(&self.background), div, out);
        let mut f = vec![0.0; g.spec.curvature_len()];
        g.lift7(rest, &mut f);
        g.linearized_curvature_adjoint(&self.background, &f, out);
    }

    /// Upper bound for `‖L‖²`.
    pub fn norm_sq_bound(&self) -> f64 {
        let m = self.geo.max_abs_connection(&self.background);
        22.0 * (2.0 * self.geo.inv_h + m).powi(2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{dot, Group};

    fn spec(group: Group) -> LatticeSpec {
        LatticeSpec::new(2, 1.0, group).unwrap()
    }

    #[test]
    fn flat_field() {
        for g in [Group::U1, Group::SU2] {
            let a = GaugeField::zeros(spec(g));
            assert_eq!(curvature(spec(g), &a).unwrap().norm(), 0.0);
            assert_eq!(energy(spec(g), &a).unwrap(), 0.0);
            assert_eq!(gradient(spec(g), &a).unwrap().norm(), 0.0);
            assert_eq!(gauge_fix_residual(spec(g), &a).unwrap(), 0.0);
        }
    }

    #[test]
    fn pure_gauge_is_flat() {
        let s = LatticeSpec::new(3, 0.7, Group::U1).unwrap();
        let phi = |x: &[usize; 8]| (x[0] as f64 * 1.3 + x[4] as f64 * x[4] as f64 - 0.2 * x[7] as f64).sin();
        let a = GaugeField::from_fn(s, |x, mu, _| {
            let mut y = *x;
            y[mu] = (y[mu] + 1) % 3;
            (phi(&y) - phi(x)) / 0.7
        });
        assert!(curvature(s, &a).unwrap().norm() < 1e-13);
        assert!(gradient(s, &a).unwrap().norm() < 1e-13);
    }

    #[test]
    fn constant_su2_field_gives_commutators() {
        let s = spec(Group::SU2);
        let a = GaugeField::from_fn(s, |_, mu, c| ((mu * 3 + c) as f64 * 0.37).cos());
        let f = curvature(s, &a).unwrap();
        for (r, &(mu, nu)) in Geometry::new(s).pairs.iter().enumerate() {
            let mut expect = [0.0; 3];
            let am: Vec<f64> = (0..3).map(|c| a.get(5, mu, c)).collect();
            let an: Vec<f64> = (0..3).map(|c| a.get(5, nu, c)).collect();
            su2_bracket(&am, &an, 1.0, &mut expect);
            for c in 0..3 {
                assert!((f.get(5, r, c) - expect[c]).abs() < 1e-14);
                assert_eq!(f.component(5, nu, mu, c), -f.get(5, r, c));
            }
        }
    }

    #[test]
    fn adjoints_are_consistent() {
        let s = spec(Group::SU2);
        let bg = GaugeField::random(s, 1, 0.3);
        let x = GaugeField::random(s, 2, 1.0);
        let op = LinearizedOperator::new(&bg);
        let y: Vec<f64> = GaugeField::random(s, 3, 1.0).into_data();
        let mut lx = vec![0.0; op.rows()];
        op.apply(x.data(), &mut lx);
        let mut lty = vec![0.0; op.cols()];
        op.apply_t(&y, &mut lty);
        assert!((dot(&lx, &y) - dot(x.data(), &lty)).abs() < 1e-10 * dot(&lx, &lx).sqrt());
        assert!(dot(&lx, &lx) <= op.norm_sq_bound() * dot(x.data(), x.data()));
    }

    #[test]
    fn linearization_matches_difference_quotient() {
        let s = spec(Group::SU2);
        let geo = Geometry::new(s);
        let a = GaugeField::random(s, 4, 0.5).into_data();
        let x = GaugeField::random(s, 5, 1.0).into_data();
        let eps = 1e-6;
        let plus: Vec<f64> = a.iter().zip(&x).map(|(p, q)| p + eps * q).collect();
        let minus: Vec<f64> = a.iter().zip(&x).map(|(p, q)| p - eps * q).collect();
        let mut fp = vec![0.0; s.curvature_len()];
        let mut fm = fp.clone();
        let mut dl = fp.clone();
        geo.curvature(&plus, &mut fp);
        geo.curvature(&minus, &mut fm);
        geo.linearized_curvature(&a, &x, &mut dl);
        for i in 0..dl.len() {
            assert!(((fp[i] - fm[i]) / (2.0 * eps) - dl[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn dimension_mismatch_detected() {
        let a = GaugeField::zeros(spec(Group::U1));
        assert!(energy(spec(Group::SU2), &a).is_err());
    }
}
