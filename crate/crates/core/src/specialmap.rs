//! Cutoff kernels `ψ_ε(x)(y) = θ_ε(x - y) κ_ε(y)` mapping representatives
//! to ε-indexed families.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::jet::binomial;
use crate::funcspace::{CompactSet, Domain, Interval, SmoothFunction};
use crate::genfunc::{eval, KernelArg, Representative};
use crate::mollifier::{build_moment_mollifier, scale, Kernel, Mollifier};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecialConfig {
    pub rho: Mollifier,
    pub chi: SmoothFunction,
    #[serde(default)]
    pub domain: Domain,
}

impl SpecialConfig {
    /// `ρ ∈ 𝒜_q` with the given radius and `χ` equal to one on `[-1, 1]`
    /// and supported in `[-2, 2]`.
    pub fn new(q: usize, radius: f64, domain: Domain) -> Result<Self> {
        let cfg = Self {
            rho: build_moment_mollifier(q, radius)?,
            chi: SmoothFunction::plateau(-1.0, 1.0, 1.0)?,
            domain,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Samples the cutoff on `[-3, 3]`.
    pub fn validate(&self) -> Result<()> {
        if !self.rho.unit_integral() {
            return Err(Error::InvalidParam("ρ must have unit integral".into()));
        }
        for i in 0..=600 {
            let y = -3.0 + 0.01 * i as f64;
            let v = self.chi.value(y)?;
            let ok = (0.0..=1.0).contains(&v)
                && (y.abs() > 1.0 || v == 1.0)
                && (y.abs() < 2.0 || v == 0.0);
            if !ok {
                return Err(Error::InvalidParam(format!("χ({y}) = {v} violates the cutoff conditions")));
            }
        }
        Ok(())
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidParam(format!("ε must lie in (0, 1), got {eps}")));
    }
    Ok(())
}

/// `θ_ε(y) = ε⁻¹ρ(y/ε) χ(y |ln ε|)`.
pub fn theta(cfg: &SpecialConfig, eps: f64) -> Result<SmoothFunction> {
    check_eps(eps)?;
    let rho_eps = scale(&cfg.rho, eps)?;
    let chi = SmoothFunction::dilate(cfg.chi.clone(), 1.0 / eps.ln().abs())?;
    Ok(SmoothFunction::product(rho_eps.func().clone(), chi))
}

/// `{x ∈ Ω : d(x, ℝ∖Ω) ≥ ε} ∩ [-1/ε, 1/ε]`.
pub fn k_eps(domain: &Domain, eps: f64) -> Result<CompactSet> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParam(format!("ε must be positive, got {eps}")));
    }
    let lo = (domain.lo() + eps).max(-1.0 / eps);
    let hi = (domain.hi() - eps).min(1.0 / eps);
    if lo > hi {
        return Err(Error::EmptySet(format!("K_ε is empty for ε = {eps}")));
    }
    CompactSet::new(lo, hi)
}

/// Equal to one on `K_ε`, supported in its `ε/2`-neighbourhood.
pub fn kappa(domain: &Domain, eps: f64) -> Result<SmoothFunction> {
    let k = k_eps(domain, eps)?;
    let margin = 0.5 * eps;
    if !(k.lo() - margin > domain.lo() && k.hi() + margin < domain.hi()) {
        return Err(Error::Domain(format!("cutoff margin {margin} does not fit inside the domain")));
    }
    SmoothFunction::plateau(k.lo(), k.hi(), margin)
}

/// `(x, y) ↦ θ(x - y) κ(y)`.
#[derive(Debug, Clone)]
pub struct PsiKernel {
    theta: SmoothFunction,
    kappa: SmoothFunction,
}

impl PsiKernel {
    pub fn new(cfg: &SpecialConfig, eps: f64) -> Result<Self> {
        Ok(Self { theta: theta(cfg, eps)?, kappa: kappa(&cfg.domain, eps)? })
    }

    pub fn theta(&self) -> &SmoothFunction {
        &self.theta
    }

    pub fn kappa(&self) -> &SmoothFunction {
        &self.kappa
    }
}

impl Kernel for PsiKernel {
    /// `Σ_i C(β,i) (-1)^i θ^(α+i)(x - y) κ^(β-i)(y)`.
    fn value(&self, x: f64, y: f64, dx: usize, dy: usize) -> f64 {
        (0..=dy)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                s * binomial(dy, i) * self.theta.derivative_raw(x - y, dx + i) * self.kappa.derivative_raw(y, dy - i)
            })
            .sum()
    }

    fn y_support(&self, x: f64) -> CompactSet {
        let t = self.theta.support().expect("θ has compact support");
        let ys = CompactSet::new(x - t.hi(), x - t.lo()).expect("finite support");
        match self.kappa.support().and_then(|k| ys.intersect(&k)) {
            Some(s) => s,
            None => CompactSet::point(x).expect("finite point"),
        }
    }

    fn max_order(&self) -> usize {
        self.theta.max_order().min(self.kappa.max_order())
    }
}

pub fn psi(cfg: &SpecialConfig, eps: f64) -> Result<KernelArg> {
    Ok(KernelArg::General(Arc::new(PsiKernel::new(cfg, eps)?)))
}

/// `∂_x^order R(ψ⃗_ε)(x)`.
pub fn special_rep(r: &Representative, cfg: &SpecialConfig, eps: f64, x: f64, order: usize) -> Result<f64> {
    if !cfg.domain.contains(x) {
        return Err(Error::Domain(format!("x = {x} lies outside the domain")));
    }
    eval(r, &psi(cfg, eps)?, x, order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distribution::Distribution;

    fn cfg() -> SpecialConfig {
        SpecialConfig::new(2, 1.0, Domain::real_line()).unwrap()
    }

    #[test]
    fn theta_in_plateau_regime() {
        let c = cfg();
        let eps = 0.01;
        let th = theta(&c, eps).unwrap();
        let rho = scale(&c.rho, eps).unwrap();
        for i in 0..=40 {
            let y = -0.01 + 0.0005 * i as f64;
            assert_eq!(th.value(y).unwrap(), rho.value(y));
        }
        assert!((th.value(0.0).unwrap() - c.rho.value(0.0) / eps).abs() < 1e-12 / eps);
        let s = th.support().unwrap();
        assert!(s.lo() >= -eps && s.hi() <= eps);
        let int = crate::quadrature::integrate(&th, s.lo(), s.hi(), &crate::quadrature::QuadConfig::precise()).unwrap();
        assert!((int - 1.0).abs() < 1e-10);
        assert!(theta(&c, 1.0).is_err());
    }

    #[test]
    fn k_eps_examples() {
        let k = k_eps(&Domain::new(-1.0, 1.0).unwrap(), 0.1).unwrap();
        assert!((k.lo() + 0.9).abs() < 1e-15 && (k.hi() - 0.9).abs() < 1e-15);
        let k = k_eps(&Domain::real_line(), 0.1).unwrap();
        assert_eq!((k.lo(), k.hi()), (-10.0, 10.0));
        assert!(matches!(k_eps(&Domain::new(0.0, 0.1).unwrap(), 0.2), Err(Error::EmptySet(_))));
    }

    #[test]
    fn kappa_bounds() {
        let d = Domain::new(-1.0, 1.0).unwrap();
        let k = kappa(&d, 0.1).unwrap();
        assert_eq!(k.value(0.0).unwrap(), 1.0);
        assert_eq!(k.value(0.96).unwrap(), 0.0);
        for i in 0..1000 {
            let v = k.value(-1.0 + 0.002 * i as f64).unwrap();
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn embedded_delta_closed_form() {
        let c = SpecialConfig::new(2, 1.0, Domain::new(-1.0, 1.0).unwrap()).unwrap();
        let eps = 0.05;
        let th = theta(&c, eps).unwrap();
        let ka = kappa(&c.domain, eps).unwrap();
        let r = Representative::embed(Distribution::delta(0.0).on(c.domain).unwrap());
        for x in [-0.03, 0.0, 0.02] {
            let want = th.value(x).unwrap() * ka.value(0.0).unwrap();
            assert!((special_rep(&r, &c, eps, x, 0).unwrap() - want).abs() < 1e-12 * want.abs().max(1.0));
        }
    }

    #[test]
    fn matches_convolution_when_cutoffs_inactive() {
        let c = cfg();
        let eps = 0.02;
        let r = Representative::embed(Distribution::regular(SmoothFunction::sin()));
        let conv = KernelArg::Conv(scale(&c.rho, eps).unwrap());
        for x in [-0.5, 0.1, 0.8] {
            let a = special_rep(&r, &c, eps, x, 0).unwrap();
            let b = eval(&r, &conv, x, 0).unwrap();
            assert!((a - b).abs() < 1e-10, "{a} {b}");
        }
        let s = Representative::sigma(SmoothFunction::sin());
        assert_eq!(special_rep(&s, &c, 0.1, 0.3, 0).unwrap(), 0.3f64.sin());
        assert_eq!(special_rep(&s, &c, 0.01, 0.3, 0).unwrap(), 0.3f64.sin());
    }

    #[test]
    fn psi_partials_match_finite_differences() {
        let k = PsiKernel::new(&SpecialConfig::new(2, 1.0, Domain::new(-1.0, 1.0).unwrap()).unwrap(), 0.3).unwrap();
        let (x, y, h) = (0.55, 0.75, 1e-6);
        let fx = (k.value(x + h, y, 0, 0) - k.value(x - h, y, 0, 0)) / (2.0 * h);
        let fy = (k.value(x, y + h, 0, 0) - k.value(x, y - h, 0, 0)) / (2.0 * h);
        assert!((fx - k.value(x, y, 1, 0)).abs() < 1e-5 * fx.abs().max(1.0));
        assert!((fy - k.value(x, y, 0, 1)).abs() < 1e-5 * fy.abs().max(1.0));
    }
}
