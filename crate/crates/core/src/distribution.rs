//! Distributions with exact or quadrature pairings.
//!
//! Two pairing conventions appear in the laboratory. The translated pairing
//! `⟨u, φ(· - x)⟩` equals `(u ∗ φ̌)(x)`, where `φ̌(t) = φ(-t)`; the kernel
//! family `φ*(x)(y) = φ(y - x)` gives the same numbers. For the even
//! mollifiers built here `φ̌ = φ`, so both conventions coincide. For a
//! non-even profile the weak limit of `x -> ⟨u, φ_ε(· - x)⟩` still recovers
//! `u`, but finite-ε values are convolutions with the reflected profile.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::{Domain, Interval, SmoothFunction};
use crate::mollifier::{admissible, Kernel, Mollifier};
use crate::quadrature::{convolve_at, integrate_fn, QuadConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum DistKind {
    Delta { x0: f64 },
    DeltaDerivative { x0: f64, k: usize },
    Heaviside { x0: f64 },
    Regular { f: SmoothFunction },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    kind: DistKind,
    #[serde(default)]
    domain: Domain,
}

impl Distribution {
    pub fn delta(x0: f64) -> Self {
        Self { kind: DistKind::Delta { x0 }, domain: Domain::real_line() }
    }

    pub fn delta_derivative(x0: f64, k: usize) -> Self {
        Self { kind: DistKind::DeltaDerivative { x0, k }, domain: Domain::real_line() }
    }

    pub fn heaviside(x0: f64) -> Self {
        Self { kind: DistKind::Heaviside { x0 }, domain: Domain::real_line() }
    }

    pub fn regular(f: SmoothFunction) -> Self {
        Self { kind: DistKind::Regular { f }, domain: Domain::real_line() }
    }

    /// Restricts to `domain`; the singular point must lie inside it.
    pub fn on(mut self, domain: Domain) -> Result<Self> {
        if let Some(x0) = self.singular_point() {
            if !domain.contains(x0) {
                return Err(Error::Domain(format!("singular point {x0} lies outside the domain")));
            }
        }
        self.domain = domain;
        Ok(self)
    }

    pub fn kind(&self) -> &DistKind {
        &self.kind
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Distributional order.
    pub fn order(&self) -> usize {
        match self.kind {
            DistKind::DeltaDerivative { k, .. } => k,
            _ => 0,
        }
    }

    pub fn singular_point(&self) -> Option<f64> {
        match self.kind {
            DistKind::Delta { x0 } | DistKind::DeltaDerivative { x0, .. } | DistKind::Heaviside { x0 } => Some(x0),
            DistKind::Regular { .. } => None,
        }
    }

    /// Distributional derivative, where the catalog can express it.
    pub fn derivative(&self) -> Result<Distribution> {
        let kind = match &self.kind {
            DistKind::Delta { x0 } => DistKind::DeltaDerivative { x0: *x0, k: 1 },
            DistKind::DeltaDerivative { x0, k } => DistKind::DeltaDerivative { x0: *x0, k: k + 1 },
            DistKind::Heaviside { x0 } => DistKind::Delta { x0: *x0 },
            DistKind::Regular { f } => {
                return Err(Error::Unsupported(format!("symbolic derivative of reg({})", f.label())))
            }
        };
        Ok(Self { kind, domain: self.domain })
    }
}

/// `⟨u, φ⟩` for a compactly supported test function.
pub fn pair(u: &Distribution, phi: &SmoothFunction, cfg: &QuadConfig) -> Result<f64> {
    let supp = phi
        .support()
        .ok_or_else(|| Error::Domain("test function must have compact support".into()))?;
    if !(supp.lo() > u.domain.lo() && supp.hi() < u.domain.hi()) {
        return Err(Error::Domain("test function support escapes the domain".into()));
    }
    match &u.kind {
        DistKind::Delta { x0 } => phi.derivative(*x0, 0),
        DistKind::DeltaDerivative { x0, k } => Ok(sign(*k) * phi.derivative(*x0, *k)?),
        DistKind::Heaviside { x0 } => {
            let lo = x0.max(supp.lo());
            if lo >= supp.hi() {
                return Ok(0.0);
            }
            Ok(integrate_fn(|y| phi.derivative_raw(y, 0), lo, supp.hi(), &[supp.midpoint()], cfg)?.value)
        }
        DistKind::Regular { f } => {
            let (mut lo, mut hi) = (supp.lo(), supp.hi());
            if let Some(s) = f.support() {
                lo = lo.max(s.lo());
                hi = hi.min(s.hi());
            }
            if lo >= hi {
                return Ok(0.0);
            }
            let r = integrate_fn(
                |y| f.derivative_raw(y, 0) * phi.derivative_raw(y, 0),
                lo,
                hi,
                &[supp.midpoint()],
                cfg,
            )?;
            Ok(r.value)
        }
    }
}

/// `d^j/dx^j ⟨u, φ(· - x)⟩`.
pub fn pair_translated(u: &Distribution, phi: &Mollifier, x: f64, order: usize, cfg: &QuadConfig) -> Result<f64> {
    if !admissible(phi, x, &u.domain) {
        return Err(Error::Domain(format!(
            "supp φ + x = [{}, {}] is not inside the domain",
            x - phi.radius(),
            x + phi.radius()
        )));
    }
    let budget = phi.func().max_order();
    let need = order + u.order();
    if need > budget {
        return Err(Error::OrderBudget { requested: need, budget });
    }
    let f = phi.func();
    match &u.kind {
        DistKind::Delta { x0 } => Ok(sign(order) * f.derivative_raw(x0 - x, order)),
        DistKind::DeltaDerivative { x0, k } => Ok(sign(order + k) * f.derivative_raw(x0 - x, order + k)),
        DistKind::Heaviside { x0 } => {
            if order == 0 {
                phi.tail_integral(x0 - x, cfg)
            } else {
                Ok(sign(order - 1) * f.derivative_raw(x0 - x, order - 1))
            }
        }
        DistKind::Regular { f: density } => convolve_at(density, phi, x, order, cfg),
    }
}

/// `⟨u, ∂_x^j k(x)⟩` for a general kernel family.
pub fn pair_kernel(u: &Distribution, kernel: &dyn Kernel, x: f64, order: usize, cfg: &QuadConfig) -> Result<f64> {
    let need = order + u.order();
    if need > kernel.max_order() {
        return Err(Error::OrderBudget { requested: need, budget: kernel.max_order() });
    }
    let ys = kernel.y_support(x);
    if !(ys.lo() > u.domain.lo() && ys.hi() < u.domain.hi()) {
        return Err(Error::Domain("kernel support escapes the domain".into()));
    }
    let quarter = 0.25 * ys.length();
    let breaks = [ys.lo() + quarter, ys.midpoint(), ys.hi() - quarter];
    match &u.kind {
        DistKind::Delta { x0 } => Ok(kernel.value(x, *x0, order, 0)),
        DistKind::DeltaDerivative { x0, k } => Ok(sign(*k) * kernel.value(x, *x0, order, *k)),
        DistKind::Heaviside { x0 } => {
            let lo = x0.max(ys.lo());
            if lo >= ys.hi() {
                return Ok(0.0);
            }
            Ok(integrate_fn(|y| kernel.value(x, y, order, 0), lo, ys.hi(), &breaks, cfg)?.value)
        }
        DistKind::Regular { f } => {
            let (mut lo, mut hi) = (ys.lo(), ys.hi());
            let mut cuts = breaks.to_vec();
            if let Some(s) = f.support() {
                lo = lo.max(s.lo());
                hi = hi.min(s.hi());
                cuts.extend([s.lo(), s.hi()]);
            }
            if lo >= hi {
                return Ok(0.0);
            }
            let r = integrate_fn(|y| f.derivative_raw(y, 0) * kernel.value(x, y, order, 0), lo, hi, &cuts, cfg)?;
            Ok(r.value)
        }
    }
}

fn sign(k: usize) -> f64 {
    if k % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mollifier::{build_moment_mollifier, scale, starred};

    fn cfg() -> QuadConfig {
        QuadConfig::precise()
    }

    #[test]
    fn pairing_definitions() {
        let phi = build_moment_mollifier(0, 1.0).unwrap();
        let f = phi.func();
        assert_eq!(pair(&Distribution::delta(0.0), f, &cfg()).unwrap(), phi.value(0.0));
        let d1 = pair(&Distribution::delta_derivative(0.3, 1), f, &cfg()).unwrap();
        assert_eq!(d1, -phi.derivative(0.3, 1).unwrap());
    }

    #[test]
    fn heaviside_against_bump_is_half_the_bump_integral() {
        let b = SmoothFunction::bump(1.0).unwrap();
        let v = pair(&Distribution::heaviside(0.0), &b, &cfg()).unwrap();
        assert!((v - 0.443_993_816_168_079_4 / 2.0).abs() < 1e-9);
    }

    #[test]
    fn support_escape_is_an_error() {
        let u = Distribution::delta(0.0).on(Domain::new(-0.5, 0.5).unwrap()).unwrap();
        let b = SmoothFunction::bump(1.0).unwrap();
        assert!(matches!(pair(&u, &b, &cfg()), Err(Error::Domain(_))));
        let phi = build_moment_mollifier(0, 1.0).unwrap();
        assert!(matches!(pair_translated(&u, &phi, 0.0, 0, &cfg()), Err(Error::Domain(_))));
        assert!(Distribution::delta(2.0).on(Domain::new(-1.0, 1.0).unwrap()).is_err());
    }

    #[test]
    fn translated_examples() {
        let phi = scale(&build_moment_mollifier(2, 1.0).unwrap(), 0.5).unwrap();
        for x in [-0.3, 0.0, 0.2] {
            let v = pair_translated(&Distribution::delta(0.0), &phi, x, 0, &cfg()).unwrap();
            assert_eq!(v, phi.value(-x));
        }
        let h = pair_translated(&Distribution::heaviside(0.0), &phi, 0.0, 0, &cfg()).unwrap();
        assert!((h - 0.5).abs() < 1e-13);
        // H' = δ in the x-derivative of the translated pairing
        let dh = pair_translated(&Distribution::heaviside(0.0), &phi, 0.1, 1, &cfg()).unwrap();
        assert_eq!(dh, phi.value(-0.1));
    }

    #[test]
    fn translated_sin_within_taylor_bound() {
        let eps = 2f64.powi(-8);
        let base = build_moment_mollifier(2, 1.0).unwrap();
        let phi = scale(&base, eps).unwrap();
        let v = pair_translated(&Distribution::regular(SmoothFunction::sin()), &phi, 0.3, 0, &cfg()).unwrap();
        // |R| <= ‖sin'''‖ / 3! * ∫|t^3 φ_ε| = ε^3 / 6 * ∫|s^3 φ|
        let abs3 = integrate_fn(|s| (s.powi(3) * base.value(s)).abs(), -1.0, 1.0, &[0.0], &cfg()).unwrap().value;
        assert!((v - 0.3f64.sin()).abs() <= eps.powi(3) / 6.0 * abs3);
    }

    #[test]
    fn general_kernel_route_agrees_with_closed_forms() {
        let phi = scale(&build_moment_mollifier(2, 1.0).unwrap(), 0.25).unwrap();
        let k = starred(&phi);
        let dists = [
            Distribution::delta(0.1),
            Distribution::delta_derivative(-0.05, 2),
            Distribution::heaviside(0.0),
            Distribution::regular(SmoothFunction::cos()),
        ];
        for u in &dists {
            for order in 0..3 {
                let a = pair_translated(u, &phi, 0.07, order, &cfg()).unwrap();
                let b = pair_kernel(u, &k, 0.07, order, &cfg()).unwrap();
                assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()), "{u:?} order {order}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn derivative_map() {
        assert_eq!(Distribution::heaviside(0.5).derivative().unwrap(), Distribution::delta(0.5));
        assert_eq!(Distribution::delta(0.0).derivative().unwrap().order(), 1);
        assert!(Distribution::regular(SmoothFunction::sin()).derivative().is_err());
    }
}
