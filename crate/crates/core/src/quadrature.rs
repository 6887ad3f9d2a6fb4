//! Adaptive Gauss-Legendre integration.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::{Interval, SmoothFunction};
use crate::mollifier::Mollifier;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_depth: usize,
    /// Gauss-Legendre node count of the base rule.
    pub base_rule: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { abs_tol: 1e-10, rel_tol: 1e-10, max_depth: 40, base_rule: 15 }
    }
}

impl QuadConfig {
    /// Tolerances close to the rounding floor, used by rate measurements.
    pub fn precise() -> Self {
        Self { abs_tol: 1e-16, rel_tol: 1e-15, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidParam("quadrature tolerances must be positive".into()));
        }
        if self.max_depth < 1 || self.base_rule < 1 {
            return Err(Error::InvalidParam("max_depth and base_rule must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

/// Multiple of `EPS·∫|f|` below which error estimates are rounding noise.
const ROUNDING_FLOOR: f64 = 8.0;

type Rule = Arc<(Vec<f64>, Vec<f64>)>;

fn rule(n: usize) -> Rule {
    static CACHE: OnceLock<Mutex<HashMap<usize, Rule>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|e| e.into_inner());
    guard.entry(n).or_insert_with(|| Arc::new(compute_gauss_legendre(n))).clone()
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let r = rule(n);
    (r.0.clone(), r.1.clone())
}

fn compute_gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

struct Panel {
    a: f64,
    b: f64,
    whole: (f64, f64),
    left: (f64, f64),
    right: (f64, f64),
    depth: usize,
}

impl Panel {
    fn err(&self) -> f64 {
        (self.left.0 + self.right.0 - self.whole.0).abs()
    }
}

fn apply<F: Fn(f64) -> f64>(f: &F, rule: &Rule, a: f64, b: f64) -> (f64, f64) {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let (mut s, mut s_abs) = (0.0, 0.0);
    for (t, w) in rule.0.iter().zip(rule.1.iter()) {
        let v = f(c + h * t);
        s += w * v;
        s_abs += w * v.abs();
    }
    (s * h, s_abs * h)
}

fn make_panel<F: Fn(f64) -> f64>(f: &F, rule: &Rule, a: f64, b: f64, whole: (f64, f64), depth: usize) -> Panel {
    let m = 0.5 * (a + b);
    Panel { a, b, whole, left: apply(f, rule, a, m), right: apply(f, rule, m, b), depth }
}

/// Integrates `f` over `[a, b]`, first splitting at the interior `breaks`.
///
/// Globally adaptive: the panel with the largest error estimate is bisected
/// until the summed estimate meets `max(abs_tol, rel_tol*|I|)` or a rounding
/// floor proportional to `∫|f|`.
pub fn integrate_fn<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], cfg: &QuadConfig) -> Result<QuadResult> {
    cfg.validate()?;
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::InvalidParam(format!("integration bounds [{a}, {b}] must be finite with a <= b")));
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, error: 0.0, panels: 0 });
    }
    let rule = rule(cfg.base_rule);
    let mut cuts: Vec<f64> = std::iter::once(a)
        .chain(breaks.iter().copied().filter(|&t| t > a && t < b))
        .chain(std::iter::once(b))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut panels: Vec<Panel> = cuts
        .windows(2)
        .map(|w| make_panel(&f, &rule, w[0], w[1], apply(&f, &rule, w[0], w[1]), 0))
        .collect();

    const MAX_PANELS: usize = 100_000;
    loop {
        let value: f64 = panels.iter().map(|p| p.left.0 + p.right.0).sum();
        let abs_int: f64 = panels.iter().map(|p| p.left.1 + p.right.1).sum();
        let error: f64 = panels.iter().map(Panel::err).sum();
        let tol = cfg.abs_tol.max(cfg.rel_tol * value.abs()).max(ROUNDING_FLOOR * f64::EPSILON * abs_int);
        if error <= tol {
            return Ok(QuadResult { value, error, panels: panels.len() });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .map(|(i, p)| (i, p.err()))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        if panels[worst].depth >= cfg.max_depth || panels.len() >= MAX_PANELS {
            return Err(Error::NonConvergence { estimate: value, error_bound: error });
        }
        let p = panels.swap_remove(worst);
        let m = 0.5 * (p.a + p.b);
        panels.push(make_panel(&f, &rule, p.a, m, p.left, p.depth + 1));
        panels.push(make_panel(&f, &rule, m, p.b, p.right, p.depth + 1));
    }
}

/// `∫_a^b f`, with panels split at the support ends of `f`.
pub fn integrate(f: &SmoothFunction, a: f64, b: f64, cfg: &QuadConfig) -> Result<f64> {
    let breaks: Vec<f64> = f.support().map(|s| vec![s.lo(), s.hi()]).unwrap_or_default();
    integrate_fn(|x| f.derivative_raw(x, 0), a, b, &breaks, cfg).map(|r| r.value)
}

/// `d^j/dx^j ∫ u(y) φ(y - x) dy`. The derivatives fall on `u` when its
/// budget allows, otherwise on `φ` as `(-1)^j ∫ u(y) φ^(j)(y - x) dy`.
pub fn convolve_at(u: &SmoothFunction, phi: &Mollifier, x: f64, order: usize, cfg: &QuadConfig) -> Result<f64> {
    let kernel = phi.func();
    let on_u = order <= u.max_order();
    if !on_u && order > kernel.max_order() {
        return Err(Error::OrderBudget { requested: order, budget: kernel.max_order().max(u.max_order()) });
    }
    let Some((lo, hi, breaks)) = overlap(u, phi, x) else { return Ok(0.0) };
    if on_u {
        let res = integrate_fn(|y| u.derivative_raw(y, order) * kernel.derivative_raw(y - x, 0), lo, hi, &breaks, cfg)?;
        return Ok(res.value);
    }
    let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
    let res = integrate_fn(|y| u.derivative_raw(y, 0) * kernel.derivative_raw(y - x, order), lo, hi, &breaks, cfg)?;
    Ok(sign * res.value)
}

/// `d^j/dx^j [∫ u(y) φ(y - x) dy - u(x)]` for unit-integral `φ`, evaluated as
/// `∫ (u^(j)(x + t) - u^(j)(x)) φ(t) dt` to avoid cancellation against `u(x)`.
pub fn defect_at(u: &SmoothFunction, phi: &Mollifier, x: f64, order: usize, cfg: &QuadConfig) -> Result<f64> {
    if order > u.max_order() {
        return Err(Error::OrderBudget { requested: order, budget: u.max_order() });
    }
    let r = phi.radius();
    let base = u.derivative_raw(x, order);
    let mut breaks = vec![-0.5 * r, 0.0, 0.5 * r];
    if let Some(s) = u.support() {
        breaks.extend([s.lo() - x, s.hi() - x]);
    }
    let kernel = phi.func();
    let res = integrate_fn(|t| (u.derivative_raw(x + t, order) - base) * kernel.derivative_raw(t, 0), -r, r, &breaks, cfg)?;
    Ok(res.value)
}

fn overlap(u: &SmoothFunction, phi: &Mollifier, x: f64) -> Option<(f64, f64, Vec<f64>)> {
    let r = phi.radius();
    let (mut lo, mut hi) = (x - r, x + r);
    let mut breaks = vec![x - 0.5 * r, x, x + 0.5 * r];
    if let Some(s) = u.support() {
        lo = lo.max(s.lo());
        hi = hi.min(s.hi());
        breaks.extend([s.lo(), s.hi()]);
    }
    (lo < hi).then_some((lo, hi, breaks))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        for n in [1, 2, 5, 15, 20] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn cubic_integral() {
        let f = SmoothFunction::poly(vec![0.0, 0.0, 3.0]).unwrap();
        let v = integrate(&f, 0.0, 1.0, &QuadConfig::default()).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn bump_integral_matches_simpson_oracle() {
        // composite Simpson with 10^6 subintervals
        let v = integrate(&SmoothFunction::bump(1.0).unwrap(), -1.0, 1.0, &QuadConfig::default()).unwrap();
        assert!((v - 0.443_993_816_168_079_4).abs() < 1e-9, "{v}");
    }

    #[test]
    fn odd_integrand_vanishes() {
        let v = integrate(&SmoothFunction::sin(), -1.0, 1.0, &QuadConfig::default()).unwrap();
        assert!(v.abs() < 1e-12);
    }

    #[test]
    fn single_panel_exactness_for_degree_29() {
        let mut coeffs = vec![0.0; 30];
        coeffs[29] = 30.0;
        coeffs[28] = 29.0;
        let (x, w) = gauss_legendre(15);
        // ∫_0^1 30 x^29 + 29 x^28 = 2 on a single mapped panel
        let s: f64 = x
            .iter()
            .zip(&w)
            .map(|(t, w)| {
                let y = 0.5 + 0.5 * t;
                w * (30.0 * y.powi(29) + 29.0 * y.powi(28))
            })
            .sum::<f64>()
            * 0.5;
        assert!((s - 2.0).abs() < 1e-14, "{}", s - 2.0);
    }

    #[test]
    fn reversed_bounds_rejected() {
        assert!(integrate_fn(|x| x, 1.0, 0.0, &[], &QuadConfig::default()).is_err());
    }

    #[test]
    fn depth_exhaustion_reports_estimate() {
        let cfg = QuadConfig { abs_tol: 1e-30, rel_tol: 1e-30, max_depth: 2, base_rule: 3 };
        match integrate_fn(|x: f64| (50.0 * x).sin().abs(), 0.0, 1.0, &[], &cfg) {
            Err(Error::NonConvergence { estimate, error_bound }) => {
                assert!(estimate.is_finite() && error_bound > 0.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }
}
