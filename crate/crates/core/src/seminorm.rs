//! Seminorm families on smooth functions and smoothing kernels, and the
//! nonnegative polynomial semirings used to bound them.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::{CompactSet, Interval, SmoothFunction};
use crate::mollifier::{ConvKernel, Kernel, Mollifier};
use crate::quadrature::{convolve_at, defect_at, integrate_fn, QuadConfig};

/// Grid and refinement settings for sup estimates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupConfig {
    pub grid_points: usize,
    pub refine_factor: usize,
    pub max_passes: usize,
}

impl Default for SupConfig {
    fn default() -> Self {
        Self { grid_points: 2001, refine_factor: 4, max_passes: 6 }
    }
}

impl SupConfig {
    pub fn with_grid(mut self, grid_points: usize) -> Self {
        self.grid_points = grid_points;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupEstimate {
    pub value: f64,
    pub grid_points: usize,
    pub refinement_passes: usize,
    /// True iff the last refinement moved the value by less than 1e-6 relative.
    pub stability_flag: bool,
}

const STABLE_REL: f64 = 1e-6;

/// Grid sup of a nonnegative function on `k`.
///
/// A uniform grid on `k` is merged with one uniform grid per `focus`
/// interval (clipped to `k`), then refined around the arg-max.
pub fn grid_sup<F>(f: F, k: &CompactSet, focus: &[CompactSet], cfg: &SupConfig) -> Result<SupEstimate>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let n = cfg.grid_points.max(2);
    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut push_grid = |set: &CompactSet| {
        if set.length() == 0.0 {
            points.push((set.lo(), 0.0));
            return;
        }
        let h = set.length() / (n - 1) as f64;
        points.extend((0..n).map(|i| (set.lo() + i as f64 * h, h)));
    };
    push_grid(k);
    for f in focus {
        if let Some(c) = f.intersect(k) {
            push_grid(&c);
        }
    }
    let values: Vec<f64> = points.par_iter().map(|&(x, _)| f(x)).collect::<Result<_>>()?;
    let (mut best_x, mut h, mut best) = (points[0].0, points[0].1, values[0]);
    for (&(x, hx), &v) in points.iter().zip(&values).skip(1) {
        if v > best || v.is_nan() {
            best = v;
            best_x = x;
            h = hx;
        }
    }
    let grid_points = points.len();
    let mut passes = 0;
    let mut stable = true;
    let r = cfg.refine_factor.max(2);
    while passes < cfg.max_passes && h > 0.0 {
        h /= r as f64;
        passes += 1;
        let local: Vec<f64> = (-(r as i64)..=r as i64)
            .map(|i| best_x + i as f64 * h)
            .filter(|&x| k.contains(x))
            .collect();
        let vals: Vec<f64> = local.par_iter().map(|&x| f(x)).collect::<Result<_>>()?;
        let old = best;
        for (&x, &v) in local.iter().zip(&vals) {
            if v > best {
                best = v;
                best_x = x;
            }
        }
        let change = if old == 0.0 { if best == 0.0 { 0.0 } else { 1.0 } } else { (best - old) / old };
        stable = change < STABLE_REL;
    }
    Ok(SupEstimate { value: best, grid_points, refinement_passes: passes, stability_flag: stable })
}

/// `‖f‖_{K,m} = sup_{x∈K, j≤m} |f^(j)(x)|`.
pub fn norm_km(f: &SmoothFunction, k: &CompactSet, m: usize, cfg: &SupConfig) -> Result<SupEstimate> {
    if m > f.max_order() {
        return Err(Error::OrderBudget { requested: m, budget: f.max_order() });
    }
    grid_sup(|x| Ok(f.derivatives(x, m)?.into_iter().fold(0.0, |a, v| a.max(v.abs()))), k, &[], cfg)
}

/// `‖φ‖_c = sup_{x, j≤c} |φ^(j)(x)|`, taken over the support.
pub fn norm_c(phi: &Mollifier, c: usize, cfg: &SupConfig) -> Result<SupEstimate> {
    norm_km(phi.func(), &phi.support(), c, cfg)
}

/// `‖φ*‖_{K,c;L,l}` through the reduction to
/// `max_{j≤c+l} sup_{t ∈ L-K} |φ^(j)(t)|`, cross-checked on a coarse 2D grid.
pub fn kernel_norm(
    kern: &ConvKernel,
    k: &CompactSet,
    c: usize,
    l: &CompactSet,
    ll: usize,
    cfg: &SupConfig,
) -> Result<SupEstimate> {
    let phi = kern.base();
    let order = c + ll;
    if order > phi.func().max_order() {
        return Err(Error::OrderBudget { requested: order, budget: phi.func().max_order() });
    }
    let diffs = CompactSet::new(l.lo() - k.hi(), l.hi() - k.lo())?;
    let Some(t_range) = diffs.intersect(&phi.support()) else {
        return Ok(SupEstimate { value: 0.0, grid_points: 0, refinement_passes: 0, stability_flag: true });
    };
    let mut est = norm_km(phi.func(), &t_range, order, cfg)?;

    const COARSE: usize = 41;
    let grid = |s: &CompactSet, i: usize| s.lo() + s.length() * i as f64 / (COARSE - 1) as f64;
    let mut coarse: f64 = 0.0;
    for i in 0..COARSE {
        let x = grid(k, i);
        for j in 0..COARSE {
            let y = grid(l, j);
            for a in 0..=c {
                for b in 0..=ll {
                    coarse = coarse.max(kern.value(x, y, a, b).abs());
                }
            }
        }
    }
    if coarse > est.value * (1.0 + STABLE_REL) {
        est.stability_flag = false;
        est.value = coarse;
    }
    Ok(est)
}

/// `‖k‖_{K,c;L,l}` for a general kernel by a direct grid over `x ∈ K` and
/// `y ∈ supp k(x) ∩ L`.
pub fn kernel_norm_general(
    kern: &dyn Kernel,
    k: &CompactSet,
    c: usize,
    l: &CompactSet,
    ll: usize,
    cfg: &SupConfig,
) -> Result<SupEstimate> {
    if c + ll > kern.max_order() {
        return Err(Error::OrderBudget { requested: c + ll, budget: kern.max_order() });
    }
    let ny = cfg.grid_points.clamp(3, 801);
    let inner = |x: f64| -> Result<f64> {
        let Some(ys) = kern.y_support(x).intersect(l) else { return Ok(0.0) };
        let mut best: f64 = 0.0;
        for j in 0..ny {
            let y = ys.lo() + ys.length() * j as f64 / (ny - 1) as f64;
            for a in 0..=c {
                for b in 0..=ll {
                    best = best.max(kern.value(x, y, a, b).abs());
                }
            }
        }
        Ok(best)
    };
    let xcfg = SupConfig { grid_points: cfg.grid_points.clamp(3, 201), ..*cfg };
    grid_sup(inner, k, &[], &xcfg)
}

/// A finite stand-in for a bounded subset of `C^∞(Ω)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundedFamily {
    members: Vec<SmoothFunction>,
}

impl BoundedFamily {
    pub fn new(members: Vec<SmoothFunction>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidParam("bounded family must be nonempty".into()));
        }
        Ok(Self { members })
    }

    pub fn members(&self) -> &[SmoothFunction] {
        &self.members
    }

    fn check_order(&self, c: usize) -> Result<()> {
        for f in &self.members {
            if f.max_order() < c {
                return Err(Error::OrderBudget { requested: c, budget: f.max_order() });
            }
        }
        Ok(())
    }

    /// `sup_{f∈B} ‖f‖_{K,m}`.
    pub fn sup_norm(&self, k: &CompactSet, m: usize, cfg: &SupConfig) -> Result<f64> {
        self.members.iter().try_fold(0.0f64, |acc, f| Ok(acc.max(norm_km(f, k, m, cfg)?.value)))
    }
}

/// `‖φ* - δ⃗‖_{K,c;B} = sup_{x∈K, j≤c, f∈B} |d^j/dx^j [(f ∗ φ̌)(x) - f(x)]|`.
pub fn defect_norm(
    kern: &ConvKernel,
    k: &CompactSet,
    c: usize,
    family: &BoundedFamily,
    cfg: &SupConfig,
    quad: &QuadConfig,
) -> Result<SupEstimate> {
    family.check_order(c)?;
    let phi = kern.base();
    grid_sup(
        |x| {
            let mut best: f64 = 0.0;
            for f in family.members() {
                for j in 0..=c {
                    best = best.max(defect_at(f, phi, x, j, quad)?.abs());
                }
            }
            Ok(best)
        },
        k,
        &[],
        cfg,
    )
}

/// `‖φ*‖_{K,c;B} = sup_{x∈K, j≤c, f∈B} |∫ f(y) ∂_x^j φ(y - x) dy|`.
pub fn pairing_norm(
    kern: &ConvKernel,
    k: &CompactSet,
    c: usize,
    family: &BoundedFamily,
    cfg: &SupConfig,
    quad: &QuadConfig,
) -> Result<SupEstimate> {
    family.check_order(c)?;
    let phi = kern.base();
    grid_sup(
        |x| {
            let mut best: f64 = 0.0;
            for f in family.members() {
                for j in 0..=c {
                    best = best.max(convolve_at(f, phi, x, j, quad)?.abs());
                }
            }
            Ok(best)
        },
        k,
        &[],
        cfg,
    )
}

/// Defect seminorm for a general kernel family.
pub fn defect_norm_general(
    kern: &dyn Kernel,
    k: &CompactSet,
    c: usize,
    family: &BoundedFamily,
    cfg: &SupConfig,
    quad: &QuadConfig,
) -> Result<SupEstimate> {
    family.check_order(c)?;
    if c > kern.max_order() {
        return Err(Error::OrderBudget { requested: c, budget: kern.max_order() });
    }
    grid_sup(
        |x| {
            let ys = kern.y_support(x);
            let mut best: f64 = 0.0;
            for f in family.members() {
                let own = f.derivatives(x, c)?;
                for (j, fj) in own.iter().enumerate() {
                    let r = integrate_fn(
                        |y| f.derivative_raw(y, 0) * kern.value(x, y, j, 0),
                        ys.lo(),
                        ys.hi(),
                        &[ys.midpoint()],
                        quad,
                    )?;
                    best = best.max((r.value - fj).abs());
                }
            }
            Ok(best)
        },
        k,
        &[],
        cfg,
    )
}

/// One term `coeff · y^α · z^β`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Monomial {
    pub y_exp: Vec<u32>,
    pub z_exp: Vec<u32>,
    pub coeff: f64,
}

impl Monomial {
    fn y_degree(&self) -> u32 {
        self.y_exp.iter().sum()
    }

    fn z_degree(&self) -> u32 {
        self.z_exp.iter().sum()
    }
}

/// A polynomial with nonnegative coefficients in `y_0..y_k, z_0..z_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PosPoly {
    k: usize,
    monomials: Vec<Monomial>,
}

impl PosPoly {
    pub fn new(k: usize, monomials: Vec<Monomial>) -> Result<Self> {
        for m in &monomials {
            if !(m.coeff >= 0.0 && m.coeff.is_finite()) {
                return Err(Error::InvalidParam(format!("coefficient {} is not a finite nonnegative number", m.coeff)));
            }
            if m.y_exp.len() != k + 1 || m.z_exp.len() != k + 1 {
                return Err(Error::InvalidParam(format!("monomial exponents must have length {}", k + 1)));
            }
        }
        let mut p = Self { k, monomials };
        p.collect_terms();
        Ok(p)
    }

    pub fn zero(k: usize) -> Self {
        Self { k, monomials: vec![] }
    }

    pub fn constant(k: usize, c: f64) -> Result<Self> {
        Self::new(k, vec![Monomial { y_exp: vec![0; k + 1], z_exp: vec![0; k + 1], coeff: c }])
    }

    /// `coeff · y_i^d`.
    pub fn y_power(k: usize, i: usize, d: u32, coeff: f64) -> Result<Self> {
        if i > k {
            return Err(Error::InvalidParam(format!("variable y{i} out of range for k={k}")));
        }
        let mut y_exp = vec![0; k + 1];
        y_exp[i] = d;
        Self::new(k, vec![Monomial { y_exp, z_exp: vec![0; k + 1], coeff }])
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    fn collect_terms(&mut self) {
        let mut out: Vec<Monomial> = Vec::with_capacity(self.monomials.len());
        for m in self.monomials.drain(..) {
            if m.coeff == 0.0 {
                continue;
            }
            match out.iter_mut().find(|o| o.y_exp == m.y_exp && o.z_exp == m.z_exp) {
                Some(o) => o.coeff += m.coeff,
                None => out.push(m),
            }
        }
        self.monomials = out;
    }

    /// Member of `𝒫_k`: no `z` appears.
    pub fn in_p(&self) -> bool {
        self.monomials.iter().all(|m| m.z_degree() == 0)
    }

    /// Member of `ℐ_k`: vanishes when all `z` are zero.
    pub fn in_i(&self) -> bool {
        self.monomials.iter().all(|m| m.coeff == 0.0 || m.z_degree() > 0)
    }

    pub fn y_degree(&self) -> u32 {
        self.monomials.iter().map(Monomial::y_degree).max().unwrap_or(0)
    }

    pub fn add(&self, other: &PosPoly) -> Result<PosPoly> {
        self.same_arity(other)?;
        PosPoly::new(self.k, self.monomials.iter().chain(&other.monomials).cloned().collect())
    }

    pub fn mul(&self, other: &PosPoly) -> Result<PosPoly> {
        self.same_arity(other)?;
        let mut terms = Vec::with_capacity(self.monomials.len() * other.monomials.len());
        for a in &self.monomials {
            for b in &other.monomials {
                terms.push(Monomial {
                    y_exp: a.y_exp.iter().zip(&b.y_exp).map(|(p, q)| p + q).collect(),
                    z_exp: a.z_exp.iter().zip(&b.z_exp).map(|(p, q)| p + q).collect(),
                    coeff: a.coeff * b.coeff,
                });
            }
        }
        PosPoly::new(self.k, terms)
    }

    fn same_arity(&self, other: &PosPoly) -> Result<()> {
        if self.k != other.k {
            return Err(Error::InvalidParam(format!("arity mismatch: k={} vs k={}", self.k, other.k)));
        }
        Ok(())
    }
}

/// `Σ coeff · y^α · z^β`. An empty `z` means all zeros.
pub fn eval_pospoly(lambda: &PosPoly, y: &[f64], z: &[f64]) -> Result<f64> {
    let n = lambda.k + 1;
    let z_owned;
    let z = if z.is_empty() {
        z_owned = vec![0.0; n];
        &z_owned[..]
    } else {
        z
    };
    if y.len() != n || z.len() != n {
        return Err(Error::InvalidParam(format!("expected {n} y and {n} z values")));
    }
    if y.iter().chain(z).any(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidParam("polynomial arguments must be nonnegative".into()));
    }
    Ok(lambda
        .monomials
        .iter()
        .map(|m| {
            let py: f64 = m.y_exp.iter().zip(y).map(|(e, v)| v.powi(*e as i32)).product();
            let pz: f64 = m.z_exp.iter().zip(z).map(|(e, v)| v.powi(*e as i32)).product();
            m.coeff * py * pz
        })
        .sum())
}

impl fmt::Display for PosPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.monomials.is_empty() {
            return write!(f, "0");
        }
        for (i, m) in self.monomials.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            let mut factors = Vec::new();
            for (name, exps) in [("y", &m.y_exp), ("z", &m.z_exp)] {
                for (idx, e) in exps.iter().enumerate() {
                    match e {
                        0 => {}
                        1 => factors.push(format!("{name}{idx}")),
                        _ => factors.push(format!("{name}{idx}^{e}")),
                    }
                }
            }
            if factors.is_empty() {
                write!(f, "{}", m.coeff)?;
            } else if m.coeff == 1.0 {
                write!(f, "{}", factors.join("*"))?;
            } else {
                write!(f, "{}*{}", m.coeff, factors.join("*"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mollifier::{build_moment_mollifier, scale, starred};
    use std::f64::consts::PI;

    fn sup() -> SupConfig {
        SupConfig::default()
    }

    #[test]
    fn sin_norms_on_half_period() {
        let k = CompactSet::new(0.0, PI).unwrap();
        let v0 = norm_km(&SmoothFunction::sin(), &k, 0, &sup()).unwrap();
        assert!((v0.value - 1.0).abs() < 1e-6);
        let v1 = norm_km(&SmoothFunction::sin(), &k, 1, &sup()).unwrap();
        assert!((v1.value - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bump_peak_norm() {
        let k = CompactSet::new(-1.0, 1.0).unwrap();
        let v = norm_km(&SmoothFunction::bump(1.0).unwrap(), &k, 0, &sup()).unwrap();
        assert!((v.value - (-1.0f64).exp()).abs() < 1e-6);
        assert!(v.stability_flag);
    }

    #[test]
    fn norm_c_of_normalized_bump_and_scaling() {
        let phi = build_moment_mollifier(0, 1.0).unwrap();
        let n0 = norm_c(&phi, 0, &sup()).unwrap().value;
        // peak = bump(0) / ∫bump, with the Simpson oracle for the integral
        assert!((n0 - (-1.0f64).exp() / 0.443_993_816_168_079_4).abs() < 1e-8);
        let s = scale(&phi, 0.125).unwrap();
        let ns = norm_c(&s, 0, &sup()).unwrap().value;
        assert!((ns - 8.0 * n0).abs() < 1e-9 * ns);
        let n1 = norm_c(&phi, 1, &sup()).unwrap().value;
        assert!(n1 >= n0);
    }

    #[test]
    fn order_budget_errors() {
        let phi = build_moment_mollifier(2, 1.0).unwrap();
        assert!(matches!(norm_c(&phi, 13, &sup()), Err(Error::OrderBudget { .. })));
        let k = CompactSet::new(0.0, 0.0).unwrap();
        assert!(kernel_norm(&starred(&phi), &k, 7, &k, 6, &sup()).is_err());
    }

    #[test]
    fn kernel_norm_reduction_examples() {
        let phi = build_moment_mollifier(2, 1.0).unwrap();
        let kern = starred(&phi);
        let k = CompactSet::point(0.0).unwrap();
        let l = CompactSet::new(-1.0, 1.0).unwrap();
        let kn = kernel_norm(&kern, &k, 0, &l, 0, &sup()).unwrap();
        let n0 = norm_c(&phi, 0, &sup()).unwrap();
        assert!((kn.value - n0.value).abs() < 1e-12 * n0.value);
        let k2 = CompactSet::new(-0.3, 0.2).unwrap();
        let l2 = CompactSet::new(-0.5, 0.9).unwrap();
        let kn2 = kernel_norm(&kern, &k2, 1, &l2, 1, &sup()).unwrap();
        assert!(kn2.value <= norm_c(&phi, 2, &sup()).unwrap().value * (1.0 + 1e-6));
        assert!(kn2.stability_flag);
    }

    #[test]
    fn general_kernel_norm_matches_reduction() {
        let phi = scale(&build_moment_mollifier(2, 1.0).unwrap(), 0.25).unwrap();
        let kern = starred(&phi);
        let k = CompactSet::new(-0.5, 0.5).unwrap();
        let l = CompactSet::new(-1.0, 1.0).unwrap();
        let a = kernel_norm(&kern, &k, 1, &l, 1, &sup()).unwrap().value;
        let b = kernel_norm_general(&kern, &k, 1, &l, 1, &sup()).unwrap().value;
        assert!((a - b).abs() < 1e-3 * a, "{a} vs {b}");
    }

    #[test]
    fn defect_of_constant_family_is_zero() {
        let phi = scale(&build_moment_mollifier(4, 1.0).unwrap(), 0.5).unwrap();
        let fam = BoundedFamily::new(vec![SmoothFunction::constant(1.0)]).unwrap();
        let k = CompactSet::new(-1.0, 1.0).unwrap();
        let d = defect_norm(&starred(&phi), &k, 0, &fam, &sup().with_grid(101), &QuadConfig::precise()).unwrap();
        assert!(d.value < 1e-13, "{}", d.value);
    }

    #[test]
    fn defect_shrinks_with_eps() {
        let base = build_moment_mollifier(2, 1.0).unwrap();
        let fam = BoundedFamily::new(vec![SmoothFunction::sin()]).unwrap();
        let k = CompactSet::new(-1.0, 1.0).unwrap();
        let cfg = sup().with_grid(101);
        let d = |eps: f64| {
            defect_norm(&starred(&scale(&base, eps).unwrap()), &k, 0, &fam, &cfg, &QuadConfig::precise())
                .unwrap()
                .value
        };
        let (a, b) = (d(0.25), d(0.125));
        assert!(b < a / 8.0, "{a} {b}");
    }

    #[test]
    fn pospoly_examples() {
        let lam = PosPoly::y_power(0, 0, 2, 1.0).unwrap();
        assert_eq!(eval_pospoly(&lam, &[3.0], &[]).unwrap(), 9.0);
        let ideal = PosPoly::new(
            1,
            vec![Monomial { y_exp: vec![2, 1], z_exp: vec![0, 1], coeff: 0.5 }],
        )
        .unwrap();
        assert!(ideal.in_i() && !ideal.in_p());
        assert_eq!(eval_pospoly(&ideal, &[4.0, 2.0], &[0.0, 0.0]).unwrap(), 0.0);
        assert!(eval_pospoly(&lam, &[-1.0], &[]).is_err());
        assert!(eval_pospoly(&lam, &[1.0, 2.0], &[]).is_err());
        assert!(PosPoly::constant(0, -1.0).is_err());
    }

    #[test]
    fn pospoly_display() {
        let p = PosPoly::new(
            1,
            vec![
                Monomial { y_exp: vec![2, 0], z_exp: vec![0, 1], coeff: 3.0 },
                Monomial { y_exp: vec![0, 0], z_exp: vec![1, 0], coeff: 0.5 },
            ],
        )
        .unwrap();
        assert_eq!(p.to_string(), "3*y0^2*z1 + 0.5*z0");
    }
}
