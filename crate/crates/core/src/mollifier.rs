//! Mollifiers with vanishing moments, their ε-scaling, and the convolution
//! kernel `φ*(x)(y) = φ(y - x)`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::funcspace::{CompactSet, Domain, Interval, SmoothFunction};
use crate::quadrature::{integrate_fn, QuadConfig};

/// Largest moment order that fits the derivative budget of the catalog.
pub const MAX_MOMENT_ORDER: usize = 12;

const CONDITION_LIMIT: f64 = 1e12;

/// A smoothly parametrized family of test functions `x -> k(x)(·)`.
pub trait Kernel: Send + Sync + fmt::Debug {
    /// `∂_x^dx ∂_y^dy k(x)(y)`.
    fn value(&self, x: f64, y: f64, dx: usize, dy: usize) -> f64;
    /// A compact interval containing `supp k(x)`.
    fn y_support(&self, x: f64) -> CompactSet;
    /// Budget for `dx + dy`.
    fn max_order(&self) -> usize;
}

/// `φ(x) = p(x²)·bump_r(x)` with unit integral and vanishing moments `1..=q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MollifierRepr", into = "MollifierRepr")]
pub struct Mollifier {
    q: usize,
    radius: f64,
    coefficients: Vec<f64>,
    unit_integral: bool,
    func: SmoothFunction,
}

#[derive(Serialize, Deserialize)]
struct MollifierRepr {
    q: usize,
    radius: f64,
    coefficients: Vec<f64>,
}

impl From<Mollifier> for MollifierRepr {
    fn from(m: Mollifier) -> Self {
        Self { q: m.q, radius: m.radius, coefficients: m.coefficients }
    }
}

impl TryFrom<MollifierRepr> for Mollifier {
    type Error = Error;
    fn try_from(r: MollifierRepr) -> Result<Self> {
        Mollifier::from_parts(r.q, r.radius, r.coefficients)
    }
}

impl Mollifier {
    /// Rebuilds a mollifier from its even-polynomial coefficients.
    pub fn from_parts(q: usize, radius: f64, coefficients: Vec<f64>) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParam(format!("mollifier radius must be positive, got {radius}")));
        }
        if coefficients.is_empty() {
            return Err(Error::InvalidParam("mollifier needs at least one coefficient".into()));
        }
        let mut expanded = vec![0.0; 2 * coefficients.len() - 1];
        for (i, c) in coefficients.iter().enumerate() {
            expanded[2 * i] = *c;
        }
        let func = SmoothFunction::product(SmoothFunction::poly(expanded)?, SmoothFunction::bump(radius)?);
        let mut m = Self { q, radius, coefficients, unit_integral: false, func };
        let mass = m.moment(0, &QuadConfig::precise())?;
        m.unit_integral = (mass - 1.0).abs() <= 1e-8;
        Ok(m)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    /// Coefficients of `p` in powers of `x²`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn unit_integral(&self) -> bool {
        self.unit_integral
    }

    pub fn func(&self) -> &SmoothFunction {
        &self.func
    }

    pub fn support(&self) -> CompactSet {
        CompactSet::new(-self.radius, self.radius).expect("radius is positive")
    }

    pub fn value(&self, t: f64) -> f64 {
        self.func.derivative_raw(t, 0)
    }

    /// `φ^(order)(t)`.
    pub fn derivative(&self, t: f64, order: usize) -> Result<f64> {
        self.func.derivative(t, order)
    }

    /// `∫ t^j φ(t) dt`.
    pub fn moment(&self, j: usize, cfg: &QuadConfig) -> Result<f64> {
        let r = self.radius;
        let res = integrate_fn(|t| t.powi(j as i32) * self.value(t), -r, r, &[-0.5 * r, 0.0, 0.5 * r], cfg)?;
        Ok(res.value)
    }

    /// `|∫ t^j φ - δ_{j0}|` for `j = 0..=q`.
    pub fn moment_residuals(&self, cfg: &QuadConfig) -> Result<Vec<f64>> {
        (0..=self.q)
            .map(|j| {
                let target = if j == 0 { 1.0 } else { 0.0 };
                self.moment(j, cfg).map(|m| (m - target).abs())
            })
            .collect()
    }

    /// Antiderivative tail `∫_s^∞ φ`.
    pub fn tail_integral(&self, s: f64, cfg: &QuadConfig) -> Result<f64> {
        let r = self.radius;
        if s <= -r {
            return Ok(1.0);
        }
        if s >= r {
            return Ok(0.0);
        }
        let breaks: Vec<f64> = [-0.5 * r, 0.0, 0.5 * r].into_iter().filter(|&b| b > s).collect();
        Ok(integrate_fn(|t| self.value(t), s, r, &breaks, cfg)?.value)
    }
}

/// Solves the even moment system for `p` of degree `⌊q/2⌋` in `x²`.
pub fn build_moment_mollifier(q: usize, radius: f64) -> Result<Mollifier> {
    if q > MAX_MOMENT_ORDER {
        return Err(Error::InvalidParam(format!(
            "moment order {q} exceeds the derivative budget {MAX_MOMENT_ORDER}"
        )));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::InvalidParam(format!("mollifier radius must be positive, got {radius}")));
    }
    let n = q / 2 + 1;
    let bump = SmoothFunction::bump(radius)?;
    let cfg = QuadConfig::precise();
    let even_moments: Vec<f64> = (0..2 * n - 1)
        .map(|k| {
            integrate_fn(
                |t| t.powi(2 * k as i32) * bump.derivative_raw(t, 0),
                -radius,
                radius,
                &[-0.5 * radius, 0.0, 0.5 * radius],
                &cfg,
            )
            .map(|r| r.value)
        })
        .collect::<Result<_>>()?;
    let matrix = DMatrix::from_fn(n, n, |i, j| even_moments[i + j]);
    let condition = condition_estimate(&matrix);
    if !(condition <= CONDITION_LIMIT) {
        return Err(Error::Construction { q, condition });
    }
    let rhs = DVector::from_fn(n, |i, _| if i == 0 { 1.0 } else { 0.0 });
    let coefficients = matrix
        .lu()
        .solve(&rhs)
        .filter(|x| x.iter().all(|v| v.is_finite()))
        .ok_or(Error::Construction { q, condition: f64::INFINITY })?;
    Mollifier::from_parts(q, radius, coefficients.iter().copied().collect())
}

/// `S_ε φ (t) = ε^{-1} φ(t/ε)`.
pub fn scale(phi: &Mollifier, eps: f64) -> Result<Mollifier> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParam(format!("scale factor must lie in (0, 1], got {eps}")));
    }
    let mut factor = 1.0 / eps;
    let inv_sq = 1.0 / (eps * eps);
    let coefficients = phi
        .coefficients
        .iter()
        .map(|c| {
            let v = c * factor;
            factor *= inv_sq;
            v
        })
        .collect::<Vec<_>>();
    let mut expanded = vec![0.0; 2 * coefficients.len() - 1];
    for (i, c) in coefficients.iter().enumerate() {
        expanded[2 * i] = *c;
    }
    let radius = phi.radius * eps;
    let func = SmoothFunction::product(SmoothFunction::poly(expanded)?, SmoothFunction::bump(radius)?);
    Ok(Mollifier { q: phi.q, radius, coefficients, unit_integral: phi.unit_integral, func })
}

/// `φ*(x)(y) = φ(y - x)` together with its mixed partials.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvKernel {
    base: Mollifier,
}

pub fn starred(phi: &Mollifier) -> ConvKernel {
    ConvKernel { base: phi.clone() }
}

impl ConvKernel {
    pub fn base(&self) -> &Mollifier {
        &self.base
    }

    /// `∂_x^α ∂_y^β φ(y - x) = (-1)^α φ^(α+β)(y - x)`.
    pub fn accessor(&self, x: f64, y: f64, alpha: usize, beta: usize) -> Result<f64> {
        let d = self.base.derivative(y - x, alpha + beta)?;
        Ok(if alpha % 2 == 0 { d } else { -d })
    }
}

impl Kernel for ConvKernel {
    fn value(&self, x: f64, y: f64, dx: usize, dy: usize) -> f64 {
        let d = self.base.func.derivative_raw(y - x, dx + dy);
        if dx % 2 == 0 {
            d
        } else {
            -d
        }
    }

    fn y_support(&self, x: f64) -> CompactSet {
        self.base.support().shifted(x)
    }

    fn max_order(&self) -> usize {
        self.base.func.max_order()
    }
}

/// `supp φ + x ⊂ Ω`.
pub fn admissible(phi: &Mollifier, x: f64, domain: &Domain) -> bool {
    x - phi.radius > domain.lo() && x + phi.radius < domain.hi()
}

/// 1-norm condition number of the moment matrix.
fn condition_estimate(a: &DMatrix<f64>) -> f64 {
    match a.clone().try_inverse() {
        Some(inv) => column_norm1(a) * column_norm1(&inv),
        None => f64::INFINITY,
    }
}

fn column_norm1(m: &DMatrix<f64>) -> f64 {
    m.column_iter().map(|c| c.lp_norm(1)).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q0_is_normalized_bump() {
        let phi = build_moment_mollifier(0, 1.0).unwrap();
        assert_eq!(phi.coefficients().len(), 1);
        assert!((phi.coefficients()[0] - 1.0 / 0.443_993_816_168_079_4).abs() < 1e-9);
        assert!(phi.unit_integral());
    }

    #[test]
    fn odd_q_reuses_even_system() {
        let a = build_moment_mollifier(2, 1.0).unwrap();
        let b = build_moment_mollifier(3, 1.0).unwrap();
        assert_eq!(a.coefficients(), b.coefficients());
        assert_eq!(b.q(), 3);
        let third = b.moment(3, &QuadConfig::precise()).unwrap();
        assert!(third.abs() < 1e-15);
    }

    #[test]
    fn budget_and_radius_checked() {
        assert!(build_moment_mollifier(13, 1.0).is_err());
        assert!(build_moment_mollifier(2, 0.0).is_err());
    }

    #[test]
    fn scaling_examples() {
        let phi = build_moment_mollifier(2, 1.0).unwrap();
        let same = scale(&phi, 1.0).unwrap();
        for t in [-0.7, -0.1, 0.0, 0.33, 0.9] {
            assert_eq!(same.value(t), phi.value(t));
        }
        let eps = 0.125;
        let s = scale(&phi, eps).unwrap();
        assert_eq!(s.radius(), eps);
        assert!((s.value(0.0) - phi.value(0.0) / eps).abs() < 1e-13 * phi.value(0.0) / eps);
        let m0 = s.moment(0, &QuadConfig::precise()).unwrap();
        assert!((m0 - 1.0).abs() < 1e-12);
        assert!(scale(&phi, 0.0).is_err());
        assert!(scale(&phi, 1.5).is_err());
    }

    #[test]
    fn starred_accessor_signs() {
        let phi = build_moment_mollifier(2, 1.0).unwrap();
        let k = starred(&phi);
        let (x, y) = (0.1, 0.35);
        assert_eq!(k.accessor(0.0, 0.5, 0, 0).unwrap(), phi.value(0.5));
        assert_eq!(k.accessor(x, y, 1, 0).unwrap(), -phi.derivative(y - x, 1).unwrap());
        assert_eq!(k.accessor(x, y, 1, 1).unwrap(), -phi.derivative(y - x, 2).unwrap());
        assert_eq!(k.accessor(x, y, 0, 2).unwrap(), k.value(x, y, 0, 2));
    }

    #[test]
    fn admissibility_examples() {
        let phi = scale(&build_moment_mollifier(0, 1.0).unwrap(), 0.1).unwrap();
        let omega = Domain::new(-1.0, 1.0).unwrap();
        assert!(admissible(&phi, 0.0, &omega));
        assert!(!admissible(&phi, 0.95, &omega));
        let wide = build_moment_mollifier(0, 2.0).unwrap();
        assert!(admissible(&wide, 0.0, &Domain::real_line()));
    }

    #[test]
    fn json_round_trip_is_bit_exact() {
        let phi = build_moment_mollifier(6, 0.8).unwrap();
        let s = serde_json::to_string(&phi).unwrap();
        let back: Mollifier = serde_json::from_str(&s).unwrap();
        assert_eq!(back.coefficients().len(), phi.coefficients().len());
        for (a, b) in back.coefficients().iter().zip(phi.coefficients()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        assert_eq!(back, phi);
    }
}
