//! Smooth real functions on the line, open domains and compact subsets.

pub(crate) mod jet;

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

/// Derivative budget assigned to catalog functions unless overridden.
pub const DEFAULT_MAX_ORDER: usize = 12;

/// Anything with interval endpoints.
pub trait Interval {
    fn lo(&self) -> f64;
    fn hi(&self) -> f64;
}

/// An open interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainRepr", into = "DomainRepr")]
pub struct Domain {
    lo: f64,
    hi: f64,
}

/// JSON form of a domain: `null` marks an infinite end.
#[derive(Serialize, Deserialize)]
struct DomainRepr {
    lo: Option<f64>,
    hi: Option<f64>,
}

impl From<Domain> for DomainRepr {
    fn from(d: Domain) -> Self {
        Self { lo: d.lo.is_finite().then_some(d.lo), hi: d.hi.is_finite().then_some(d.hi) }
    }
}

impl TryFrom<DomainRepr> for Domain {
    type Error = Error;
    fn try_from(r: DomainRepr) -> Result<Self> {
        Domain::new(r.lo.unwrap_or(f64::NEG_INFINITY), r.hi.unwrap_or(f64::INFINITY))
    }
}

impl Domain {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidParam(format!("domain ({lo}, {hi}) needs lo < hi")));
        }
        Ok(Self { lo, hi })
    }

    pub fn real_line() -> Self {
        Self { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn dimension(&self) -> usize {
        1
    }

    pub fn intersect(&self, other: &Domain) -> Result<Domain> {
        Domain::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }
}

impl Default for Domain {
    fn default() -> Self {
        Self::real_line()
    }
}

impl Interval for Domain {
    fn lo(&self) -> f64 {
        self.lo
    }
    fn hi(&self) -> f64 {
        self.hi
    }
}

/// A closed bounded interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompactSet {
    lo: f64,
    hi: f64,
}

impl CompactSet {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !lo.is_finite() || !hi.is_finite() || lo > hi {
            return Err(Error::InvalidParam(format!("compact set [{lo}, {hi}] needs finite lo <= hi")));
        }
        Ok(Self { lo, hi })
    }

    pub fn point(x: f64) -> Result<Self> {
        Self::new(x, x)
    }

    /// Lebesgue measure.
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn enlarge(&self, by: f64) -> Self {
        Self { lo: self.lo - by, hi: self.hi + by }
    }

    pub fn shifted(&self, by: f64) -> Self {
        Self { lo: self.lo + by, hi: self.hi + by }
    }

    pub fn intersect(&self, other: &CompactSet) -> Option<CompactSet> {
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(CompactSet { lo, hi })
    }

    pub fn hull(&self, other: &CompactSet) -> CompactSet {
        CompactSet { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

impl Interval for CompactSet {
    fn lo(&self) -> f64 {
        self.lo
    }
    fn hi(&self) -> f64 {
        self.hi
    }
}

/// `K ⋐ L`: strict inclusion of the endpoints.
pub fn compactly_contained<L: Interval>(k: &CompactSet, l: &L) -> bool {
    k.lo > l.lo() && k.hi < l.hi()
}

/// The closed catalog of smooth functions. Every variant has closed-form
/// derivatives of all orders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "fn", rename_all = "snake_case")]
pub enum SmoothKind {
    Poly { coeffs: Vec<f64> },
    Sin,
    Cos,
    Exp,
    Bump { radius: f64 },
    Plateau { a: f64, b: f64, delta: f64 },
    Sum { left: Box<SmoothFunction>, right: Box<SmoothFunction> },
    Product { left: Box<SmoothFunction>, right: Box<SmoothFunction> },
    /// `x -> f(x - shift)`
    Translate { f: Box<SmoothFunction>, shift: f64 },
    /// `x -> f(x / factor)`
    Dilate { f: Box<SmoothFunction>, factor: f64 },
}

/// A real function on the line with analytic derivatives up to `max_order`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothFunction {
    kind: SmoothKind,
    max_order: usize,
}

impl SmoothFunction {
    fn leaf(kind: SmoothKind) -> Self {
        Self { kind, max_order: DEFAULT_MAX_ORDER }
    }

    pub fn poly(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidParam("poly needs at least one finite coefficient".into()));
        }
        Ok(Self::leaf(SmoothKind::Poly { coeffs }))
    }

    pub fn constant(c: f64) -> Self {
        Self::leaf(SmoothKind::Poly { coeffs: vec![c] })
    }

    pub fn sin() -> Self {
        Self::leaf(SmoothKind::Sin)
    }

    pub fn cos() -> Self {
        Self::leaf(SmoothKind::Cos)
    }

    pub fn exp() -> Self {
        Self::leaf(SmoothKind::Exp)
    }

    /// `exp(-1/(1-(x/r)^2))` on `(-r, r)`, zero elsewhere.
    pub fn bump(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParam(format!("bump radius must be positive, got {radius}")));
        }
        Ok(Self::leaf(SmoothKind::Bump { radius }))
    }

    /// Identically one on `[a, b]`, supported in `[a - delta, b + delta]`.
    pub fn plateau(a: f64, b: f64, delta: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a <= b) {
            return Err(Error::InvalidParam(format!("plateau needs a <= b, got [{a}, {b}]")));
        }
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParam(format!("plateau margin must be positive, got {delta}")));
        }
        Ok(Self::leaf(SmoothKind::Plateau { a, b, delta }))
    }

    pub fn sum(left: SmoothFunction, right: SmoothFunction) -> Self {
        let max_order = left.max_order.min(right.max_order);
        Self { kind: SmoothKind::Sum { left: Box::new(left), right: Box::new(right) }, max_order }
    }

    pub fn product(left: SmoothFunction, right: SmoothFunction) -> Self {
        let max_order = left.max_order.min(right.max_order);
        Self { kind: SmoothKind::Product { left: Box::new(left), right: Box::new(right) }, max_order }
    }

    pub fn translate(f: SmoothFunction, shift: f64) -> Result<Self> {
        if !shift.is_finite() {
            return Err(Error::InvalidParam("translation must be finite".into()));
        }
        let max_order = f.max_order;
        Ok(Self { kind: SmoothKind::Translate { f: Box::new(f), shift }, max_order })
    }

    pub fn dilate(f: SmoothFunction, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidParam(format!("dilation factor must be positive, got {factor}")));
        }
        let max_order = f.max_order;
        Ok(Self { kind: SmoothKind::Dilate { f: Box::new(f), factor }, max_order })
    }

    /// Overrides the derivative budget.
    pub fn with_max_order(mut self, max_order: usize) -> Self {
        self.max_order = max_order;
        self
    }

    pub fn kind(&self) -> &SmoothKind {
        &self.kind
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    /// Declared compact support, if any.
    pub fn support(&self) -> Option<CompactSet> {
        match &self.kind {
            SmoothKind::Poly { .. } | SmoothKind::Sin | SmoothKind::Cos | SmoothKind::Exp => None,
            SmoothKind::Bump { radius } => Some(CompactSet { lo: -radius, hi: *radius }),
            SmoothKind::Plateau { a, b, delta } => Some(CompactSet { lo: a - delta, hi: b + delta }),
            SmoothKind::Sum { left, right } => match (left.support(), right.support()) {
                (Some(l), Some(r)) => Some(l.hull(&r)),
                _ => None,
            },
            SmoothKind::Product { left, right } => match (left.support(), right.support()) {
                (Some(l), Some(r)) => Some(l.intersect(&r).unwrap_or(CompactSet { lo: l.lo, hi: l.lo })),
                (Some(s), None) | (None, Some(s)) => Some(s),
                (None, None) => None,
            },
            SmoothKind::Translate { f, shift } => {
                f.support().map(|s| CompactSet { lo: s.lo + shift, hi: s.hi + shift })
            }
            SmoothKind::Dilate { f, factor } => {
                f.support().map(|s| CompactSet { lo: s.lo * factor, hi: s.hi * factor })
            }
        }
    }

    fn check_order(&self, order: usize) -> Result<()> {
        if order > self.max_order {
            return Err(Error::OrderBudget { requested: order, budget: self.max_order });
        }
        Ok(())
    }

    /// `f^(order)(x)`.
    pub fn derivative(&self, x: f64, order: usize) -> Result<f64> {
        self.check_order(order)?;
        if self.outside_support(x) {
            return Ok(0.0);
        }
        Ok(self.taylor(x, order)[order] * jet::factorial(order))
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        self.derivative(x, 0)
    }

    /// `[f(x), f'(x), ..., f^(n)(x)]`.
    pub fn derivatives(&self, x: f64, n: usize) -> Result<Vec<f64>> {
        self.check_order(n)?;
        if self.outside_support(x) {
            return Ok(vec![0.0; n + 1]);
        }
        Ok(jet::to_derivatives(self.taylor(x, n)))
    }

    /// Derivative without the budget check, for inner loops that validated the
    /// order once up front.
    pub(crate) fn derivative_raw(&self, x: f64, order: usize) -> f64 {
        if self.outside_support(x) {
            return 0.0;
        }
        self.taylor(x, order)[order] * jet::factorial(order)
    }

    fn outside_support(&self, x: f64) -> bool {
        self.support().is_some_and(|s| x < s.lo || x > s.hi)
    }

    /// Normalized Taylor coefficients at `x` up to order `n`, ignoring the budget.
    pub(crate) fn taylor(&self, x: f64, n: usize) -> Vec<f64> {
        match &self.kind {
            SmoothKind::Poly { coeffs } => jet::poly(coeffs, x, n),
            SmoothKind::Sin => trig(x, n, 0),
            SmoothKind::Cos => trig(x, n, 1),
            SmoothKind::Exp => {
                let e = x.exp();
                (0..=n).map(|k| e / jet::factorial(k)).collect()
            }
            SmoothKind::Bump { radius } => jet::bump(*radius, x, n),
            SmoothKind::Plateau { a, b, delta } => {
                let rise = jet::rescale(smoothstep_taylor((x - a + delta) / delta, n), 1.0 / delta);
                let fall = jet::rescale(smoothstep_taylor((b + delta - x) / delta, n), -1.0 / delta);
                jet::mul(&rise, &fall)
            }
            SmoothKind::Sum { left, right } => jet::add(&left.taylor(x, n), &right.taylor(x, n)),
            SmoothKind::Product { left, right } => jet::mul(&left.taylor(x, n), &right.taylor(x, n)),
            SmoothKind::Translate { f, shift } => f.taylor(x - shift, n),
            SmoothKind::Dilate { f, factor } => jet::rescale(f.taylor(x / factor, n), 1.0 / factor),
        }
    }

    /// Short human-readable name used in reports.
    pub fn label(&self) -> String {
        match &self.kind {
            SmoothKind::Poly { coeffs } => {
                let c: Vec<String> = coeffs.iter().map(|c| format!("{c}")).collect();
                format!("poly({})", c.join(","))
            }
            SmoothKind::Sin => "sin".into(),
            SmoothKind::Cos => "cos".into(),
            SmoothKind::Exp => "exp".into(),
            SmoothKind::Bump { radius } => format!("bump({radius})"),
            SmoothKind::Plateau { a, b, delta } => format!("plateau({a},{b},{delta})"),
            SmoothKind::Sum { left, right } => format!("sum({},{})", left.label(), right.label()),
            SmoothKind::Product { left, right } => format!("product({},{})", left.label(), right.label()),
            SmoothKind::Translate { f, shift } => format!("translate({},{shift})", f.label()),
            SmoothKind::Dilate { f, factor } => format!("dilate({},{factor})", f.label()),
        }
    }
}

/// Builds a catalog function by name.
///
/// `params` carries the numeric parameters, `args` the function arguments of
/// the combinators (`sum`, `product`, `translate`, `dilate`).
pub fn catalog(name: &str, params: &[f64], args: Vec<SmoothFunction>) -> Result<SmoothFunction> {
    let n_args = args.len();
    let arity = |np: usize, na: usize| -> Result<()> {
        if params.len() != np || n_args != na {
            return Err(Error::InvalidParam(format!(
                "{name} takes {np} numeric and {na} function arguments, got {} and {}",
                params.len(),
                n_args
            )));
        }
        Ok(())
    };
    let mut args = args.into_iter();
    match name {
        "poly" => {
            if n_args != 0 {
                return Err(Error::InvalidParam("poly takes no function arguments".into()));
            }
            SmoothFunction::poly(params.to_vec())
        }
        "sin" => arity(0, 0).map(|_| SmoothFunction::sin()),
        "cos" => arity(0, 0).map(|_| SmoothFunction::cos()),
        "exp" => arity(0, 0).map(|_| SmoothFunction::exp()),
        "bump" => {
            arity(1, 0)?;
            SmoothFunction::bump(params[0])
        }
        "plateau" => {
            arity(3, 0)?;
            SmoothFunction::plateau(params[0], params[1], params[2])
        }
        "sum" | "product" => {
            arity(0, 2)?;
            let (l, r) = (args.next().unwrap(), args.next().unwrap());
            Ok(if name == "sum" { SmoothFunction::sum(l, r) } else { SmoothFunction::product(l, r) })
        }
        "translate" => {
            arity(1, 1)?;
            SmoothFunction::translate(args.next().unwrap(), params[0])
        }
        "dilate" => {
            arity(1, 1)?;
            SmoothFunction::dilate(args.next().unwrap(), params[0])
        }
        other => Err(Error::UnknownFunction(other.to_string())),
    }
}

fn trig(x: f64, n: usize, phase: usize) -> Vec<f64> {
    let (s, c) = x.sin_cos();
    (0..=n)
        .map(|k| {
            let v = match (k + phase) % 4 {
                0 => s,
                1 => c,
                2 => -s,
                _ => -c,
            };
            v / jet::factorial(k)
        })
        .collect()
}

// Smoothstep: normalized integral of the bump on [0, 1].

fn unit_bump(t: f64) -> f64 {
    let u = 2.0 * t - 1.0;
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

fn bump_integral_from_zero(s: f64) -> f64 {
    const PANELS: usize = 8;
    let (nodes, weights) = gauss_legendre(20);
    let h = s / PANELS as f64;
    let mut acc = 0.0;
    for p in 0..PANELS {
        let mid = (p as f64 + 0.5) * h;
        for (t, w) in nodes.iter().zip(weights.iter()) {
            acc += w * unit_bump(mid + 0.5 * h * t);
        }
    }
    acc * 0.5 * h
}

fn smoothstep_norm() -> f64 {
    static NORM: OnceLock<f64> = OnceLock::new();
    *NORM.get_or_init(|| 2.0 * bump_integral_from_zero(0.5))
}

fn smoothstep_value(s: f64) -> f64 {
    if s <= 0.0 {
        0.0
    } else if s >= 1.0 {
        1.0
    } else if s <= 0.5 {
        bump_integral_from_zero(s) / smoothstep_norm()
    } else {
        1.0 - bump_integral_from_zero(1.0 - s) / smoothstep_norm()
    }
}

fn smoothstep_taylor(s: f64, n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    out[0] = smoothstep_value(s);
    if n == 0 || s <= 0.0 || s >= 1.0 {
        return out;
    }
    // S^(k) = beta^(k-1) / Z, beta(t) = bump_1(2t - 1)
    let beta = jet::rescale(jet::bump(1.0, 2.0 * s - 1.0, n - 1), 2.0);
    let z = smoothstep_norm();
    for k in 1..=n {
        out[k] = beta[k - 1] / (z * k as f64);
    }
    out
}
