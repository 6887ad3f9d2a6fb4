//! Representatives `R(φ, x)` of the elementary basic space as expression
//! trees, with evaluation, the derivations `D` and `D̂_X`, and exact
//! multilinear differentials.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::distribution::{pair_kernel, pair_translated, Distribution};
use crate::error::{Error, Result};
use crate::funcspace::jet::{binomial, factorial};
use crate::funcspace::{CompactSet, Domain, SmoothFunction};
use crate::mollifier::{Kernel, Mollifier};
use crate::quadrature::QuadConfig;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum Node {
    Embed { u: Distribution },
    Sigma { f: SmoothFunction },
    Const { value: f64 },
    Sum { left: Box<Node>, right: Box<Node> },
    Product { left: Box<Node>, right: Box<Node> },
    Scale { factor: f64, child: Box<Node> },
    PartialD { child: Box<Node> },
    HatD { field: SmoothFunction, child: Box<Node> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Representative {
    node: Node,
    #[serde(default)]
    domain: Domain,
}

impl Representative {
    /// `ι(u)`.
    pub fn embed(u: Distribution) -> Self {
        let domain = *u.domain();
        Self { node: Node::Embed { u }, domain }
    }

    /// `σ(f)`.
    pub fn sigma(f: SmoothFunction) -> Self {
        Self { node: Node::Sigma { f }, domain: Domain::real_line() }
    }

    pub fn constant(value: f64) -> Self {
        Self { node: Node::Const { value }, domain: Domain::real_line() }
    }

    pub fn sum(left: Representative, right: Representative) -> Result<Self> {
        let domain = left.domain.intersect(&right.domain)?;
        Ok(Self { node: Node::Sum { left: Box::new(left.node), right: Box::new(right.node) }, domain })
    }

    /// `left + (-1)·right`.
    pub fn sub(left: Representative, right: Representative) -> Result<Self> {
        Self::sum(left, right.scale(-1.0))
    }

    pub fn product(left: Representative, right: Representative) -> Result<Self> {
        let domain = left.domain.intersect(&right.domain)?;
        Ok(Self { node: Node::Product { left: Box::new(left.node), right: Box::new(right.node) }, domain })
    }

    pub fn scale(self, factor: f64) -> Self {
        Self { node: Node::Scale { factor, child: Box::new(self.node) }, domain: self.domain }
    }

    /// `D R`, differentiation in the point variable.
    pub fn partial(self) -> Self {
        Self { node: Node::PartialD { child: Box::new(self.node) }, domain: self.domain }
    }

    /// `D̂_X R`.
    pub fn hat_d(self, field: SmoothFunction) -> Self {
        Self { node: Node::HatD { field, child: Box::new(self.node) }, domain: self.domain }
    }

    /// Rebuilds a representative from a bare tree, checking that every
    /// embedded distribution is compatible with `domain`.
    pub fn from_node(node: Node, domain: Domain) -> Result<Self> {
        let r = Self { node, domain };
        for x0 in r.singular_points() {
            if !domain.contains(x0) {
                return Err(Error::Domain(format!("singular point {x0} lies outside the domain")));
            }
        }
        Ok(r)
    }

    pub fn node(&self) -> &Node {
        &self.node
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    /// Singular points of all embedded distributions, sorted and deduplicated.
    pub fn singular_points(&self) -> Vec<f64> {
        fn walk(n: &Node, out: &mut Vec<f64>) {
            match n {
                Node::Embed { u } => out.extend(u.singular_point()),
                Node::Sigma { .. } | Node::Const { .. } => {}
                Node::Sum { left, right } | Node::Product { left, right } => {
                    walk(left, out);
                    walk(right, out);
                }
                Node::Scale { child, .. } | Node::PartialD { child } | Node::HatD { child, .. } => walk(child, out),
            }
        }
        let mut out = Vec::new();
        walk(&self.node, &mut out);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        fn count(n: &Node) -> usize {
            match n {
                Node::Embed { .. } | Node::Sigma { .. } | Node::Const { .. } => 1,
                Node::Sum { left, right } | Node::Product { left, right } => 1 + count(left) + count(right),
                Node::Scale { child, .. } | Node::PartialD { child } | Node::HatD { child, .. } => 1 + count(child),
            }
        }
        count(&self.node)
    }
}

/// The smoothing argument a representative is evaluated on.
#[derive(Debug, Clone)]
pub enum KernelArg {
    /// `φ*(x)(y) = φ(y - x)`.
    Conv(Mollifier),
    General(Arc<dyn Kernel>),
    /// A finite linear combination; pairings act termwise.
    Combination(Vec<(f64, KernelArg)>),
}

impl KernelArg {
    pub fn sum(args: &[&KernelArg]) -> KernelArg {
        KernelArg::Combination(args.iter().map(|a| (1.0, (*a).clone())).collect())
    }
}

impl Kernel for KernelArg {
    fn value(&self, x: f64, y: f64, dx: usize, dy: usize) -> f64 {
        match self {
            KernelArg::Conv(phi) => {
                let d = phi.func().derivative_raw(y - x, dx + dy);
                if dx % 2 == 0 {
                    d
                } else {
                    -d
                }
            }
            KernelArg::General(k) => k.value(x, y, dx, dy),
            KernelArg::Combination(terms) => terms.iter().map(|(c, k)| c * k.value(x, y, dx, dy)).sum(),
        }
    }

    fn y_support(&self, x: f64) -> CompactSet {
        match self {
            KernelArg::Conv(phi) => phi.support().shifted(x),
            KernelArg::General(k) => k.y_support(x),
            KernelArg::Combination(terms) => {
                let mut it = terms.iter().map(|(_, k)| k.y_support(x));
                let first = it.next().unwrap_or_else(|| CompactSet::point(x).expect("finite point"));
                it.fold(first, |a, b| a.hull(&b))
            }
        }
    }

    fn max_order(&self) -> usize {
        match self {
            KernelArg::Conv(phi) => phi.func().max_order(),
            KernelArg::General(k) => k.max_order(),
            KernelArg::Combination(terms) => terms.iter().map(|(_, k)| k.max_order()).min().unwrap_or(usize::MAX),
        }
    }
}

/// `D^SK_X φ⃗`: `X(x)∂_x k + X(y)∂_y k + X'(y) k`.
#[derive(Debug, Clone)]
struct SkKernel {
    base: KernelArg,
    field: SmoothFunction,
}

impl Kernel for SkKernel {
    fn value(&self, x: f64, y: f64, dx: usize, dy: usize) -> f64 {
        let k = |a, b| self.base.value(x, y, a, b);
        let xf = |t: f64, j| self.field.derivative_raw(t, j);
        let mut s = 0.0;
        for i in 0..=dx {
            s += binomial(dx, i) * xf(x, i) * k(dx - i + 1, dy);
        }
        for i in 0..=dy {
            s += binomial(dy, i) * (xf(y, i) * k(dx, dy - i + 1) + xf(y, i + 1) * k(dx, dy - i));
        }
        s
    }

    fn y_support(&self, x: f64) -> CompactSet {
        self.base.y_support(x)
    }

    fn max_order(&self) -> usize {
        self.base.max_order().saturating_sub(1).min(self.field.max_order().saturating_sub(1))
    }
}

fn pair_leaf(u: &Distribution, arg: &KernelArg, x: f64, order: usize, quad: &QuadConfig) -> Result<f64> {
    match arg {
        KernelArg::Conv(phi) => pair_translated(u, phi, x, order, quad),
        KernelArg::General(k) => pair_kernel(u, k.as_ref(), x, order, quad),
        KernelArg::Combination(terms) => terms
            .iter()
            .try_fold(0.0, |acc, (c, k)| Ok(acc + c * pair_leaf(u, k, x, order, quad)?)),
    }
}

/// `∂_x^order d^k R(base)(dirs)(x)`; `dirs` empty is plain evaluation.
fn diff(n: &Node, base: &KernelArg, dirs: &[&KernelArg], x: f64, order: usize, quad: &QuadConfig) -> Result<f64> {
    match n {
        Node::Embed { u } => match dirs {
            [] => pair_leaf(u, base, x, order, quad),
            [d] => pair_leaf(u, d, x, order, quad),
            _ => Ok(0.0),
        },
        Node::Sigma { f } => {
            if dirs.is_empty() {
                f.derivative(x, order)
            } else {
                Ok(0.0)
            }
        }
        Node::Const { value } => Ok(if dirs.is_empty() && order == 0 { *value } else { 0.0 }),
        Node::Sum { left, right } => {
            Ok(diff(left, base, dirs, x, order, quad)? + diff(right, base, dirs, x, order, quad)?)
        }
        Node::Scale { factor, child } => Ok(factor * diff(child, base, dirs, x, order, quad)?),
        Node::PartialD { child } => diff(child, base, dirs, x, order + 1, quad),
        Node::Product { left, right } => {
            let k = dirs.len();
            let mut total = 0.0;
            for mask in 0u32..(1 << k) {
                let (ld, rd): (Vec<&KernelArg>, Vec<&KernelArg>) = {
                    let mut l = Vec::new();
                    let mut r = Vec::new();
                    for (i, d) in dirs.iter().enumerate() {
                        if mask & (1 << i) != 0 {
                            l.push(*d);
                        } else {
                            r.push(*d);
                        }
                    }
                    (l, r)
                };
                for i in 0..=order {
                    let a = diff(left, base, &ld, x, i, quad)?;
                    if a == 0.0 {
                        continue;
                    }
                    total += binomial(order, i) * a * diff(right, base, &rd, x, order - i, quad)?;
                }
            }
            Ok(total)
        }
        Node::HatD { field, child } => {
            if !dirs.is_empty() {
                return Err(Error::Unsupported("differentials of hat-derivative nodes".into()));
            }
            if field.max_order() < 2 {
                return Err(Error::OrderBudget { requested: 2, budget: field.max_order() });
            }
            let sk = KernelArg::General(Arc::new(SkKernel { base: base.clone(), field: field.clone() }));
            let mut v = -diff(child, base, &[&sk], x, order, quad)?;
            for i in 0..=order {
                let xi = field.derivative(x, i)?;
                if xi != 0.0 {
                    v += binomial(order, i) * xi * diff(child, base, &[], x, order - i + 1, quad)?;
                }
            }
            Ok(v)
        }
    }
}

fn eval_quad() -> QuadConfig {
    QuadConfig::precise()
}

/// `∂_x^order R(arg)(x)`.
pub fn eval(r: &Representative, arg: &KernelArg, x: f64, order: usize) -> Result<f64> {
    eval_with(r, arg, x, order, &eval_quad())
}

pub fn eval_with(r: &Representative, arg: &KernelArg, x: f64, order: usize, quad: &QuadConfig) -> Result<f64> {
    if !r.domain.contains(x) {
        return Err(Error::Domain(format!("x = {x} lies outside the domain")));
    }
    diff(&r.node, arg, &[], x, order, quad)
}

/// `(∂_x^j R(arg)(x))_{j ≤ order}`.
pub fn eval_all(r: &Representative, arg: &KernelArg, x: f64, order: usize) -> Result<Vec<f64>> {
    (0..=order).map(|j| eval(r, arg, x, j)).collect()
}

/// `(D̂_X R)(arg)(x)`.
pub fn hatd_eval(r: &Representative, field: &SmoothFunction, arg: &KernelArg, x: f64) -> Result<f64> {
    eval(&r.clone().hat_d(field.clone()), arg, x, 0)
}

/// `d^k R(φ0)(dirs)(x)`.
pub fn differential(r: &Representative, phi0: &KernelArg, dirs: &[KernelArg], x: f64) -> Result<f64> {
    differential_order(r, phi0, dirs, x, 0)
}

pub fn differential_order(r: &Representative, phi0: &KernelArg, dirs: &[KernelArg], x: f64, order: usize) -> Result<f64> {
    if dirs.is_empty() {
        return Err(Error::InvalidParam("differential needs at least one direction".into()));
    }
    if !r.domain.contains(x) {
        return Err(Error::Domain(format!("x = {x} lies outside the domain")));
    }
    let refs: Vec<&KernelArg> = dirs.iter().collect();
    diff(&r.node, phi0, &refs, x, order, &eval_quad())
}

/// Maximal number of directions accepted by [`polarize`].
pub const MAX_POLARIZATION_ORDER: usize = 4;

/// The mixed differential rebuilt from diagonal values:
/// `(1/k!) Σ_{a=1..k} (-1)^{k-a} Σ_{|J|=a} d^k R(φ0)(S_J, …, S_J)`.
pub fn polarize(r: &Representative, phi0: &KernelArg, dirs: &[KernelArg], x: f64) -> Result<f64> {
    let k = dirs.len();
    if k == 0 || k > MAX_POLARIZATION_ORDER {
        return Err(Error::InvalidParam(format!(
            "polarization needs 1..={MAX_POLARIZATION_ORDER} directions, got {k}"
        )));
    }
    let mut total = 0.0;
    for mask in 1u32..(1 << k) {
        let members: Vec<&KernelArg> = (0..k).filter(|i| mask & (1 << i) != 0).map(|i| &dirs[i]).collect();
        let a = members.len();
        let s = KernelArg::sum(&members);
        let diag = differential(r, phi0, &vec![s; k], x)?;
        total += if (k - a) % 2 == 0 { diag } else { -diag };
    }
    Ok(total / factorial(k))
}

/// `(φ, x) ↦ R(φ*)(x)`.
pub fn to_convolution(r: &Representative) -> impl Fn(&Mollifier, f64) -> Result<f64> + '_ {
    move |phi, x| eval(r, &KernelArg::Conv(phi.clone()), x, 0)
}
