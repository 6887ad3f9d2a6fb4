#![allow(dead_code)]

use colombeau_lab::exprdsl::{DistAst, ExprAst, SmoothAst};
use rand::Rng;

pub fn number<R: Rng>(rng: &mut R) -> f64 {
    match rng.gen_range(0..4) {
        0 => rng.gen_range(-8i32..=8) as f64,
        1 => rng.gen_range(-40i32..=40) as f64 / 8.0,
        2 => rng.gen_range(-1.0..1.0),
        _ => rng.gen_range(1.0..100.0) * 1e-3,
    }
}

pub fn smooth<R: Rng>(rng: &mut R) -> SmoothAst {
    match rng.gen_range(0..5) {
        0 => SmoothAst::Sin,
        1 => SmoothAst::Cos,
        2 => SmoothAst::Exp,
        3 => SmoothAst::Poly { coeffs: (0..rng.gen_range(1..5)).map(|_| number(rng)).collect() },
        _ => SmoothAst::Bump { radius: rng.gen_range(1..9) as f64 / 4.0 },
    }
}

pub fn dist<R: Rng>(rng: &mut R) -> DistAst {
    match rng.gen_range(0..4) {
        0 => DistAst::Delta { x0: number(rng) },
        1 => DistAst::Ddelta { k: rng.gen_range(0..4), x0: number(rng) },
        2 => DistAst::H { x0: number(rng) },
        _ => DistAst::Reg { f: smooth(rng) },
    }
}

/// Random tree of depth at most `depth`.
pub fn expr<R: Rng>(rng: &mut R, depth: usize) -> ExprAst {
    let leaf = depth <= 1 || rng.gen_bool(0.25);
    if leaf {
        return match rng.gen_range(0..3) {
            0 => ExprAst::Num { value: number(rng) },
            1 => ExprAst::Iota { u: dist(rng) },
            _ => ExprAst::Sigma { f: smooth(rng) },
        };
    }
    let d = depth - 1;
    match rng.gen_range(0..5) {
        0 => ExprAst::D { child: Box::new(expr(rng, d)) },
        1 => {
            let field = smooth(rng);
            ExprAst::HatD { field, child: Box::new(expr(rng, d)) }
        }
        op => {
            let left = Box::new(expr(rng, d));
            let right = Box::new(expr(rng, d));
            match op {
                2 => ExprAst::Add { left, right },
                3 => ExprAst::Sub { left, right },
                _ => ExprAst::Mul { left, right },
            }
        }
    }
}

pub fn depth(e: &ExprAst) -> usize {
    match e {
        ExprAst::Num { .. } | ExprAst::Iota { .. } | ExprAst::Sigma { .. } => 1,
        ExprAst::D { child } | ExprAst::HatD { child, .. } => 1 + depth(child),
        ExprAst::Add { left, right } | ExprAst::Sub { left, right } | ExprAst::Mul { left, right } => {
            1 + depth(left).max(depth(right))
        }
    }
}

/// Corrupted inputs with the 1-based character span of the offending token.
pub const ERROR_CORPUS: [(&str, usize, usize); 20] = [
    ("iota(delt)", 6, 9),
    ("sigma(sin", 10, 10),
    ("iota(delta) +", 14, 14),
    ("iota(delta) ** sigma(sin)", 14, 14),
    ("sigma(sine)", 7, 10),
    ("D(iota(H)", 10, 10),
    ("hatD(sin)(iota(H))", 5, 5),
    ("iota(ddelta(x))", 13, 13),
    ("3 + $", 5, 5),
    ("iota(delta))", 12, 12),
    ("poly(1, 2)", 1, 4),
    ("sigma(poly())", 12, 12),
    ("sigma(poly(1,,2))", 14, 14),
    ("iota(H(1 2))", 10, 10),
    ("(iota(delta)", 13, 13),
    ("iota(reg(delta))", 10, 14),
    ("sigma(bump)", 11, 11),
    ("2 3", 3, 3),
    ("iota[delta]", 5, 5),
    ("sigma(sin) * * iota(H)", 14, 14),
];
