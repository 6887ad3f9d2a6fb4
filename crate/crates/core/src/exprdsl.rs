//! Text syntax for representatives and nonnegative polynomials.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := ['-'] number | func | '(' expr ')'
//! func   := 'iota' '(' dist ')' | 'sigma' '(' smooth ')'
//!         | 'D' '(' expr ')' | 'hatD' '[' smooth ']' '(' expr ')'
//! dist   := 'delta' ['(' number ')'] | 'ddelta' '(' int [',' number] ')'
//!         | 'H' ['(' number ')'] | 'reg' '(' smooth ')'
//! smooth := 'sin' | 'cos' | 'exp' | 'poly' '(' number {',' number} ')'
//!         | 'bump' '(' number ')'
//! ```
//!
//! Numbers inside `dist` and `smooth` may carry a leading minus sign.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::distribution::Distribution;
use crate::error::{Error, ExpectedSet, Result};
use crate::funcspace::{Domain, SmoothFunction};
use crate::genfunc::Representative;
use crate::seminorm::{Monomial, PosPoly};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "smooth", rename_all = "snake_case")]
pub enum SmoothAst {
    Sin,
    Cos,
    Exp,
    Poly { coeffs: Vec<f64> },
    Bump { radius: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "dist", rename_all = "snake_case")]
pub enum DistAst {
    Delta { x0: f64 },
    Ddelta { k: usize, x0: f64 },
    H { x0: f64 },
    Reg { f: SmoothAst },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum ExprAst {
    Num { value: f64 },
    Iota { u: DistAst },
    Sigma { f: SmoothAst },
    D { child: Box<ExprAst> },
    HatD { field: SmoothAst, child: Box<ExprAst> },
    Add { left: Box<ExprAst>, right: Box<ExprAst> },
    Sub { left: Box<ExprAst>, right: Box<ExprAst> },
    Mul { left: Box<ExprAst>, right: Box<ExprAst> },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    text: String,
    pos: usize,
}

fn lex(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(char::is_ascii_digit)) {
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value = text.parse::<f64>().map_err(|_| Error::Syntax {
                position: start + 1,
                expected: ExpectedSet(vec!["number".into()]),
                found: format!("`{text}`"),
            })?;
            out.push(Token { tok: Tok::Num(value), text, pos: start + 1 });
        } else if c.is_ascii_alphabetic() {
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            out.push(Token { tok: Tok::Ident(text.clone()), text, pos: start + 1 });
        } else if "+-*()[],^".contains(c) {
            i += 1;
            out.push(Token { tok: Tok::Sym(c), text: c.to_string(), pos: start + 1 });
        } else {
            return Err(Error::Syntax {
                position: start + 1,
                expected: ExpectedSet(vec!["a token".into()]),
                found: format!("`{c}`"),
            });
        }
    }
    out.push(Token { tok: Tok::Eof, text: String::new(), pos: chars.len() + 1 });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    at: usize,
}

const FACTOR_START: &[&str] = &["number", "-", "iota", "sigma", "D", "hatD", "("];
const DIST_START: &[&str] = &["delta", "ddelta", "H", "reg"];
const SMOOTH_START: &[&str] = &["sin", "cos", "exp", "poly", "bump"];

impl Parser {
    fn new(src: &str) -> Result<Self> {
        Ok(Self { toks: lex(src)?, at: 0 })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.at]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn error<T>(&self, expected: &[&str]) -> Result<T> {
        let t = self.peek();
        let found = if t.tok == Tok::Eof { "end of input".to_string() } else { format!("`{}`", t.text) };
        Err(Error::Syntax {
            position: t.pos,
            expected: ExpectedSet(expected.iter().map(|s| s.to_string()).collect()),
            found,
        })
    }

    fn is_sym(&self, c: char) -> bool {
        self.peek().tok == Tok::Sym(c)
    }

    fn expect_sym(&mut self, c: char) -> Result<()> {
        if self.is_sym(c) {
            self.bump();
            Ok(())
        } else {
            self.error(&[&c.to_string()])
        }
    }

    fn ident(&self) -> Option<&str> {
        match &self.peek().tok {
            Tok::Ident(s) => Some(s),
            _ => None,
        }
    }

    fn finish(&self, expected: &[&str]) -> Result<()> {
        if self.peek().tok == Tok::Eof {
            Ok(())
        } else {
            let mut all = expected.to_vec();
            all.push("end of input");
            self.error(&all)
        }
    }

    fn expr(&mut self) -> Result<ExprAst> {
        let mut left = self.term()?;
        loop {
            if self.is_sym('+') {
                self.bump();
                left = ExprAst::Add { left: Box::new(left), right: Box::new(self.term()?) };
            } else if self.is_sym('-') {
                self.bump();
                left = ExprAst::Sub { left: Box::new(left), right: Box::new(self.term()?) };
            } else {
                return Ok(left);
            }
        }
    }

    fn term(&mut self) -> Result<ExprAst> {
        let mut left = self.factor()?;
        while self.is_sym('*') {
            self.bump();
            left = ExprAst::Mul { left: Box::new(left), right: Box::new(self.factor()?) };
        }
        Ok(left)
    }

    fn factor(&mut self) -> Result<ExprAst> {
        if self.is_sym('(') {
            self.bump();
            let e = self.expr()?;
            if !self.is_sym(')') {
                return self.error(&["+", "-", "*", ")"]);
            }
            self.bump();
            return Ok(e);
        }
        if self.is_sym('-') || matches!(self.peek().tok, Tok::Num(_)) {
            return Ok(ExprAst::Num { value: self.number()? });
        }
        match self.ident() {
            Some("iota") => {
                self.bump();
                self.expect_sym('(')?;
                let u = self.dist()?;
                self.expect_sym(')')?;
                Ok(ExprAst::Iota { u })
            }
            Some("sigma") => {
                self.bump();
                self.expect_sym('(')?;
                let f = self.smooth()?;
                self.expect_sym(')')?;
                Ok(ExprAst::Sigma { f })
            }
            Some("D") => {
                self.bump();
                self.expect_sym('(')?;
                let e = self.expr()?;
                if !self.is_sym(')') {
                    return self.error(&["+", "-", "*", ")"]);
                }
                self.bump();
                Ok(ExprAst::D { child: Box::new(e) })
            }
            Some("hatD") => {
                self.bump();
                self.expect_sym('[')?;
                let field = self.smooth()?;
                self.expect_sym(']')?;
                self.expect_sym('(')?;
                let e = self.expr()?;
                if !self.is_sym(')') {
                    return self.error(&["+", "-", "*", ")"]);
                }
                self.bump();
                Ok(ExprAst::HatD { field, child: Box::new(e) })
            }
            _ => self.error(FACTOR_START),
        }
    }

    fn number(&mut self) -> Result<f64> {
        let neg = if self.is_sym('-') {
            self.bump();
            true
        } else {
            false
        };
        match self.peek().tok {
            Tok::Num(v) => {
                self.bump();
                Ok(if neg { -v } else { v })
            }
            _ => self.error(&["number"]),
        }
    }

    fn integer(&mut self) -> Result<usize> {
        match self.peek().tok {
            Tok::Num(v) if v.fract() == 0.0 && v >= 0.0 && v <= u32::MAX as f64 && !self.peek().text.contains(['.', 'e', 'E']) => {
                self.bump();
                Ok(v as usize)
            }
            _ => self.error(&["integer"]),
        }
    }

    fn optional_point(&mut self) -> Result<f64> {
        if self.is_sym('(') {
            self.bump();
            let v = self.number()?;
            self.expect_sym(')')?;
            Ok(v)
        } else {
            Ok(0.0)
        }
    }

    fn dist(&mut self) -> Result<DistAst> {
        match self.ident() {
            Some("delta") => {
                self.bump();
                Ok(DistAst::Delta { x0: self.optional_point()? })
            }
            Some("H") => {
                self.bump();
                Ok(DistAst::H { x0: self.optional_point()? })
            }
            Some("ddelta") => {
                self.bump();
                self.expect_sym('(')?;
                let k = self.integer()?;
                let x0 = if self.is_sym(',') {
                    self.bump();
                    self.number()?
                } else {
                    0.0
                };
                if !self.is_sym(')') {
                    return self.error(&[",", ")"]);
                }
                self.bump();
                Ok(DistAst::Ddelta { k, x0 })
            }
            Some("reg") => {
                self.bump();
                self.expect_sym('(')?;
                let f = self.smooth()?;
                self.expect_sym(')')?;
                Ok(DistAst::Reg { f })
            }
            _ => self.error(DIST_START),
        }
    }

    fn smooth(&mut self) -> Result<SmoothAst> {
        let s = match self.ident() {
            Some("sin") => SmoothAst::Sin,
            Some("cos") => SmoothAst::Cos,
            Some("exp") => SmoothAst::Exp,
            Some("poly") => {
                self.bump();
                self.expect_sym('(')?;
                let mut coeffs = vec![self.number()?];
                while self.is_sym(',') {
                    self.bump();
                    coeffs.push(self.number()?);
                }
                if !self.is_sym(')') {
                    return self.error(&[",", ")"]);
                }
                self.bump();
                return Ok(SmoothAst::Poly { coeffs });
            }
            Some("bump") => {
                self.bump();
                self.expect_sym('(')?;
                let radius = self.number()?;
                self.expect_sym(')')?;
                return Ok(SmoothAst::Bump { radius });
            }
            _ => return self.error(SMOOTH_START),
        };
        self.bump();
        Ok(s)
    }
}

/// Parses an expression.
pub fn parse(text: &str) -> Result<ExprAst> {
    let mut p = Parser::new(text)?;
    let e = p.expr()?;
    p.finish(&["+", "-", "*"])?;
    Ok(e)
}

/// Parses a standalone smooth-function name such as `sin` or `poly(0, 1)`.
pub fn parse_smooth(text: &str) -> Result<SmoothAst> {
    let mut p = Parser::new(text)?;
    let s = p.smooth()?;
    p.finish(&[])?;
    Ok(s)
}

impl fmt::Display for SmoothAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SmoothAst::Sin => write!(f, "sin"),
            SmoothAst::Cos => write!(f, "cos"),
            SmoothAst::Exp => write!(f, "exp"),
            SmoothAst::Poly { coeffs } => {
                let parts: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
                write!(f, "poly({})", parts.join(", "))
            }
            SmoothAst::Bump { radius } => write!(f, "bump({radius})"),
        }
    }
}

impl fmt::Display for DistAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistAst::Delta { x0 } if *x0 == 0.0 && x0.is_sign_positive() => write!(f, "delta"),
            DistAst::Delta { x0 } => write!(f, "delta({x0})"),
            DistAst::H { x0 } if *x0 == 0.0 && x0.is_sign_positive() => write!(f, "H"),
            DistAst::H { x0 } => write!(f, "H({x0})"),
            DistAst::Ddelta { k, x0 } if *x0 == 0.0 && x0.is_sign_positive() => write!(f, "ddelta({k})"),
            DistAst::Ddelta { k, x0 } => write!(f, "ddelta({k}, {x0})"),
            DistAst::Reg { f: s } => write!(f, "reg({s})"),
        }
    }
}

fn is_additive(e: &ExprAst) -> bool {
    matches!(e, ExprAst::Add { .. } | ExprAst::Sub { .. })
}

impl fmt::Display for ExprAst {
    /// Canonical spacing with the fewest parentheses that re-parse to the
    /// same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprAst::Num { value } => write!(f, "{value}"),
            ExprAst::Iota { u } => write!(f, "iota({u})"),
            ExprAst::Sigma { f: s } => write!(f, "sigma({s})"),
            ExprAst::D { child } => write!(f, "D({child})"),
            ExprAst::HatD { field, child } => write!(f, "hatD[{field}]({child})"),
            ExprAst::Add { left, right } | ExprAst::Sub { left, right } => {
                let op = if matches!(self, ExprAst::Add { .. }) { '+' } else { '-' };
                if is_additive(right) {
                    write!(f, "{left} {op} ({right})")
                } else {
                    write!(f, "{left} {op} {right}")
                }
            }
            ExprAst::Mul { left, right } => {
                if is_additive(left) {
                    write!(f, "({left})")?;
                } else {
                    write!(f, "{left}")?;
                }
                if is_additive(right) || matches!(**right, ExprAst::Mul { .. }) {
                    write!(f, "*({right})")
                } else {
                    write!(f, "*{right}")
                }
            }
        }
    }
}

/// `parse(format(ast)) == ast`.
pub fn format(ast: &ExprAst) -> String {
    ast.to_string()
}

impl SmoothAst {
    pub fn build(&self) -> Result<SmoothFunction> {
        match self {
            SmoothAst::Sin => Ok(SmoothFunction::sin()),
            SmoothAst::Cos => Ok(SmoothFunction::cos()),
            SmoothAst::Exp => Ok(SmoothFunction::exp()),
            SmoothAst::Poly { coeffs } => SmoothFunction::poly(coeffs.clone()),
            SmoothAst::Bump { radius } => SmoothFunction::bump(*radius),
        }
    }
}

impl DistAst {
    pub fn build(&self, domain: Domain) -> Result<Distribution> {
        let u = match self {
            DistAst::Delta { x0 } => Distribution::delta(*x0),
            DistAst::Ddelta { k, x0 } => Distribution::delta_derivative(*x0, *k),
            DistAst::H { x0 } => Distribution::heaviside(*x0),
            DistAst::Reg { f } => Distribution::regular(f.build()?),
        };
        u.on(domain)
    }
}

impl ExprAst {
    /// The representative on `domain`; `a - b` becomes `a + (-1)·b`.
    pub fn to_representative(&self, domain: Domain) -> Result<Representative> {
        let bin = |l: &ExprAst, r: &ExprAst| Ok::<_, Error>((l.to_representative(domain)?, r.to_representative(domain)?));
        Ok(match self {
            ExprAst::Num { value } => Representative::constant(*value),
            ExprAst::Iota { u } => Representative::embed(u.build(domain)?),
            ExprAst::Sigma { f } => Representative::sigma(f.build()?),
            ExprAst::D { child } => child.to_representative(domain)?.partial(),
            ExprAst::HatD { field, child } => child.to_representative(domain)?.hat_d(field.build()?),
            ExprAst::Add { left, right } => {
                let (l, r) = bin(left, right)?;
                Representative::sum(l, r)?
            }
            ExprAst::Sub { left, right } => {
                let (l, r) = bin(left, right)?;
                Representative::sub(l, r)?
            }
            ExprAst::Mul { left, right } => {
                let (l, r) = bin(left, right)?;
                Representative::product(l, r)?
            }
        })
    }
}

/// Parses and converts in one step.
pub fn parse_representative(text: &str, domain: Domain) -> Result<Representative> {
    parse(text)?.to_representative(domain)
}

/// Parses `3*y0^2*z1 + 0.5*z0`. The arity `k` is the largest variable
/// index, or `min_k` if that is larger.
pub fn parse_pospoly(text: &str, min_k: usize) -> Result<PosPoly> {
    let mut p = Parser::new(text)?;
    // (coefficient, [(is_z, index, exponent)])
    let mut terms: Vec<(f64, Vec<(bool, usize, u32)>)> = Vec::new();
    let mut k = min_k;
    loop {
        let mut coeff = 1.0;
        let mut vars = Vec::new();
        loop {
            match p.peek().tok.clone() {
                Tok::Num(v) => {
                    p.bump();
                    coeff *= v;
                }
                Tok::Ident(name) => {
                    let (head, idx) = name.split_at(1);
                    let is_z = match head {
                        "y" => false,
                        "z" => true,
                        _ => return p.error(&["number", "y<i>", "z<i>"]),
                    };
                    let Ok(index) = idx.parse::<usize>() else { return p.error(&["y<i>", "z<i>"]) };
                    p.bump();
                    let exp = if p.is_sym('^') {
                        p.bump();
                        p.integer()? as u32
                    } else {
                        1
                    };
                    k = k.max(index);
                    vars.push((is_z, index, exp));
                }
                _ => return p.error(&["number", "y<i>", "z<i>"]),
            }
            if p.is_sym('*') {
                p.bump();
            } else {
                break;
            }
        }
        terms.push((coeff, vars));
        if p.is_sym('+') {
            p.bump();
        } else {
            break;
        }
    }
    p.finish(&["+", "*", "^"])?;
    let monomials = terms
        .into_iter()
        .map(|(coeff, vars)| {
            let mut y_exp = vec![0; k + 1];
            let mut z_exp = vec![0; k + 1];
            for (is_z, i, e) in vars {
                if is_z {
                    z_exp[i] += e;
                } else {
                    y_exp[i] += e;
                }
            }
            Monomial { y_exp, z_exp, coeff }
        })
        .collect();
    PosPoly::new(k, monomials)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn num(v: f64) -> Box<ExprAst> {
        Box::new(ExprAst::Num { value: v })
    }

    #[test]
    fn parses_examples() {
        let e = parse("iota(H)*iota(H) - iota(H)").unwrap();
        let h = || Box::new(ExprAst::Iota { u: DistAst::H { x0: 0.0 } });
        assert_eq!(e, ExprAst::Sub { left: Box::new(ExprAst::Mul { left: h(), right: h() }), right: h() });
        assert_eq!(
            parse("D(iota(delta))").unwrap(),
            ExprAst::D { child: Box::new(ExprAst::Iota { u: DistAst::Delta { x0: 0.0 } }) }
        );
        let e = parse("iota(reg(sin)) - sigma(sin)").unwrap();
        assert_eq!(format(&e), "iota(reg(sin)) - sigma(sin)");
        let e = parse("hatD[poly(1, -2.5)](ddelta(2, -0.5))").unwrap_err();
        assert!(matches!(e, Error::Syntax { position: 21, .. }), "{e}");
        let e = parse("hatD[poly(1, -2.5)](iota(ddelta(2, -0.5)))").unwrap();
        assert_eq!(parse(&format(&e)).unwrap(), e);
    }

    #[test]
    fn precedence_and_parens() {
        let e = parse("1 + 2*3").unwrap();
        assert_eq!(e, ExprAst::Add { left: num(1.0), right: Box::new(ExprAst::Mul { left: num(2.0), right: num(3.0) }) });
        assert_eq!(format(&e), "1 + 2*3");
        let e = parse("(1 + 2)*3").unwrap();
        assert_eq!(format(&e), "(1 + 2)*3");
        let e = parse("1 - (2 - 3)").unwrap();
        assert_eq!(format(&e), "1 - (2 - 3)");
        assert_eq!(format(&parse("1 - 2 - 3").unwrap()), "1 - 2 - 3");
        assert_eq!(format(&parse("((1))*(2*3)").unwrap()), "1*(2*3)");
        assert_eq!(format(&parse("-1*-2.5e-3").unwrap()), "-1*-0.0025");
    }

    #[test]
    fn error_reports_position_and_expectations() {
        match parse("iota(delt)") {
            Err(Error::Syntax { position, expected, found }) => {
                assert_eq!(position, 6);
                assert!(expected.0.contains(&"delta".to_string()));
                assert_eq!(found, "`delt`");
            }
            other => panic!("{other:?}"),
        }
        match parse("sigma(sin") {
            Err(Error::Syntax { position, found, .. }) => {
                assert_eq!(position, 10);
                assert_eq!(found, "end of input");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn builds_representatives() {
        let r = parse_representative("iota(delta(0.25))*sigma(exp) + 2", Domain::real_line()).unwrap();
        assert_eq!(r.singular_points(), vec![0.25]);
        assert!(parse_representative("iota(delta(3))", Domain::new(-1.0, 1.0).unwrap()).is_err());
        assert!(parse_representative("sigma(bump(-1))", Domain::real_line()).is_err());
    }

    #[test]
    fn pospoly_text_round_trip() {
        let p = parse_pospoly("3*y0^2*z1 + 0.5*z0", 0).unwrap();
        assert_eq!(p.k(), 1);
        assert_eq!(p.to_string(), "3*y0^2*z1 + 0.5*z0");
        assert_eq!(parse_pospoly(&p.to_string(), 0).unwrap(), p);
        assert!(p.in_i());
        assert!(parse_pospoly("y0 + w1", 0).is_err());
        assert!(parse_pospoly("-1*y0", 0).is_err());
        assert_eq!(parse_pospoly("y0^2", 2).unwrap().k(), 2);
    }
}
