//! Closed-form expression trees over coordinates.
//!
//! Expressions are immutable, reference-counted trees over the primitive set
//! {constant, coordinate, +, −, ×, ÷, negation, sin, cos, exp, ln, sqrt,
//! power}. They evaluate at any [`Real`] scalar, so forward-mode derivatives
//! through them are exact, and they differentiate and substitute
//! symbolically. The text form is a prefix s-expression such as
//! `(sin (* x1 x2))`; coordinates are written `x1 … xD`.

use crate::error::{Error, Result};
use crate::real::Real;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

/// Node of an expression tree.
#[derive(Debug, PartialEq)]
pub enum Node {
    Const(f64),
    /// Zero-based coordinate index.
    Var(usize),
    Add(Expr, Expr),
    Sub(Expr, Expr),
    Mul(Expr, Expr),
    Div(Expr, Expr),
    Neg(Expr),
    Sin(Expr),
    Cos(Expr),
    Exp(Expr),
    Ln(Expr),
    Sqrt(Expr),
    Pow(Expr, Expr),
}

/// Shared handle to an expression tree.
#[derive(Clone, Debug, PartialEq)]
pub struct Expr(Arc<Node>);

impl Expr {
    fn wrap(n: Node) -> Self {
        Expr(Arc::new(n))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn c(v: f64) -> Self {
        Self::wrap(Node::Const(v))
    }

    /// Coordinate with zero-based index `i` (printed as `x{i+1}`).
    pub fn var(i: usize) -> Self {
        Self::wrap(Node::Var(i))
    }

    pub fn zero() -> Self {
        Self::c(0.0)
    }

    pub fn one() -> Self {
        Self::c(1.0)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self.node() {
            Node::Const(v) => Some(*v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn sin(&self) -> Self {
        match self.as_const() {
            Some(v) => Self::c(v.sin()),
            None => Self::wrap(Node::Sin(self.clone())),
        }
    }

    pub fn cos(&self) -> Self {
        match self.as_const() {
            Some(v) => Self::c(v.cos()),
            None => Self::wrap(Node::Cos(self.clone())),
        }
    }

    pub fn exp(&self) -> Self {
        match self.as_const() {
            Some(v) => Self::c(v.exp()),
            None => Self::wrap(Node::Exp(self.clone())),
        }
    }

    pub fn ln(&self) -> Self {
        match self.as_const() {
            Some(v) => Self::c(v.ln()),
            None => Self::wrap(Node::Ln(self.clone())),
        }
    }

    pub fn sqrt(&self) -> Self {
        match self.as_const() {
            Some(v) => Self::c(v.sqrt()),
            None => Self::wrap(Node::Sqrt(self.clone())),
        }
    }

    pub fn pow(&self, e: &Expr) -> Self {
        match (self.as_const(), e.as_const()) {
            (_, Some(p)) if p == 0.0 => Self::one(),
            (_, Some(p)) if p == 1.0 => self.clone(),
            (Some(b), Some(p)) => Self::c(b.powf(p)),
            _ => Self::wrap(Node::Pow(self.clone(), e.clone())),
        }
    }

    pub fn powi(&self, n: i32) -> Self {
        self.pow(&Self::c(n as f64))
    }

    /// Evaluates at coordinates `x`.
    pub fn eval<T: Real>(&self, x: &[T]) -> T {
        match self.node() {
            Node::Const(v) => T::cst(*v),
            Node::Var(i) => x[*i],
            Node::Add(a, b) => a.eval(x) + b.eval(x),
            Node::Sub(a, b) => a.eval(x) - b.eval(x),
            Node::Mul(a, b) => a.eval(x) * b.eval(x),
            Node::Div(a, b) => a.eval(x) / b.eval(x),
            Node::Neg(a) => -a.eval(x),
            Node::Sin(a) => a.eval(x).sin(),
            Node::Cos(a) => a.eval(x).cos(),
            Node::Exp(a) => a.eval(x).exp(),
            Node::Ln(a) => a.eval(x).ln(),
            Node::Sqrt(a) => a.eval(x).sqrt(),
            Node::Pow(a, e) => match e.as_const() {
                Some(p) if p.fract() == 0.0 && p.abs() < i32::MAX as f64 => {
                    a.eval(x).powi(p as i32)
                }
                _ => a.eval(x).powf(e.eval(x)),
            },
        }
    }

    /// Largest coordinate index referenced plus one (0 for constants).
    pub fn arity(&self) -> usize {
        match self.node() {
            Node::Const(_) => 0,
            Node::Var(i) => i + 1,
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) | Node::Pow(a, b) => {
                a.arity().max(b.arity())
            }
            Node::Neg(a) | Node::Sin(a) | Node::Cos(a) | Node::Exp(a) | Node::Ln(a) | Node::Sqrt(a) => {
                a.arity()
            }
        }
    }

    /// Symbolic partial derivative with respect to coordinate `v`.
    pub fn diff(&self, v: usize) -> Self {
        match self.node() {
            Node::Const(_) => Self::zero(),
            Node::Var(i) => Self::c(if *i == v { 1.0 } else { 0.0 }),
            Node::Add(a, b) => a.diff(v) + b.diff(v),
            Node::Sub(a, b) => a.diff(v) - b.diff(v),
            Node::Mul(a, b) => a.diff(v) * b.clone() + a.clone() * b.diff(v),
            Node::Div(a, b) => (a.diff(v) * b.clone() - a.clone() * b.diff(v)) / (b.clone() * b.clone()),
            Node::Neg(a) => -a.diff(v),
            Node::Sin(a) => a.cos() * a.diff(v),
            Node::Cos(a) => -(a.sin() * a.diff(v)),
            Node::Exp(a) => self.clone() * a.diff(v),
            Node::Ln(a) => a.diff(v) / a.clone(),
            Node::Sqrt(a) => a.diff(v) / (Self::c(2.0) * self.clone()),
            Node::Pow(a, e) => match e.as_const() {
                Some(p) => Self::c(p) * a.pow(&Self::c(p - 1.0)) * a.diff(v),
                None => self.clone() * (e.diff(v) * a.ln() + e.clone() * a.diff(v) / a.clone()),
            },
        }
    }

    /// Replaces every coordinate `x_i` by `map[i]`; indices beyond `map` are kept.
    pub fn substitute(&self, map: &[Expr]) -> Self {
        match self.node() {
            Node::Const(_) => self.clone(),
            Node::Var(i) => map.get(*i).cloned().unwrap_or_else(|| self.clone()),
            Node::Add(a, b) => a.substitute(map) + b.substitute(map),
            Node::Sub(a, b) => a.substitute(map) - b.substitute(map),
            Node::Mul(a, b) => a.substitute(map) * b.substitute(map),
            Node::Div(a, b) => a.substitute(map) / b.substitute(map),
            Node::Neg(a) => -a.substitute(map),
            Node::Sin(a) => a.substitute(map).sin(),
            Node::Cos(a) => a.substitute(map).cos(),
            Node::Exp(a) => a.substitute(map).exp(),
            Node::Ln(a) => a.substitute(map).ln(),
            Node::Sqrt(a) => a.substitute(map).sqrt(),
            Node::Pow(a, e) => a.substitute(map).pow(&e.substitute(map)),
        }
    }

    /// Parses the prefix s-expression form.
    pub fn parse(src: &str) -> Result<Self> {
        let tokens = tokenize(src);
        let mut pos = 0;
        let e = parse_tokens(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(Error::Parse {
                offset: tokens[pos].0,
                message: format!("unexpected trailing token `{}`", tokens[pos].1),
            });
        }
        Ok(e)
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(self, o: Expr) -> Expr {
        match (self.as_const(), o.as_const()) {
            (Some(a), Some(b)) => Expr::c(a + b),
            (Some(a), _) if a == 0.0 => o,
            (_, Some(b)) if b == 0.0 => self,
            _ => Expr::wrap(Node::Add(self, o)),
        }
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, o: Expr) -> Expr {
        match (self.as_const(), o.as_const()) {
            (Some(a), Some(b)) => Expr::c(a - b),
            (Some(a), _) if a == 0.0 => -o,
            (_, Some(b)) if b == 0.0 => self,
            _ => Expr::wrap(Node::Sub(self, o)),
        }
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, o: Expr) -> Expr {
        match (self.as_const(), o.as_const()) {
            (Some(a), Some(b)) => Expr::c(a * b),
            (Some(a), _) if a == 0.0 => Expr::zero(),
            (_, Some(b)) if b == 0.0 => Expr::zero(),
            (Some(a), _) if a == 1.0 => o,
            (_, Some(b)) if b == 1.0 => self,
            _ => Expr::wrap(Node::Mul(self, o)),
        }
    }
}

impl Div for Expr {
    type Output = Expr;
    fn div(self, o: Expr) -> Expr {
        match (self.as_const(), o.as_const()) {
            (Some(a), Some(b)) => Expr::c(a / b),
            (Some(a), _) if a == 0.0 => Expr::zero(),
            (_, Some(b)) if b == 1.0 => self,
            _ => Expr::wrap(Node::Div(self, o)),
        }
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self.node() {
            Node::Const(v) => Expr::c(-v),
            Node::Neg(a) => a.clone(),
            _ => Expr::wrap(Node::Neg(self)),
        }
    }
}

macro_rules! ref_ops {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<&Expr> for &Expr {
            type Output = Expr;
            fn $m(self, o: &Expr) -> Expr { self.clone().$m(o.clone()) }
        }
    )*};
}
ref_ops!(Add add, Sub sub, Mul mul, Div div);

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(v) => write!(f, "{v:?}"),
            Node::Var(i) => write!(f, "x{}", i + 1),
            Node::Add(a, b) => write!(f, "(+ {a} {b})"),
            Node::Sub(a, b) => write!(f, "(- {a} {b})"),
            Node::Mul(a, b) => write!(f, "(* {a} {b})"),
            Node::Div(a, b) => write!(f, "(/ {a} {b})"),
            Node::Neg(a) => write!(f, "(neg {a})"),
            Node::Sin(a) => write!(f, "(sin {a})"),
            Node::Cos(a) => write!(f, "(cos {a})"),
            Node::Exp(a) => write!(f, "(exp {a})"),
            Node::Ln(a) => write!(f, "(ln {a})"),
            Node::Sqrt(a) => write!(f, "(sqrt {a})"),
            Node::Pow(a, b) => write!(f, "(pow {a} {b})"),
        }
    }
}

fn tokenize(src: &str) -> Vec<(usize, String)> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut start = 0;
    for (i, ch) in src.char_indices() {
        if ch == '(' || ch == ')' || ch.is_whitespace() {
            if !cur.is_empty() {
                out.push((start, std::mem::take(&mut cur)));
            }
            if !ch.is_whitespace() {
                out.push((i, ch.to_string()));
            }
        } else {
            if cur.is_empty() {
                start = i;
            }
            cur.push(ch);
        }
    }
    if !cur.is_empty() {
        out.push((start, cur));
    }
    out
}

fn parse_tokens(tokens: &[(usize, String)], pos: &mut usize) -> Result<Expr> {
    let end = tokens.last().map(|t| t.0 + t.1.len()).unwrap_or(0);
    let (off, tok) = tokens.get(*pos).ok_or(Error::Parse {
        offset: end,
        message: "unexpected end of input".into(),
    })?;
    *pos += 1;
    if tok == ")" {
        return Err(Error::Parse { offset: *off, message: "unexpected `)`".into() });
    }
    if tok != "(" {
        return parse_atom(*off, tok);
    }
    let (op_off, op) = tokens.get(*pos).ok_or(Error::Parse {
        offset: end,
        message: "missing operator".into(),
    })?;
    *pos += 1;
    let mut args = Vec::new();
    loop {
        match tokens.get(*pos) {
            None => {
                return Err(Error::Parse { offset: end, message: "unclosed `(`".into() });
            }
            Some((_, t)) if t == ")" => {
                *pos += 1;
                break;
            }
            _ => args.push(parse_tokens(tokens, pos)?),
        }
    }
    build_op(*op_off, op, args)
}

fn parse_atom(off: usize, tok: &str) -> Result<Expr> {
    if tok == "pi" {
        return Ok(Expr::c(std::f64::consts::PI));
    }
    if let Some(rest) = tok.strip_prefix('x') {
        if let Ok(i) = rest.parse::<usize>() {
            if i == 0 {
                return Err(Error::Parse { offset: off, message: "coordinates start at x1".into() });
            }
            return Ok(Expr::var(i - 1));
        }
    }
    tok.parse::<f64>().map(Expr::c).map_err(|_| Error::Parse {
        offset: off,
        message: format!("unknown atom `{tok}`"),
    })
}

fn build_op(off: usize, op: &str, args: Vec<Expr>) -> Result<Expr> {
    let arity_err = |n: &str| Error::Parse {
        offset: off,
        message: format!("operator `{op}` expects {n} argument(s), got {}", args.len()),
    };
    let unary = |f: fn(&Expr) -> Expr| {
        if args.len() == 1 {
            Ok(f(&args[0]))
        } else {
            Err(arity_err("1"))
        }
    };
    match op {
        "+" | "*" => {
            if args.is_empty() {
                return Err(arity_err("at least 1"));
            }
            let mut it = args.clone().into_iter();
            let first = it.next().unwrap();
            Ok(it.fold(first, |acc, e| if op == "+" { acc + e } else { acc * e }))
        }
        "-" => match args.len() {
            1 => Ok(-args[0].clone()),
            2 => Ok(args[0].clone() - args[1].clone()),
            _ => Err(arity_err("1 or 2")),
        },
        "/" | "pow" => {
            if args.len() != 2 {
                return Err(arity_err("2"));
            }
            Ok(if op == "/" { &args[0] / &args[1] } else { args[0].pow(&args[1]) })
        }
        "neg" => unary(|e| -e.clone()),
        "sin" => unary(Expr::sin),
        "cos" => unary(Expr::cos),
        "exp" => unary(Expr::exp),
        "ln" => unary(Expr::ln),
        "sqrt" => unary(Expr::sqrt),
        _ => Err(Error::Parse { offset: off, message: format!("unknown operator `{op}`") }),
    }
}

impl serde::Serialize for Expr {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for Expr {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let src = String::deserialize(d)?;
        Expr::parse(&src).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::real::{seed, Dual};

    fn x(i: usize) -> Expr {
        Expr::var(i)
    }

    #[test]
    fn evaluates_closed_forms() {
        let e = Expr::parse("(* x1 x2)").unwrap();
        assert_eq!(e.eval(&[2.0, 3.0, 0.0, 0.0, 0.0]), 6.0);
        let s = Expr::parse("(sin x1)").unwrap();
        let d = s.eval(&seed(&[0.0], 0));
        assert!((d.du - 1.0).abs() < 1e-15);
    }

    #[test]
    fn round_trips_text_form() {
        for src in ["(sin (* x1 x2))", "(pow (+ 1.0 x3) -2.0)", "(neg (exp (/ x1 x2)))", "(sqrt (ln x4))"] {
            let e = Expr::parse(src).unwrap();
            assert_eq!(e.to_string(), src);
            assert_eq!(Expr::parse(&e.to_string()).unwrap(), e);
        }
    }

    #[test]
    fn parse_errors_carry_offsets() {
        assert!(matches!(Expr::parse("(sin x1"), Err(Error::Parse { .. })));
        assert!(matches!(Expr::parse("(foo x1)"), Err(Error::Parse { offset: 1, .. })));
        assert!(matches!(Expr::parse("(sin x1 x2)"), Err(Error::Parse { .. })));
        assert!(matches!(Expr::parse("x0"), Err(Error::Parse { .. })));
    }

    #[test]
    fn symbolic_diff_matches_dual_and_fd() {
        let e = (x(0) * x(1)).exp() + x(2).sin() * x(0).powi(3) / (Expr::c(2.0) + x(1).cos())
            + (Expr::c(1.5) + x(0) * x(0)).sqrt().ln()
            + (Expr::c(1.2) + x(2) * x(2)).pow(&x(1));
        let p = [0.3, 0.7, -0.4];
        for v in 0..3 {
            let sym = e.diff(v).eval(&p);
            let ad = e.eval(&seed(&p, v)).du;
            let h = 1e-6;
            let mut pp = p;
            let mut pm = p;
            pp[v] += h;
            pm[v] -= h;
            let fd = (e.eval(&pp) - e.eval(&pm)) / (2.0 * h);
            assert!((sym - ad).abs() < 1e-12, "sym {sym} ad {ad}");
            assert!((ad - fd).abs() < 1e-7);
        }
    }

    #[test]
    fn substitution_composes() {
        let e = Expr::parse("(* x1 (sin x2))").unwrap();
        let map = [x(1) * Expr::c(2.0), x(0) + Expr::c(1.0)];
        let s = e.substitute(&map);
        let p = [0.2, 0.9];
        assert!((s.eval(&p) - 1.8 * 1.2f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn double_negation_is_structural_identity() {
        let e = Expr::parse("(* x1 (sin x2))").unwrap();
        let flip = [-x(0), -x(1)];
        assert_eq!(e.substitute(&flip).substitute(&flip), e);
    }

    #[test]
    fn second_derivatives_commute() {
        let e = Expr::parse("(* (exp (* x1 x2)) (cos (+ x1 x3)))").unwrap();
        let p = [0.1, -0.5, 0.8];
        let a = e.diff(0).diff(2).eval(&p);
        let b = e.diff(2).diff(0).eval(&p);
        assert!((a - b).abs() < 1e-14);
        let d: Dual<Dual<f64>> = e.eval(&seed(&seed(&p, 2), 0)).clone();
        assert!((d.du.du - a).abs() < 1e-13);
    }
}
