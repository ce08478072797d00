//! Scalar expression language for metric coefficients and surface maps.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | 'pi' | variable | func '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Variables are `t`, `x1`..`x9`, `r` (alias of `x1`) and the surface
//! parameters `p1`..`p9`. Functions: `exp ln sin cos sinh cosh tanh sqrt abs`
//! (unary) and `min max` (binary).

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::dual::{Dual, Real};

/// Number of variable slots in an evaluation environment.
pub const SLOTS: usize = 19;
/// Slot index of `t`.
pub const T_SLOT: usize = 0;

/// Slot index of the fiber coordinate `x{i}` (1-based).
pub const fn x_slot(i: usize) -> usize {
    i
}

/// Slot index of the surface parameter `p{i}` (1-based).
pub const fn p_slot(i: usize) -> usize {
    9 + i
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Var {
    T,
    /// `x1`..`x9`.
    X(u8),
    /// Radial alias of `x1`, kept distinct so it prints back as `r`.
    R,
    /// `p1`..`p9`.
    P(u8),
}

impl Var {
    pub fn slot(self) -> usize {
        match self {
            Var::T => T_SLOT,
            Var::X(i) => x_slot(i as usize),
            Var::R => x_slot(1),
            Var::P(i) => p_slot(i as usize),
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::T => write!(f, "t"),
            Var::X(i) => write!(f, "x{i}"),
            Var::R => write!(f, "r"),
            Var::P(i) => write!(f, "p{i}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Ln,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Tanh,
    Sqrt,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Min,
    Max,
}

/// Abstract syntax tree. Equality is structural.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Error)]
#[error("{message} at column {column}")]
pub struct ParseError {
    pub message: String,
    /// 1-based column of the offending character.
    pub column: usize,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(Var),
    #[error("domain error in `{expr}`: {reason}")]
    Domain { expr: String, reason: String },
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr, ParseError> {
        let mut parser = Parser::new(text);
        let expr = parser.expr()?;
        parser.skip_ws();
        if let Some((pos, c)) = parser.peek() {
            return Err(ParseError {
                message: format!("unexpected `{c}`"),
                column: pos + 1,
            });
        }
        Ok(expr)
    }

    pub fn constant(v: f64) -> Expr {
        Expr::Const(v)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    /// Value when the expression has no free variables.
    pub fn as_constant(&self) -> Option<f64> {
        let env = Env::<f64>::empty();
        self.eval(&env).ok()
    }

    /// True when the expression contains no variables.
    pub fn is_closed(&self) -> bool {
        (0..SLOTS).all(|s| !self.depends_on(s))
    }

    /// Replaces every variable for which `f` returns `Some`.
    pub fn substitute(&self, f: &dyn Fn(Var) -> Option<Expr>) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(v) => f(*v).unwrap_or(Expr::Var(*v)),
            Expr::Neg(a) => Expr::Neg(Box::new(a.substitute(f))),
            Expr::Call(func, a) => Expr::Call(*func, Box::new(a.substitute(f))),
            Expr::Binary(op, a, b) => {
                Expr::Binary(*op, Box::new(a.substitute(f)), Box::new(b.substitute(f)))
            }
        }
    }

    /// True if the expression mentions the given slot.
    pub fn depends_on(&self, slot: usize) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(v) => v.slot() == slot,
            Expr::Neg(a) | Expr::Call(_, a) => a.depends_on(slot),
            Expr::Binary(_, a, b) => a.depends_on(slot) || b.depends_on(slot),
        }
    }

    pub fn eval<T: Real>(&self, env: &Env<T>) -> Result<T, EvalError> {
        match self {
            Expr::Const(c) => Ok(T::from_f64(*c)),
            Expr::Var(v) => env.get(v.slot()).ok_or(EvalError::Unbound(*v)),
            Expr::Neg(a) => Ok(-a.eval(env)?),
            Expr::Call(func, a) => {
                let x = a.eval(env)?;
                let domain = |reason: &str| EvalError::Domain {
                    expr: self.to_string(),
                    reason: reason.to_string(),
                };
                Ok(match func {
                    Func::Exp => x.exp(),
                    Func::Ln => {
                        if x.value() <= 0.0 {
                            return Err(domain(&format!("logarithm of {}", x.value())));
                        }
                        x.ln()
                    }
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Sinh => x.sinh(),
                    Func::Cosh => x.cosh(),
                    Func::Tanh => x.tanh(),
                    Func::Sqrt => {
                        if x.value() < 0.0 {
                            return Err(domain(&format!("square root of {}", x.value())));
                        }
                        x.sqrt()
                    }
                    Func::Abs => x.abs(),
                })
            }
            Expr::Binary(op, a, b) => {
                let x = a.eval(env)?;
                // integer powers keep negative bases in the domain
                let closed_exponent = match (op, b.as_ref()) {
                    (BinOp::Pow, Expr::Const(c)) => Some(*c),
                    (BinOp::Pow, e) if e.is_closed() => Some(e.eval(&Env::<f64>::empty())?),
                    _ => None,
                };
                if let Some(c) = closed_exponent {
                    if c.fract() == 0.0 && c.abs() <= 64.0 {
                        if c < 0.0 && x.value() == 0.0 {
                            return Err(EvalError::Domain {
                                expr: self.to_string(),
                                reason: "zero raised to a negative power".into(),
                            });
                        }
                        return Ok(x.powi(c as i32));
                    }
                }
                let y = b.eval(env)?;
                let domain = |reason: String| EvalError::Domain {
                    expr: self.to_string(),
                    reason,
                };
                Ok(match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y.value() == 0.0 {
                            return Err(domain("division by zero".into()));
                        }
                        x / y
                    }
                    BinOp::Pow => {
                        if x.value() <= 0.0 {
                            return Err(domain(format!(
                                "non-positive base {} with non-integer exponent",
                                x.value()
                            )));
                        }
                        (y * x.ln()).exp()
                    }
                    BinOp::Min => x.min(y),
                    BinOp::Max => x.max(y),
                })
            }
        }
    }

    /// Convenience: evaluate with `t` and fiber coordinates bound.
    pub fn eval_at(&self, t: f64, x: &[f64]) -> Result<f64, EvalError> {
        self.eval(&Env::at(t, x))
    }

    /// `d/d(slot)` at `env` by one dual-number pass.
    pub fn partial(&self, env: &Env<f64>, slot: usize) -> Result<f64, EvalError> {
        let denv = env.seeded(slot);
        Ok(self.eval(&denv)?.eps)
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Binary(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

impl FromStr for Expr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Expr::parse(s)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn wrap(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
            if parens {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            Expr::Const(c) => {
                if *c < 0.0 {
                    write!(f, "({c})")
                } else {
                    write!(f, "{c}")
                }
            }
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                wrap(f, a, a.precedence() < 4)
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Binary(op @ (BinOp::Min | BinOp::Max), a, b) => {
                let name = if *op == BinOp::Min { "min" } else { "max" };
                write!(f, "{name}({a}, {b})")
            }
            Expr::Binary(op, a, b) => {
                let (sym, prec) = match op {
                    BinOp::Add => (" + ", 1),
                    BinOp::Sub => (" - ", 1),
                    BinOp::Mul => ("*", 2),
                    BinOp::Div => ("/", 2),
                    _ => ("^", 4),
                };
                if *op == BinOp::Pow {
                    wrap(f, a, a.precedence() <= 4)?;
                    write!(f, "{sym}")?;
                    wrap(f, b, b.precedence() < 5)
                } else {
                    // unary minus binds looser than `*` on the left: `-a*b` is `(-a)*b`
                    wrap(f, a, a.precedence() < prec)?;
                    write!(f, "{sym}")?;
                    wrap(f, b, b.precedence() <= prec)
                }
            }
        }
    }
}

/// Variable bindings indexed by slot.
#[derive(Clone, Debug)]
pub struct Env<T> {
    slots: [Option<T>; SLOTS],
}

impl<T: Real> Env<T> {
    pub fn empty() -> Self {
        Env {
            slots: [None; SLOTS],
        }
    }

    pub fn get(&self, slot: usize) -> Option<T> {
        self.slots.get(slot).copied().flatten()
    }

    pub fn set(&mut self, slot: usize, v: T) {
        self.slots[slot] = Some(v);
    }

    pub fn map<U: Real>(&self, f: impl Fn(usize, T) -> U) -> Env<U> {
        let mut out = Env::<U>::empty();
        for (i, s) in self.slots.iter().enumerate() {
            if let Some(v) = s {
                out.slots[i] = Some(f(i, *v));
            }
        }
        out
    }
}

impl Env<f64> {
    pub fn at(t: f64, x: &[f64]) -> Self {
        let mut env = Env::empty();
        env.set(T_SLOT, t);
        for (i, v) in x.iter().enumerate() {
            env.set(x_slot(i + 1), *v);
        }
        env
    }

    /// Dual environment with the given slot as the active variable.
    pub fn seeded(&self, slot: usize) -> Env<Dual<f64>> {
        self.map(|i, v| Dual::new(v, if i == slot { 1.0 } else { 0.0 }))
    }

    /// Hyper-dual environment for the mixed partial `d²/(d a d b)`.
    pub fn seeded2(&self, a: usize, b: usize) -> Env<Dual<Dual<f64>>> {
        self.map(|i, v| {
            Dual::new(
                Dual::new(v, if i == a { 1.0 } else { 0.0 }),
                Dual::new(if i == b { 1.0 } else { 0.0 }, 0.0),
            )
        })
    }
}

struct Parser<'a> {
    chars: Vec<(usize, char)>,
    pos: usize,
    _src: &'a str,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Self {
        Parser {
            chars: src.chars().enumerate().collect(),
            pos: 0,
            _src: src,
        }
    }

    fn peek(&self) -> Option<(usize, char)> {
        self.chars.get(self.pos).copied()
    }

    fn column(&self) -> usize {
        self.pos + 1
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some((_, c)) if c.is_whitespace()) {
            self.pos += 1;
        }
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            message: message.into(),
            column: self.column(),
        })
    }

    fn eat(&mut self, want: char) -> bool {
        self.skip_ws();
        if matches!(self.peek(), Some((_, c)) if c == want) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat('+') {
                BinOp::Add
            } else if self.eat('-') {
                BinOp::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = if self.eat('*') {
                BinOp::Mul
            } else if self.eat('/') {
                BinOp::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        let Some((_, c)) = self.peek() else {
            return self.error("unexpected end of expression");
        };
        if c == '(' {
            self.pos += 1;
            let inner = self.expr()?;
            if !self.eat(')') {
                return self.error("expected `)`");
            }
            return Ok(inner);
        }
        if c.is_ascii_digit() || c == '.' {
            return self.number();
        }
        if c.is_ascii_alphabetic() {
            let start = self.pos;
            while matches!(self.peek(), Some((_, c)) if c.is_ascii_alphanumeric() || c == '_') {
                self.pos += 1;
            }
            let ident: String = self.chars[start..self.pos].iter().map(|(_, c)| c).collect();
            return self.identifier(&ident, start);
        }
        self.error(format!("unexpected `{c}`"))
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while matches!(p.peek(), Some((_, c)) if c.is_ascii_digit()) {
                p.pos += 1;
            }
        };
        digits(self);
        if matches!(self.peek(), Some((_, '.'))) {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.peek(), Some((_, 'e' | 'E'))) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some((_, '+' | '-'))) {
                self.pos += 1;
            }
            if matches!(self.peek(), Some((_, c)) if c.is_ascii_digit()) {
                digits(self);
            } else {
                self.pos = save;
            }
        }
        let text: String = self.chars[start..self.pos].iter().map(|(_, c)| c).collect();
        match text.parse::<f64>() {
            Ok(v) => Ok(Expr::Const(v)),
            Err(_) => Err(ParseError {
                message: format!("malformed number `{text}`"),
                column: start + 1,
            }),
        }
    }

    fn identifier(&mut self, ident: &str, start: usize) -> Result<Expr, ParseError> {
        let indexed = |prefix: char| -> Option<u8> {
            let rest = ident.strip_prefix(prefix)?;
            match rest.parse::<u8>() {
                Ok(i @ 1..=9) if rest.len() == 1 => Some(i),
                _ => None,
            }
        };
        match ident {
            "t" => return Ok(Expr::Var(Var::T)),
            "r" => return Ok(Expr::Var(Var::R)),
            "pi" => return Ok(Expr::Const(std::f64::consts::PI)),
            _ => {}
        }
        if let Some(i) = indexed('x') {
            return Ok(Expr::Var(Var::X(i)));
        }
        if let Some(i) = indexed('p') {
            return Ok(Expr::Var(Var::P(i)));
        }
        let binary = match ident {
            "min" => Some(BinOp::Min),
            "max" => Some(BinOp::Max),
            _ => None,
        };
        if binary.is_none() && Func::from_name(ident).is_none() {
            return Err(ParseError {
                message: format!("unknown identifier `{ident}`"),
                column: start + 1,
            });
        }
        if !self.eat('(') {
            return self.error(format!("expected `(` after `{ident}`"));
        }
        let first = self.expr()?;
        let expr = if let Some(op) = binary {
            if !self.eat(',') {
                return self.error(format!("`{ident}` takes two arguments"));
            }
            let second = self.expr()?;
            Expr::Binary(op, Box::new(first), Box::new(second))
        } else {
            Expr::Call(Func::from_name(ident).unwrap(), Box::new(first))
        };
        if !self.eat(')') {
            return self.error("expected `)`");
        }
        Ok(expr)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{E, FRAC_PI_2};

    fn eval(src: &str, t: f64, x: &[f64]) -> f64 {
        Expr::parse(src).unwrap().eval_at(t, x).unwrap()
    }

    #[test]
    fn evaluates_reference_values() {
        assert_eq!(eval("exp(2*t)", 0.0, &[]), 1.0);
        assert!((eval("2+sin(x1)", 0.0, &[FRAC_PI_2]) - 3.0).abs() < 1e-15);
        assert_eq!(eval("-2^2", 0.0, &[]), -4.0);
        assert_eq!(eval("2^3^2", 0.0, &[]), 512.0);
        assert_eq!(eval("max(1, min(x1, 5))", 0.0, &[7.0]), 5.0);
        assert_eq!(eval("r^2", 0.0, &[3.0]), 9.0);
        assert_eq!(eval("(-2)^3", 0.0, &[]), -8.0);
        assert!((eval("2^0.5", 0.0, &[]) - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(eval("1.5e2 - 50", 0.0, &[]), 100.0);
    }

    #[test]
    fn dual_derivative_matches_central_difference() {
        let e = Expr::parse("exp(2*t)").unwrap();
        let d = e.partial(&Env::at(1.0, &[]), T_SLOT).unwrap();
        assert!((d - 2.0 * E * E).abs() < 1e-12);
        let h = 1e-5;
        let fd = (e.eval_at(1.0 + h, &[]).unwrap() - e.eval_at(1.0 - h, &[]).unwrap()) / (2.0 * h);
        assert!((d - fd).abs() < 1e-8);
    }

    #[test]
    fn syntax_error_reports_column_of_missing_paren() {
        let err = Expr::parse("exp(2*t").unwrap_err();
        assert_eq!(err.column, 8);
        assert!(err.message.contains(')'));
        let err = Expr::parse("1 + foo(2)").unwrap_err();
        assert_eq!(err.column, 5);
        assert!(Expr::parse("2 3").is_err());
        assert!(Expr::parse("x0").is_err());
    }

    #[test]
    fn domain_errors_name_the_subexpression() {
        let err = Expr::parse("1 + ln(x1)").unwrap().eval_at(0.0, &[-1.0]).unwrap_err();
        match err {
            EvalError::Domain { expr, .. } => assert_eq!(expr, "ln(x1)"),
            other => panic!("unexpected {other:?}"),
        }
        let err = Expr::parse("x2").unwrap().eval_at(0.0, &[1.0]).unwrap_err();
        assert_eq!(err, EvalError::Unbound(Var::X(2)));
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0u32..1000).prop_map(|v| Expr::Const(v as f64 / 8.0)),
            Just(Expr::Var(Var::T)),
            (1u8..4).prop_map(|i| Expr::Var(Var::X(i))),
            Just(Expr::Var(Var::R)),
        ];
        leaf.prop_recursive(5, 40, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|a| Expr::Neg(Box::new(a))),
                inner.clone().prop_map(|a| Expr::Call(Func::Sin, Box::new(a))),
                (
                    prop_oneof![
                        Just(BinOp::Add),
                        Just(BinOp::Sub),
                        Just(BinOp::Mul),
                        Just(BinOp::Div),
                        Just(BinOp::Pow),
                        Just(BinOp::Max)
                    ],
                    inner.clone(),
                    inner
                )
                    .prop_map(|(op, a, b)| Expr::Binary(op, Box::new(a), Box::new(b))),
            ]
        })
    }

    proptest! {
        #[test]
        fn display_reparses_to_same_tree(e in arb_expr()) {
            let printed = e.to_string();
            let back = Expr::parse(&printed).unwrap();
            prop_assert_eq!(back, e);
        }
    }
}
