//! Recursive-descent parser and evaluator for closed-form complex-valued
//! expressions: sequence symbols in the variable `n` and plane functions in
//! `x`, `y`, `z` (with `z` standing for `x + i*y`).
//!
//! Precedence, low to high: `+ -` < `* /` < unary minus < `^` (right
//! associative) < atoms. There is no implicit multiplication. The `sign`
//! function follows the polar-phase convention `sign(w) = w/|w|`,
//! `sign(0) = 0`. Complex powers use the principal branch with an exact
//! fast path for integer exponents, so phases like `(-1)^n` stay exactly
//! on the unit circle.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
#[error("parse error at byte {position}: expected {expected}, found {found}")]
pub struct ParseError {
    pub position: usize,
    pub expected: String,
    pub found: String,
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VarName {
    N,
    X,
    Y,
    Z,
}

impl VarName {
    fn as_str(self) -> &'static str {
        match self {
            VarName::N => "n",
            VarName::X => "x",
            VarName::Y => "y",
            VarName::Z => "z",
        }
    }
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which variables an expression may mention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseContext {
    /// Sequence symbols: variable `n` only.
    Sequence,
    /// Plane functions: variables `x`, `y`, `z`.
    Plane,
}

impl ParseContext {
    fn allows(self, v: VarName) -> bool {
        match self {
            ParseContext::Sequence => v == VarName::N,
            ParseContext::Plane => matches!(v, VarName::X | VarName::Y | VarName::Z),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UnaryOp {
    Neg,
    Conj,
    Abs,
    Re,
    Im,
    Sign,
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
}

impl UnaryOp {
    fn function_name(self) -> Option<&'static str> {
        match self {
            UnaryOp::Neg => None,
            UnaryOp::Conj => Some("conj"),
            UnaryOp::Abs => Some("abs"),
            UnaryOp::Re => Some("re"),
            UnaryOp::Im => Some("im"),
            UnaryOp::Sign => Some("sign"),
            UnaryOp::Sqrt => Some("sqrt"),
            UnaryOp::Exp => Some("exp"),
            UnaryOp::Log => Some("log"),
            UnaryOp::Sin => Some("sin"),
            UnaryOp::Cos => Some("cos"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprAst {
    Literal(Complex64),
    Var(VarName),
    Unary(UnaryOp, Box<ExprAst>),
    Binary(BinaryOp, Box<ExprAst>, Box<ExprAst>),
}

/// Variable bindings for evaluation. `z` falls back to `x + i*y` when not
/// bound directly.
#[derive(Debug, Clone, Default)]
pub struct Bindings {
    values: BTreeMap<&'static str, Complex64>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sequence(n: u64) -> Self {
        let mut b = Self::new();
        b.set(VarName::N, Complex64::new(n as f64, 0.0));
        b
    }

    pub fn plane(x: f64, y: f64) -> Self {
        let mut b = Self::new();
        b.set(VarName::X, Complex64::new(x, 0.0));
        b.set(VarName::Y, Complex64::new(y, 0.0));
        b
    }

    pub fn set(&mut self, var: VarName, value: Complex64) -> &mut Self {
        self.values.insert(var.as_str(), value);
        self
    }

    fn get(&self, var: VarName) -> Result<Complex64, EvalError> {
        if let Some(v) = self.values.get(var.as_str()) {
            return Ok(*v);
        }
        if var == VarName::Z {
            if let (Some(x), Some(y)) = (self.values.get("x"), self.values.get("y")) {
                return Ok(x + Complex64::i() * y);
            }
        }
        Err(EvalError::UnboundVariable(var.as_str().to_string()))
    }
}

pub fn parse(text: &str, context: ParseContext) -> Result<ExprAst, ParseError> {
    let mut p = Parser {
        input: text.as_bytes(),
        pos: 0,
        context,
    };
    p.skip_ws();
    let ast = p.additive()?;
    p.skip_ws();
    if p.pos != p.input.len() {
        return Err(p.error("end of input"));
    }
    Ok(ast)
}

struct Parser<'a> {
    input: &'a [u8],
    pos: usize,
    context: ParseContext,
}

impl<'a> Parser<'a> {
    fn error(&self, expected: &str) -> ParseError {
        let found = match self.input.get(self.pos) {
            None => "end of input".to_string(),
            Some(_) => {
                let rest = &self.input[self.pos..];
                let len = rest.len().min(8);
                format!("`{}`", String::from_utf8_lossy(&rest[..len]))
            }
        };
        ParseError {
            position: self.pos,
            expected: expected.to_string(),
            found,
        }
    }

    fn skip_ws(&mut self) {
        while matches!(self.input.get(self.pos), Some(b' ' | b'\t' | b'\n' | b'\r')) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.input.get(self.pos).copied()
    }

    fn eat(&mut self, byte: u8) -> bool {
        if self.peek() == Some(byte) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn additive(&mut self) -> Result<ExprAst, ParseError> {
        let mut lhs = self.multiplicative()?;
        loop {
            self.skip_ws();
            let op = match self.peek() {
                Some(b'+') => BinaryOp::Add,
                Some(b'-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            self.skip_ws();
            let rhs = self.multiplicative()?;
            lhs = ExprAst::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn multiplicative(&mut self) -> Result<ExprAst, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            self.skip_ws();
            let op = match self.peek() {
                Some(b'*') => BinaryOp::Mul,
                Some(b'/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            self.skip_ws();
            let rhs = self.unary()?;
            lhs = ExprAst::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<ExprAst, ParseError> {
        self.skip_ws();
        if self.eat(b'-') {
            self.skip_ws();
            let inner = self.unary()?;
            return Ok(ExprAst::Unary(UnaryOp::Neg, Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<ExprAst, ParseError> {
        let base = self.atom()?;
        self.skip_ws();
        if self.eat(b'^') {
            self.skip_ws();
            // Right associative; the exponent may carry a unary minus.
            let exponent = self.unary()?;
            return Ok(ExprAst::Binary(
                BinaryOp::Pow,
                Box::new(base),
                Box::new(exponent),
            ));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ExprAst, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.additive()?;
                self.skip_ws();
                if !self.eat(b')') {
                    return Err(self.error("`)`"));
                }
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.word(),
            _ => Err(self.error("a literal, variable, function call, or `(`")),
        }
    }

    fn number(&mut self) -> Result<ExprAst, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.eat(b'.') {
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        // Optional exponent, only when followed by digits (so `2*e` stays a
        // product with Euler's constant while `2e3` is a literal).
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.input[start..self.pos]).expect("ascii digits");
        match text.parse::<f64>() {
            Ok(v) => Ok(ExprAst::Literal(Complex64::new(v, 0.0))),
            Err(_) => {
                self.pos = start;
                Err(self.error("a decimal literal"))
            }
        }
    }

    fn word(&mut self) -> Result<ExprAst, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        let word = std::str::from_utf8(&self.input[start..self.pos]).expect("ascii word");
        match word {
            "i" => return Ok(ExprAst::Literal(Complex64::i())),
            "pi" => return Ok(ExprAst::Literal(Complex64::new(std::f64::consts::PI, 0.0))),
            "e" => return Ok(ExprAst::Literal(Complex64::new(std::f64::consts::E, 0.0))),
            _ => {}
        }
        if let Some(var) = match word {
            "n" => Some(VarName::N),
            "x" => Some(VarName::X),
            "y" => Some(VarName::Y),
            "z" => Some(VarName::Z),
            _ => None,
        } {
            if !self.context.allows(var) {
                let ctx = match self.context {
                    ParseContext::Sequence => "sequence context (allowed: n)",
                    ParseContext::Plane => "plane context (allowed: x, y, z)",
                };
                return Err(ParseError {
                    position: start,
                    expected: format!("a variable valid in {ctx}"),
                    found: format!("`{word}`"),
                });
            }
            return Ok(ExprAst::Var(var));
        }
        let op = match word {
            "conj" => UnaryOp::Conj,
            "abs" => UnaryOp::Abs,
            "re" => UnaryOp::Re,
            "im" => UnaryOp::Im,
            "sign" => UnaryOp::Sign,
            "sqrt" => UnaryOp::Sqrt,
            "exp" => UnaryOp::Exp,
            "log" => UnaryOp::Log,
            "sin" => UnaryOp::Sin,
            "cos" => UnaryOp::Cos,
            _ => {
                self.pos = start;
                return Err(self.error("a known function or variable"));
            }
        };
        self.skip_ws();
        if !self.eat(b'(') {
            return Err(self.error("`(` after function name"));
        }
        let arg = self.additive()?;
        self.skip_ws();
        if !self.eat(b')') {
            return Err(self.error("`)`"));
        }
        Ok(ExprAst::Unary(op, Box::new(arg)))
    }
}

/// Polar-phase sign: `w/|w|` with `sign(0) = 0`.
pub fn sign(w: Complex64) -> Complex64 {
    let n = w.norm();
    if n == 0.0 {
        Complex64::ZERO
    } else {
        w / n
    }
}

fn pow(base: Complex64, exponent: Complex64) -> Result<Complex64, EvalError> {
    if base == Complex64::ZERO {
        if exponent == Complex64::ZERO {
            return Ok(Complex64::ONE);
        }
        if exponent.im == 0.0 && exponent.re > 0.0 {
            return Ok(Complex64::ZERO);
        }
        return Err(EvalError::Domain(format!(
            "0 raised to non-positive power {exponent}"
        )));
    }
    // Exact integer fast path keeps phases like (-1)^n on the unit circle.
    if exponent.im == 0.0 && exponent.re.fract() == 0.0 && exponent.re.abs() <= 2_147_483_647.0 {
        let k = exponent.re as i64;
        let mut result = Complex64::ONE;
        let mut factor = if k >= 0 { base } else { base.inv() };
        let mut remaining = k.unsigned_abs();
        while remaining > 0 {
            if remaining & 1 == 1 {
                result *= factor;
            }
            factor *= factor;
            remaining >>= 1;
        }
        return Ok(result);
    }
    Ok((exponent * base.ln()).exp())
}

pub fn eval(ast: &ExprAst, bindings: &Bindings) -> Result<Complex64, EvalError> {
    match ast {
        ExprAst::Literal(c) => Ok(*c),
        ExprAst::Var(v) => bindings.get(*v),
        ExprAst::Unary(op, child) => {
            let v = eval(child, bindings)?;
            Ok(match op {
                UnaryOp::Neg => -v,
                UnaryOp::Conj => v.conj(),
                UnaryOp::Abs => Complex64::new(v.norm(), 0.0),
                UnaryOp::Re => Complex64::new(v.re, 0.0),
                UnaryOp::Im => Complex64::new(v.im, 0.0),
                UnaryOp::Sign => sign(v),
                UnaryOp::Sqrt => v.sqrt(),
                UnaryOp::Exp => v.exp(),
                UnaryOp::Log => {
                    if v == Complex64::ZERO {
                        return Err(EvalError::Domain("log of zero".into()));
                    }
                    v.ln()
                }
                UnaryOp::Sin => v.sin(),
                UnaryOp::Cos => v.cos(),
            })
        }
        ExprAst::Binary(op, lhs, rhs) => {
            let a = eval(lhs, bindings)?;
            let b = eval(rhs, bindings)?;
            match op {
                BinaryOp::Add => Ok(a + b),
                BinaryOp::Sub => Ok(a - b),
                BinaryOp::Mul => Ok(a * b),
                BinaryOp::Div => {
                    if b == Complex64::ZERO {
                        return Err(EvalError::Domain("division by zero".into()));
                    }
                    Ok(a / b)
                }
                BinaryOp::Pow => pow(a, b),
            }
        }
    }
}

/// Fully parenthesized canonical text; `parse(print(ast))` is structurally
/// equal to `ast` for every tree the parser itself can produce.
pub fn print(ast: &ExprAst) -> String {
    match ast {
        ExprAst::Literal(c) => {
            if *c == Complex64::i() {
                "i".to_string()
            } else if c.im == 0.0 && c.re >= 0.0 {
                format!("{}", c.re)
            } else {
                // Not directly producible by the parser; spell it out as the
                // equivalent composed expression.
                format!("({} + ({} * i))", c.re, c.im)
            }
        }
        ExprAst::Var(v) => v.to_string(),
        // Parenthesized so a negation can sit under `^`, which binds tighter
        // than unary minus.
        ExprAst::Unary(UnaryOp::Neg, child) => format!("(-{})", print(child)),
        ExprAst::Unary(op, child) => {
            format!(
                "{}({})",
                op.function_name().expect("named function"),
                print(child)
            )
        }
        ExprAst::Binary(op, lhs, rhs) => {
            format!("({} {} {})", print(lhs), op.symbol(), print(rhs))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn eval_seq(text: &str, n: u64) -> Complex64 {
        let ast = parse(text, ParseContext::Sequence).unwrap();
        eval(&ast, &Bindings::sequence(n)).unwrap()
    }

    #[test]
    fn parses_variable() {
        assert_eq!(parse("n", ParseContext::Sequence).unwrap(), ExprAst::Var(VarName::N));
    }

    #[test]
    fn parses_structural_example() {
        let ast = parse("(-1)^n * n^2", ParseContext::Sequence).unwrap();
        let expected = ExprAst::Binary(
            BinaryOp::Mul,
            Box::new(ExprAst::Binary(
                BinaryOp::Pow,
                Box::new(ExprAst::Unary(
                    UnaryOp::Neg,
                    Box::new(ExprAst::Literal(c(1.0, 0.0))),
                )),
                Box::new(ExprAst::Var(VarName::N)),
            )),
            Box::new(ExprAst::Binary(
                BinaryOp::Pow,
                Box::new(ExprAst::Var(VarName::N)),
                Box::new(ExprAst::Literal(c(2.0, 0.0))),
            )),
        );
        assert_eq!(ast, expected);
    }

    #[test]
    fn context_rejects_foreign_variables() {
        assert!(parse("exp(i*z) / (1 + abs(z))", ParseContext::Plane).is_ok());
        let err = parse("exp(i*z) / (1 + abs(z))", ParseContext::Sequence).unwrap_err();
        assert_eq!(err.position, 6);
        assert!(err.found.contains('z'));
    }

    #[test]
    fn precedence_golden_values() {
        assert_eq!(eval_seq("1+2*3^2", 1), c(19.0, 0.0));
        assert_eq!(eval_seq("2^3^2", 1), c(512.0, 0.0));
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        // -1^2 = -(1^2)
        assert_eq!(eval_seq("-1^2", 1), c(-1.0, 0.0));
    }

    #[test]
    fn integer_power_is_exact() {
        assert_eq!(eval_seq("(-1)^n * n^2", 3), c(-9.0, 0.0));
        assert_eq!(eval_seq("(-1)^n", 1000001), c(-1.0, 0.0));
    }

    #[test]
    fn evaluates_complex_exponential() {
        let v = eval_seq("exp(i*n)/n", 1);
        assert!((v - c(0.5403023058681398, 0.8414709848078965)).norm() < 1e-9);
    }

    #[test]
    fn sign_convention() {
        assert_eq!(eval_seq("sign(0)", 1), c(0.0, 0.0));
        let s = eval_seq("sign(3 - 4*i)", 1);
        assert!((s - c(0.6, -0.8)).norm() < 1e-15);
        assert!((s.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_power_conventions() {
        assert_eq!(eval_seq("0^0", 1), c(1.0, 0.0));
        assert_eq!(eval_seq("0^2", 1), c(0.0, 0.0));
        assert_eq!(eval_seq("0^0.5", 1), c(0.0, 0.0));
        let ast = parse("0^(-1)", ParseContext::Sequence).unwrap();
        assert!(matches!(
            eval(&ast, &Bindings::sequence(1)),
            Err(EvalError::Domain(_))
        ));
        let ast = parse("log(0)", ParseContext::Sequence).unwrap();
        assert!(matches!(
            eval(&ast, &Bindings::sequence(1)),
            Err(EvalError::Domain(_))
        ));
    }

    #[test]
    fn no_implicit_multiplication() {
        assert!(parse("2n", ParseContext::Sequence).is_err());
    }

    #[test]
    fn scientific_literal_vs_euler() {
        assert_eq!(eval_seq("2e3", 1), c(2000.0, 0.0));
        let euler = eval_seq("2*e", 1);
        assert!((euler.re - 2.0 * std::f64::consts::E).abs() < 1e-15);
    }

    #[test]
    fn z_is_sugar_for_x_plus_iy() {
        let ast = parse("z * conj(z)", ParseContext::Plane).unwrap();
        let v = eval(&ast, &Bindings::plane(3.0, 4.0)).unwrap();
        assert!((v - c(25.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn print_examples() {
        assert_eq!(print(&ExprAst::Var(VarName::N)), "n");
        let sum = ExprAst::Binary(
            BinaryOp::Add,
            Box::new(ExprAst::Literal(c(1.0, 0.0))),
            Box::new(ExprAst::Var(VarName::N)),
        );
        assert_eq!(print(&sum), "(1 + n)");
    }

    #[test]
    fn print_parse_round_trip_on_samples() {
        for text in [
            "n",
            "(-1)^n * n^2",
            "exp(i*n)/n",
            "1+2*3^2",
            "2^3^2",
            "sign(n - 3)",
            "sqrt(abs(n))^0.5",
            "-(n + 1)",
            "1e-3 * n",
            "pi * e",
        ] {
            let ast = parse(text, ParseContext::Sequence).unwrap();
            let printed = print(&ast);
            let reparsed = parse(&printed, ParseContext::Sequence)
                .unwrap_or_else(|e| panic!("printed form `{printed}` failed: {e}"));
            assert_eq!(reparsed, ast, "round trip through `{printed}`");
        }
    }

    #[test]
    fn parse_error_positions() {
        let err = parse("1 + ", ParseContext::Sequence).unwrap_err();
        assert_eq!(err.position, 4);
        let err = parse("foo(1)", ParseContext::Sequence).unwrap_err();
        assert_eq!(err.position, 0);
    }
}
