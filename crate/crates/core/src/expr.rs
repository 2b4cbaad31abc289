//! A small expression language over quasimodular forms and `q`-series.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ('^' natural)?
//! atom   := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
//! number := '-'? digits ('/' digits)?
//! ```

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::jacobi::{ck_lift_form, natural_lift, JacobiError, JacobiLikeForm, NaturalLift};
use crate::modular::{eisenstein, eta_inverse_power, FormError, ModularForm, QuasiModularForm};
use crate::series::{QSeries, Rational};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Number(Rational),
    Name(String),
    Call(String, Vec<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("parse error at byte {offset}: expected {}, found {found}", expected.join(" or "))]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<String>,
    pub found: String,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let found = match self.peek() {
            None => "end of input".to_string(),
            Some(c) => format!("'{c}'"),
        };
        ParseError { offset: self.pos, expected: expected.iter().map(|s| s.to_string()).collect(), found }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        while self.eat('*') {
            lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            self.skip_ws();
            let start = self.pos;
            let digits = self.digits();
            if digits.is_empty() {
                return Err(self.error(&["exponent"]));
            }
            let e: u32 = digits.parse().map_err(|_| ParseError {
                offset: start,
                expected: vec!["exponent below 2^32".to_string()],
                found: digits.to_string(),
            })?;
            return Ok(Expr::Pow(Box::new(base), e));
        }
        Ok(base)
    }

    fn digits(&mut self) -> &'a str {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        &self.src[start..self.pos]
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error(&["')'", "operator"]));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == '-' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == '_') {
                    self.pos += 1;
                }
                let name = self.src[start..self.pos].to_string();
                if self.eat('(') {
                    let mut args = vec![self.expr()?];
                    while self.eat(',') {
                        args.push(self.expr()?);
                    }
                    if !self.eat(')') {
                        return Err(self.error(&["','", "')'", "operator"]));
                    }
                    Ok(Expr::Call(name, args))
                } else {
                    Ok(Expr::Name(name))
                }
            }
            _ => Err(self.error(&["number", "name", "'('"])),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let negative = self.peek() == Some('-');
        if negative {
            self.pos += 1;
        }
        let num = self.digits();
        if num.is_empty() {
            return Err(self.error(&["digit"]));
        }
        let mut value = Rational::from_integer(num.parse::<BigInt>().expect("digits"));
        // a '/' directly after the digits continues the literal
        if self.peek() == Some('/') {
            self.pos += 1;
            let den = self.digits();
            if den.is_empty() {
                return Err(self.error(&["digit"]));
            }
            let den: BigInt = den.parse().expect("digits");
            if den.is_zero() {
                return Err(ParseError {
                    offset: self.pos - 1,
                    expected: vec!["nonzero denominator".to_string()],
                    found: "0".to_string(),
                });
            }
            value /= Rational::from_integer(den);
        }
        Ok(Expr::Number(if negative { -value } else { value }))
    }
}

pub fn parse_expression(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { src: text, pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(p.error(&["operator", "end of input"]));
    }
    Ok(e)
}

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) => 2,
            Expr::Pow(..) => 3,
            _ => 4,
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            f.write_str("(")?;
            self.write(f, 0)?;
            return f.write_str(")");
        }
        match self {
            Expr::Number(r) => write!(f, "{r}"),
            Expr::Name(n) => f.write_str(n),
            Expr::Call(n, args) => {
                write!(f, "{n}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    a.write(f, 0)?;
                }
                f.write_str(")")
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                a.write(f, 1)?;
                f.write_str(if matches!(self, Expr::Add(..)) { " + " } else { " - " })?;
                b.write(f, 2)
            }
            Expr::Mul(a, b) => {
                a.write(f, 2)?;
                f.write_str("*")?;
                b.write(f, 3)
            }
            Expr::Pow(a, e) => {
                a.write(f, 4)?;
                write!(f, "^{e}")
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write(f, 0)
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EvalError {
    #[error("unknown name {0}")]
    UnknownName(String),
    #[error("{name} takes {expected} argument(s), got {got}")]
    Arity { name: String, expected: String, got: usize },
    #[error("weight error: {0}")]
    WeightError(String),
    #[error("not in space: {0}")]
    NotInSpace(String),
    #[error("type error: {0}")]
    Type(String),
    #[error(transparent)]
    Jacobi(#[from] JacobiError),
}

impl From<FormError> for EvalError {
    fn from(e: FormError) -> Self {
        match e {
            FormError::NotInSpace { .. } | FormError::InsufficientOrder { .. } => EvalError::NotInSpace(e.to_string()),
            _ => EvalError::WeightError(e.to_string()),
        }
    }
}

/// Result of evaluating an expression.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    /// A homogeneous quasimodular form; weight 0 for rational constants.
    Form(QuasiModularForm),
    /// A bare `q`-series (mixed weights or `eta` powers).
    Series(QSeries<Rational>),
    Jacobi(JacobiLikeForm<QuasiModularForm>),
    Natural(NaturalLift),
}

impl Value {
    fn constant(r: Rational) -> Self {
        Value::Form(QuasiModularForm::from_terms(0, [((0, 0, 0), r)]))
    }

    fn kind(&self) -> &'static str {
        match self {
            Value::Form(_) => "form",
            Value::Series(_) => "series",
            Value::Jacobi(_) | Value::Natural(_) => "Jacobi-like form",
        }
    }

    fn as_constant(&self) -> Option<Rational> {
        match self {
            Value::Form(f) if f.weight() == 0 || f.is_zero() => {
                Some(f.monomials().first().map(|(_, c)| c.clone()).unwrap_or_else(Rational::zero))
            }
            _ => None,
        }
    }

    /// The `q`-expansion of a form or series value.
    pub fn expansion(&self, q_order: usize) -> Option<QSeries<Rational>> {
        match self {
            Value::Form(f) => Some(f.expand(q_order)),
            Value::Series(s) => Some(s.truncate(q_order)),
            _ => None,
        }
    }

    pub fn jacobi(&self) -> Option<&JacobiLikeForm<QuasiModularForm>> {
        match self {
            Value::Jacobi(j) => Some(j),
            Value::Natural(n) => Some(&n.form),
            _ => None,
        }
    }

    pub fn to_json(&self, q_order: usize) -> serde_json::Value {
        match self {
            Value::Form(f) => serde_json::json!({
                "kind": "form",
                "weight": f.weight(),
                "quasimodular": f.render(),
                "modular": f.is_modular(),
                "expansion": crate::json::series(&f.expand(q_order)),
            }),
            Value::Series(s) => serde_json::json!({
                "kind": "series",
                "expansion": crate::json::series(&s.truncate(q_order)),
            }),
            Value::Jacobi(j) => jacobi_json(j, q_order, None),
            Value::Natural(n) => jacobi_json(&n.form, q_order, Some(&n.corrections)),
        }
    }

    pub fn render(&self, q_order: usize) -> String {
        match self {
            Value::Form(f) => format!(
                "weight {}: {}\n{}",
                f.weight(),
                f.render(),
                crate::series::format_series(&f.expand(q_order), "q")
            ),
            Value::Series(s) => crate::series::format_series(&s.truncate(q_order), "q"),
            Value::Jacobi(j) => render_jacobi(j, q_order),
            Value::Natural(n) => {
                let mut out = render_jacobi(&n.form, q_order);
                for (l, f) in n.nonzero_corrections() {
                    out.push_str(&format!("\nf_{}: {}", 2 * l, f.render_delta_basis()));
                }
                out
            }
        }
    }
}

fn jacobi_json(
    j: &JacobiLikeForm<QuasiModularForm>,
    q_order: usize,
    corrections: Option<&[ModularForm]>,
) -> serde_json::Value {
    let mut v = serde_json::json!({
        "kind": "jacobi",
        "weight": j.weight(),
        "index": j.index().to_string(),
        "parity": j.parity().to_string(),
        "coefficients": j.coeffs().iter().enumerate().map(|(n, c)| serde_json::json!({
            "z_power": n,
            "weight": c.weight(),
            "quasimodular": c.render(),
            "expansion": crate::json::series(&c.expand(q_order)),
        })).collect::<Vec<_>>(),
    });
    if let Some(cs) = corrections {
        v["corrections"] = cs.iter().map(|f| serde_json::Value::String(f.render_delta_basis())).collect();
    }
    v
}

fn render_jacobi(j: &JacobiLikeForm<QuasiModularForm>, q_order: usize) -> String {
    let mut lines = vec![format!("weight {}, index {}, {} in z", j.weight(), j.index(), j.parity())];
    for (n, c) in j.coeffs().iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        lines.push(format!(
            "z^{n}: {}   [{}]",
            c.render(),
            crate::series::format_series(&c.expand(q_order), "q")
        ));
    }
    lines.join("\n")
}

/// Evaluation context: truncation orders for series and lifts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EvalConfig {
    pub q_order: usize,
    pub z_order: usize,
}

pub fn evaluate(e: &Expr, cfg: &EvalConfig) -> Result<Value, EvalError> {
    match e {
        Expr::Number(r) => Ok(Value::constant(r.clone())),
        Expr::Name(n) => name_value(n, cfg),
        Expr::Add(a, b) => add(evaluate(a, cfg)?, evaluate(b, cfg)?, cfg, false),
        Expr::Sub(a, b) => add(evaluate(a, cfg)?, evaluate(b, cfg)?, cfg, true),
        Expr::Mul(a, b) => mul(evaluate(a, cfg)?, evaluate(b, cfg)?, cfg),
        Expr::Pow(a, n) => match evaluate(a, cfg)? {
            Value::Form(f) => Ok(Value::Form(f.pow(*n))),
            Value::Series(s) => Ok(Value::Series(s.pow(*n))),
            other => Err(EvalError::Type(format!("cannot raise a {} to a power", other.kind()))),
        },
        Expr::Call(name, args) => call(name, args, cfg),
    }
}

fn name_value(n: &str, cfg: &EvalConfig) -> Result<Value, EvalError> {
    if n == "Delta" {
        return Ok(Value::Form(ModularForm::delta().to_quasi()));
    }
    if let Some(k) = n.strip_prefix('E').and_then(|k| k.parse::<u32>().ok()) {
        if k >= 2 && k % 2 == 0 && !n[1..].starts_with('0') {
            return Ok(Value::Form(eisenstein(k, cfg.q_order)));
        }
    }
    Err(EvalError::UnknownName(n.to_string()))
}

fn add(a: Value, b: Value, cfg: &EvalConfig, subtract: bool) -> Result<Value, EvalError> {
    let minus = Rational::from_integer((-1).into());
    match (a, b) {
        (Value::Form(f), Value::Form(g)) if f.weight() == g.weight() || f.is_zero() || g.is_zero() => {
            let g = if subtract { g.scale(&minus) } else { g };
            Ok(Value::Form(if f.is_zero() { g } else { f.add(&g) }))
        }
        (Value::Jacobi(f), Value::Jacobi(g)) => {
            let g = if subtract { g.scaled(&minus) } else { g };
            Ok(Value::Jacobi(f.add(&g)?))
        }
        (a, b) => {
            let (Some(x), Some(y)) = (a.expansion(cfg.q_order), b.expansion(cfg.q_order)) else {
                return Err(EvalError::Type(format!("cannot add a {} and a {}", a.kind(), b.kind())));
            };
            Ok(Value::Series(if subtract { x.sub(&y) } else { x.add(&y) }))
        }
    }
}

fn mul(a: Value, b: Value, cfg: &EvalConfig) -> Result<Value, EvalError> {
    if let Some(c) = a.as_constant() {
        if let Some(j) = b.jacobi() {
            return Ok(Value::Jacobi(j.scaled(&c)));
        }
    }
    if let Some(c) = b.as_constant() {
        if let Some(j) = a.jacobi() {
            return Ok(Value::Jacobi(j.scaled(&c)));
        }
    }
    match (a, b) {
        (Value::Form(f), Value::Form(g)) => Ok(Value::Form(f.mul(&g))),
        (a, b) => {
            let (Some(x), Some(y)) = (a.expansion(cfg.q_order), b.expansion(cfg.q_order)) else {
                return Err(EvalError::Type(format!("cannot multiply a {} and a {}", a.kind(), b.kind())));
            };
            Ok(Value::Series(x.mul(&y)))
        }
    }
}

fn arity(name: &str, args: &[Expr], range: std::ops::RangeInclusive<usize>) -> Result<(), EvalError> {
    if range.contains(&args.len()) {
        return Ok(());
    }
    let expected =
        if range.start() == range.end() { range.start().to_string() } else { format!("{} or {}", range.start(), range.end()) };
    Err(EvalError::Arity { name: name.to_string(), expected, got: args.len() })
}

fn modular_arg(v: Value, what: &str) -> Result<ModularForm, EvalError> {
    match v {
        Value::Form(f) => f
            .to_modular()
            .ok_or_else(|| EvalError::WeightError(format!("{what} needs a modular form, got {}", f.render()))),
        other => Err(EvalError::Type(format!("{what} needs a modular form, got a {}", other.kind()))),
    }
}

fn call(name: &str, args: &[Expr], cfg: &EvalConfig) -> Result<Value, EvalError> {
    match name {
        "D" => {
            arity(name, args, 1..=1)?;
            match evaluate(&args[0], cfg)? {
                Value::Form(f) => Ok(Value::Form(f.derive())),
                Value::Series(s) => Ok(Value::Series(s.derive())),
                other => Err(EvalError::Type(format!("D is not defined on a {}", other.kind()))),
            }
        }
        "CK" => {
            arity(name, args, 1..=2)?;
            let f = modular_arg(evaluate(&args[0], cfg)?, "CK")?;
            let lambda = match args.get(1) {
                None => Rational::one(),
                Some(l) => evaluate(l, cfg)?
                    .as_constant()
                    .ok_or_else(|| EvalError::Type("the CK index must be a rational constant".to_string()))?,
            };
            Ok(Value::Jacobi(ck_lift_form(&f, &lambda, cfg.z_order)?))
        }
        "natural" => {
            arity(name, args, 1..=1)?;
            let f = modular_arg(evaluate(&args[0], cfg)?, "natural")?;
            Ok(Value::Natural(natural_lift(&f, cfg.z_order)?))
        }
        "etaInvPow" => {
            arity(name, args, 1..=1)?;
            let m = evaluate(&args[0], cfg)?
                .as_constant()
                .filter(|c| c.is_integer() && !c.is_negative())
                .and_then(|c| c.to_integer().to_u32())
                .ok_or_else(|| EvalError::Type("etaInvPow needs a nonnegative integer".to_string()))?;
            Ok(Value::Series(eta_inverse_power(m, cfg.q_order)))
        }
        _ => Err(EvalError::UnknownName(name.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::{int, rat};

    fn cfg() -> EvalConfig {
        EvalConfig { q_order: 4, z_order: 4 }
    }

    #[test]
    fn precedence_and_associativity() {
        let e = parse_expression("E4^3 - 728*Delta").unwrap();
        assert_eq!(
            e,
            Expr::Sub(
                Box::new(Expr::Pow(Box::new(Expr::Name("E4".into())), 3)),
                Box::new(Expr::Mul(Box::new(Expr::Number(int(728))), Box::new(Expr::Name("Delta".into())))),
            )
        );
        assert_eq!(e.to_string(), "E4^3 - 728*Delta");
        let e = parse_expression("1 - (2 - 3)").unwrap();
        assert_eq!(e.to_string(), "1 - (2 - 3)");
        assert_eq!(parse_expression("-1/12*E6").unwrap().to_string(), "-1/12*E6");
    }

    #[test]
    fn parse_errors() {
        let err = parse_expression("E4 + * Delta").unwrap_err();
        assert_eq!(err.offset, 5);
        assert!(err.expected.contains(&"name".to_string()));
        assert_eq!(parse_expression("D(E4").unwrap_err().offset, 4);
        assert_eq!(parse_expression("E4 E6").unwrap_err().offset, 3);
        assert!(parse_expression("1/0").is_err());
    }

    #[test]
    fn nested_derivative() {
        let e = parse_expression("D(D(E4))").unwrap();
        let v = evaluate(&e, &cfg()).unwrap();
        assert_eq!(v, Value::Form(ModularForm::e4().to_quasi().derive_n(2)));
    }

    #[test]
    fn ck_z2_entry() {
        let v = evaluate(&parse_expression("CK(E4)").unwrap(), &cfg()).unwrap();
        let expected = QuasiModularForm::e2()
            .mul(&ModularForm::e4().to_quasi())
            .sub(&ModularForm::e6().to_quasi())
            .scale(&rat(1, 12));
        assert_eq!(v.jacobi().unwrap().coeff(2), &expected);
    }

    #[test]
    fn natural_of_zero() {
        let v = evaluate(&parse_expression("natural(0)").unwrap(), &cfg()).unwrap();
        assert!(v.jacobi().unwrap().is_zero());
    }

    #[test]
    fn evaluation_errors() {
        let run = |s: &str| evaluate(&parse_expression(s).unwrap(), &cfg());
        assert!(matches!(run("E3"), Err(EvalError::UnknownName(_))));
        assert!(matches!(run("CK(E2)"), Err(EvalError::WeightError(_))));
        assert!(matches!(run("D(E4, E6)"), Err(EvalError::Arity { .. })));
        assert!(matches!(run("CK(E4) + E4"), Err(EvalError::Type(_))));
        assert!(matches!(run("etaInvPow(1/2)"), Err(EvalError::Type(_))));
    }

    #[test]
    fn mixed_weights_fall_back_to_series() {
        let v = evaluate(&parse_expression("E4 + 1").unwrap(), &cfg()).unwrap();
        assert_eq!(v.expansion(2).unwrap(), QSeries::from_ints(&[2, 240, 2160]));
    }
}
