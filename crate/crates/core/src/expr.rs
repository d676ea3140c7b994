//! A small expression language over real oracles.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' digits)?
//! atom    := literal | 'pi' | 'e' | 'sqrt2' | func '(' expr ')' | '(' expr ')'
//! func    := 'exp' | 'cbrt' | 'sqrt'
//! ```
//!
//! Literals are dyadic (`3`, `0.375`, `5*2^-7`); `1/3` is a quotient of two
//! literals. `exp` accepts `[-1, 1]`, `cbrt` and `sqrt` accept `[0, 1]`.

use thiserror::Error;

use crate::cost;
use crate::func::{cuberoot_machine, exp_machine, sqrt_machine, FuncError};
use crate::oracle::{Constant, OracleError, Precision, RealOracle};
use crate::Dyadic;

/// Extra probe depth granted to divisions beyond the requested precision.
pub const DIVISION_PROBE_SLACK: Precision = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error(transparent)]
    Func(#[from] FuncError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, ch) = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_ascii_digit() || chars[i].1 == '.') {
                i += 1;
            }
            let text: String = chars[start..i].iter().map(|c| c.1).collect();
            out.push((pos, Tok::Num(text)));
        } else if ch.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && chars[i].1.is_ascii_alphanumeric() {
                i += 1;
            }
            let text: String = chars[start..i].iter().map(|c| c.1).collect();
            out.push((pos, Tok::Ident(text)));
        } else {
            let op = match ch {
                '×' => '*',
                '÷' => '/',
                '−' => '-',
                '+' | '-' | '*' | '/' | '^' | '(' | ')' => ch,
                _ => return Err(ExprError::Parse { pos, msg: format!("unexpected character {ch:?}") }),
            };
            out.push((pos, Tok::Op(op)));
            i += 1;
        }
    }
    Ok(out)
}

/// Parsed expression tree.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Lit(Dyadic),
    Const(Constant),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Exp(Box<Expr>),
    Cbrt(Box<Expr>),
    Sqrt(Box<Expr>),
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.1)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.0)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Parse { pos: self.pos(), msg: msg.into() })
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
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

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.eat('^') {
            let pos = self.pos();
            return match self.toks.get(self.at) {
                Some((_, Tok::Num(text))) => match text.parse::<u32>() {
                    Ok(k) if k <= 64 => {
                        self.at += 1;
                        Ok(Expr::Pow(Box::new(base), k))
                    }
                    _ => Err(ExprError::Parse { pos, msg: format!("exponent must be an integer in 0..=64, got {text}") }),
                },
                _ => self.err("expected an integer exponent"),
            };
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let pos = self.pos();
        let tok = match self.toks.get(self.at) {
            Some((_, t)) => t.clone(),
            None => return self.err("unexpected end of input"),
        };
        self.at += 1;
        match tok {
            Tok::Num(text) => text
                .parse::<Dyadic>()
                .map(Expr::Lit)
                .map_err(|e| ExprError::Parse { pos, msg: e.to_string() }),
            Tok::Op('(') => {
                let inner = self.expr()?;
                if !self.eat(')') {
                    return self.err("expected ')'");
                }
                Ok(inner)
            }
            Tok::Ident(name) => match name.as_str() {
                "pi" => Ok(Expr::Const(Constant::Pi)),
                "e" => Ok(Expr::Const(Constant::E)),
                "sqrt2" => Ok(Expr::Const(Constant::Sqrt2)),
                "exp" | "cbrt" | "sqrt" => {
                    if !self.eat('(') {
                        return self.err(format!("expected '(' after {name}"));
                    }
                    let arg = Box::new(self.expr()?);
                    if !self.eat(')') {
                        return self.err("expected ')'");
                    }
                    Ok(match name.as_str() {
                        "exp" => Expr::Exp(arg),
                        "cbrt" => Expr::Cbrt(arg),
                        _ => Expr::Sqrt(arg),
                    })
                }
                _ => Err(ExprError::Parse { pos, msg: format!("unknown name {name:?}") }),
            },
            Tok::Op(c) => Err(ExprError::Parse { pos, msg: format!("unexpected {c:?}") }),
        }
    }
}

pub fn parse_expr(src: &str) -> Result<Expr, ExprError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, at: 0, end: src.len() };
    let e = p.expr()?;
    if p.at != p.toks.len() {
        return p.err("trailing input");
    }
    Ok(e)
}

/// An expression turned into an oracle, with every intermediate oracle kept
/// for query accounting.
pub struct Compiled {
    pub oracle: RealOracle,
    nodes: Vec<RealOracle>,
}

impl Compiled {
    /// Queries answered by all oracles in the tree.
    pub fn total_queries(&self) -> u64 {
        self.nodes.iter().map(RealOracle::query_count).sum()
    }
}

/// Builds the oracle for `e`. Divisions probe the divisor up to
/// `max_probe` bits before giving up.
pub fn compile(e: &Expr, max_probe: Precision) -> Result<Compiled, ExprError> {
    let mut nodes = Vec::new();
    let oracle = build(e, max_probe, &mut nodes)?;
    Ok(Compiled { oracle, nodes })
}

fn build(e: &Expr, max_probe: Precision, nodes: &mut Vec<RealOracle>) -> Result<RealOracle, ExprError> {
    let mut sub = |x: &Expr| build(x, max_probe, nodes);
    let o = match e {
        Expr::Lit(d) => RealOracle::from_dyadic(d.clone()),
        Expr::Const(c) => RealOracle::constant(*c),
        Expr::Neg(a) => sub(a)?.neg(),
        Expr::Add(a, b) => sub(a)?.add(&sub(b)?),
        Expr::Sub(a, b) => sub(a)?.sub(&sub(b)?),
        Expr::Mul(a, b) => sub(a)?.mul(&sub(b)?),
        Expr::Div(a, b) => sub(a)?.div(&sub(b)?, max_probe)?,
        Expr::Pow(a, k) => {
            let base = sub(a)?;
            let mut acc = RealOracle::from_i64(1);
            for _ in 0..*k {
                acc = acc.mul(&base);
            }
            acc
        }
        Expr::Exp(a) => exp_machine().lift(&sub(a)?)?,
        Expr::Cbrt(a) => cuberoot_machine().lift(&sub(a)?)?,
        Expr::Sqrt(a) => sqrt_machine().lift(&sub(a)?)?,
    };
    nodes.push(o.clone());
    Ok(o)
}

/// Result of evaluating an expression at one precision.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub value: Dyadic,
    pub queries: u64,
    pub bit_ops: u64,
}

/// A dyadic within `2^-n` of the expression's value.
pub fn eval_expr(src: &str, n: Precision) -> Result<Evaluation, ExprError> {
    let e = parse_expr(src)?;
    let (result, bit_ops) = cost::measure(|| -> Result<_, ExprError> {
        let c = compile(&e, n + DIVISION_PROBE_SLACK)?;
        let v = c.oracle.query(n);
        Ok((v, c.total_queries()))
    });
    let (value, queries) = result?;
    Ok(Evaluation { value, queries, bit_ops })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn within(v: &Dyadic, num: i64, den: i64, n: u32) -> bool {
        // |v - num/den| < 2^-n  <=>  |v den - num| 2^n < den
        let err = (v * &Dyadic::from_i64(den) - Dyadic::from_i64(num)).abs();
        err.mul_pow2(i64::from(n)) < Dyadic::from_i64(den)
    }

    #[test]
    fn parses_precedence() {
        let e = parse_expr("1 - 2 * 3^2").unwrap();
        let v = compile(&e, 64).unwrap().oracle.query(10);
        assert_eq!(v, Dyadic::from_i64(-17));
        let v = eval_expr("-(1/2)^3 + 1", 12).unwrap().value;
        assert!(within(&v, 7, 8, 12));
    }

    #[test]
    fn third_and_quotients() {
        let v = eval_expr("1/3", 30).unwrap().value;
        assert!(within(&v, 1, 3, 30));
        let v = eval_expr("(2 + 5) / (0.75 * 4)", 20).unwrap().value;
        assert!(within(&v, 7, 3, 20));
    }

    #[test]
    fn exp_of_one_against_taylor() {
        let v = eval_expr("exp(1)", 20).unwrap().value;
        // sum_{k<=15} 1/k! with tail below 2^-40
        let mut num = BigInt::from(0);
        let mut fact = BigInt::from(1);
        let big_n = 15u32;
        for k in (0..=big_n).rev() {
            num += (1..=big_n).filter(|j| *j > k).fold(BigInt::from(1), |a, j| a * j);
            if k > 0 {
                fact *= k;
            }
        }
        let reference = Dyadic::from_bigint(num).quotient_round(&Dyadic::from_bigint(fact), 60);
        assert!((v - reference).abs() < Dyadic::pow2(-20) - Dyadic::pow2(-38));
        let v = eval_expr("exp(0)", 5).unwrap().value;
        assert!((v - Dyadic::one()).abs() < Dyadic::pow2(-5));
    }

    #[test]
    fn cube_root_of_seven_eighths() {
        let v = eval_expr("cbrt(1 - (1/2)^3)", 30).unwrap().value;
        // bracket: lo^3 <= 7/8 <= hi^3 with hi - lo = 2^-40
        let seven_eighths = Dyadic::from_parts(7, -3);
        let (mut lo, mut hi) = (Dyadic::zero(), Dyadic::one());
        for _ in 0..40 {
            let mid = (&lo + &hi).mul_pow2(-1);
            if mid.pow(3) <= seven_eighths {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((&v - &lo).abs() < Dyadic::pow2(-30) - Dyadic::pow2(-40));
    }

    #[test]
    fn errors_are_reported() {
        assert!(matches!(parse_expr("1 +"), Err(ExprError::Parse { .. })));
        assert!(matches!(parse_expr("foo(1)"), Err(ExprError::Parse { .. })));
        assert!(matches!(parse_expr("0.1"), Err(ExprError::Parse { .. })));
        assert!(matches!(eval_expr("exp(3)", 10), Err(ExprError::Func(_))));
        assert!(matches!(eval_expr("1/(pi - pi)", 4), Err(ExprError::Oracle(_))));
        assert!(matches!(parse_expr("2^x"), Err(ExprError::Parse { .. })));
    }

    #[test]
    fn accounting_counts_queries() {
        let r = eval_expr("pi * e + sqrt2", 16).unwrap();
        assert!(r.queries >= 3);
        assert!(r.bit_ops > 0);
    }
}
