//! Arithmetic expressions in the single variable `x`.
//!
//! Drift and diffusion coefficients are supplied as text and parsed by
//! recursive descent over the grammar
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-'? power
//! power  := atom ('^' factor)?          right-associative
//! atom   := number | 'x' | fn '(' expr ')' | '(' expr ')'
//! fn     := exp | log | sqrt | abs | sin | cos
//! ```
//!
//! Parse failures carry a 1-based character position and an
//! expected-token message; evaluation failures carry the offending `x`.

use crate::error::{Error, Result};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sqrt,
    Abs,
    Sin,
    Cos,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        match name {
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            "sqrt" => Some(Func::Sqrt),
            "abs" => Some(Func::Abs),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            _ => None,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
            Func::Sin => "sin",
            Func::Cos => "cos",
        }
    }
}

/// Parsed expression tree.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Var,
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0, depth: 0 };
        let e = p.expr()?;
        match p.peek() {
            Token::Eof => Ok(e),
            t => Err(Error::Parse {
                position: p.position(),
                expected: format!("end of input, found {}", t.describe()),
            }),
        }
    }

    /// Evaluate at `x`. Any non-finite intermediate (division by zero,
    /// log/sqrt outside their domain, overflow) is a domain error.
    pub fn eval(&self, x: f64) -> Result<f64> {
        let v = self.eval_inner(x)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::EvalDomain { what: "non-finite result", x })
        }
    }

    fn eval_inner(&self, x: f64) -> Result<f64> {
        let v = match self {
            Expr::Number(v) => *v,
            Expr::Var => x,
            Expr::Neg(e) => -e.eval_inner(x)?,
            Expr::Binary(op, a, b) => {
                let a = a.eval_inner(x)?;
                let b = b.eval_inner(x)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(Error::EvalDomain { what: "division by zero", x });
                        }
                        a / b
                    }
                    BinOp::Pow => {
                        let v = a.powf(b);
                        if v.is_nan() {
                            return Err(Error::EvalDomain {
                                what: "fractional power of a negative base",
                                x,
                            });
                        }
                        v
                    }
                }
            }
            Expr::Call(f, e) => {
                let a = e.eval_inner(x)?;
                match f {
                    Func::Exp => a.exp(),
                    Func::Log => {
                        if a <= 0.0 {
                            return Err(Error::EvalDomain { what: "log of a non-positive value", x });
                        }
                        a.ln()
                    }
                    Func::Sqrt => {
                        if a < 0.0 {
                            return Err(Error::EvalDomain { what: "sqrt of a negative value", x });
                        }
                        a.sqrt()
                    }
                    Func::Abs => a.abs(),
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                }
            }
        };
        if v.is_nan() {
            return Err(Error::EvalDomain { what: "NaN intermediate", x });
        }
        Ok(v)
    }
}

/// Fully parenthesized form; reparsing yields a structurally identical tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Number(v) => write!(f, "{v}"),
            Expr::Var => write!(f, "x"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, a, b) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                    BinOp::Pow => "^",
                };
                write!(f, "({a}{s}{b})")
            }
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Number(v) => format!("number {v}"),
            Token::Ident(s) => format!("identifier '{s}'"),
            Token::Plus => "'+'".into(),
            Token::Minus => "'-'".into(),
            Token::Star => "'*'".into(),
            Token::Slash => "'/'".into(),
            Token::Caret => "'^'".into(),
            Token::LParen => "'('".into(),
            Token::RParen => "')'".into(),
            Token::Eof => "end of input".into(),
        }
    }
}

/// (token, 1-based character position of its first character); the Eof
/// token sits one past the end.
fn tokenize(src: &str) -> Result<Vec<(Token, usize)>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let pos = i + 1;
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push((Token::Plus, pos));
                i += 1;
            }
            '-' => {
                out.push((Token::Minus, pos));
                i += 1;
            }
            '*' => {
                out.push((Token::Star, pos));
                i += 1;
            }
            '/' => {
                out.push((Token::Slash, pos));
                i += 1;
            }
            '^' => {
                out.push((Token::Caret, pos));
                i += 1;
            }
            '(' => {
                out.push((Token::LParen, pos));
                i += 1;
            }
            ')' => {
                out.push((Token::RParen, pos));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                if i < chars.len() && chars[i] == '.' {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
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
                let v: f64 = text.parse().map_err(|_| Error::Parse {
                    position: pos,
                    expected: format!("a number, found '{text}'"),
                })?;
                out.push((Token::Number(v), pos));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let name: String = chars[start..i].iter().collect();
                out.push((Token::Ident(name), pos));
            }
            other => {
                return Err(Error::Parse {
                    position: pos,
                    expected: format!("a token, found '{other}'"),
                })
            }
        }
    }
    out.push((Token::Eof, chars.len() + 1));
    Ok(out)
}

/// Nesting bound keeping hostile inputs from overflowing the stack;
/// every recursion cycle passes through `factor`.
const MAX_PARSE_DEPTH: usize = 512;

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].0
    }

    fn position(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].0.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn expect_rparen(&mut self) -> Result<()> {
        if matches!(self.peek(), Token::RParen) {
            self.bump();
            Ok(())
        } else {
            Err(Error::Parse {
                position: self.position(),
                expected: format!("')', found {}", self.peek().describe()),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Token::Plus => BinOp::Add,
                Token::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Token::Star => BinOp::Mul,
                Token::Slash => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr> {
        self.depth += 1;
        if self.depth > MAX_PARSE_DEPTH {
            return Err(Error::Parse {
                position: self.position(),
                expected: "a shallower expression (nesting limit reached)".into(),
            });
        }
        let out = if matches!(self.peek(), Token::Minus) {
            self.bump();
            let inner = self.power()?;
            Ok(Expr::Neg(Box::new(inner)))
        } else {
            self.power()
        };
        self.depth -= 1;
        out
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if matches!(self.peek(), Token::Caret) {
            self.bump();
            let exponent = self.factor()?;
            Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        let position = self.position();
        match self.bump() {
            Token::Number(v) => Ok(Expr::Number(v)),
            Token::Ident(name) => {
                if matches!(self.peek(), Token::LParen) {
                    let func = Func::from_name(&name)
                        .ok_or(Error::UnknownFunction { name: name.clone(), position })?;
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    Ok(Expr::Call(func, Box::new(arg)))
                } else if name == "x" {
                    Ok(Expr::Var)
                } else if Func::from_name(&name).is_some() {
                    Err(Error::Parse {
                        position: self.position(),
                        expected: format!("'(' after function '{name}'"),
                    })
                } else {
                    Err(Error::UnknownIdentifier { name, position })
                }
            }
            Token::LParen => {
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            t => Err(Error::Parse {
                position,
                expected: format!("a number, 'x', a function call, or '(', found {}", t.describe()),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn eval(src: &str, x: f64) -> Result<f64> {
        Expr::parse(src).and_then(|e| e.eval(x))
    }

    #[test]
    fn basic_coefficients() {
        assert_eq!(eval("1/x", 2.0).unwrap(), 0.5);
        assert_eq!(eval("-x/2", 4.0).unwrap(), -2.0);
        assert_eq!(eval("exp(x^2/2)", 0.0).unwrap(), 1.0);
    }

    #[test]
    fn power_is_right_associative() {
        assert_eq!(eval("2^3^2", 0.0).unwrap(), 512.0);
    }

    #[test]
    fn unary_minus_binds_tighter_than_division() {
        // reads as (-x)/2, not -(x/2) applied differently
        let e = Expr::parse("-x/2").unwrap();
        assert_eq!(
            e,
            Expr::Binary(
                BinOp::Div,
                Box::new(Expr::Neg(Box::new(Expr::Var))),
                Box::new(Expr::Number(2.0))
            )
        );
    }

    #[test]
    fn unclosed_paren_reports_position_past_end() {
        match Expr::parse("log(x").unwrap_err() {
            Error::Parse { position, expected } => {
                assert_eq!(position, 6);
                assert!(expected.starts_with("')'"), "{expected}");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn unknown_function_and_identifier() {
        assert!(matches!(
            Expr::parse("tan(x)").unwrap_err(),
            Error::UnknownFunction { .. }
        ));
        assert!(matches!(
            Expr::parse("2*y").unwrap_err(),
            Error::UnknownIdentifier { .. }
        ));
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(eval("1/x", 0.0).unwrap_err(), Error::EvalDomain { .. }));
        assert_eq!(eval("sqrt(abs(x))", -4.0).unwrap(), 2.0);
        assert!(matches!(eval("x^0.5", -1.0).unwrap_err(), Error::EvalDomain { .. }));
        assert!(matches!(eval("log(x)", -1.0).unwrap_err(), Error::EvalDomain { .. }));
        assert!(matches!(eval("exp(x)", 1e9).unwrap_err(), Error::EvalDomain { .. }));
    }

    fn expr_strategy() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0u32..1000u32, 0u32..1000u32)
                .prop_map(|(a, b)| Expr::Number(f64::from(a) + f64::from(b) / 1024.0)),
            Just(Expr::Var),
        ];
        leaf.prop_recursive(6, 64, 8, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                (inner.clone(), inner.clone(), 0usize..5).prop_map(|(a, b, op)| {
                    let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow][op];
                    Expr::Binary(op, Box::new(a), Box::new(b))
                }),
                (inner, 0usize..6).prop_map(|(a, f)| {
                    let f = [Func::Exp, Func::Log, Func::Sqrt, Func::Abs, Func::Sin, Func::Cos][f];
                    Expr::Call(f, Box::new(a))
                }),
            ]
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn display_round_trips(e in expr_strategy()) {
            let printed = e.to_string();
            let reparsed = Expr::parse(&printed).unwrap();
            prop_assert_eq!(reparsed, e);
        }

        #[test]
        fn parser_never_panics(src in ".*") {
            let _ = Expr::parse(&src);
        }

        #[test]
        fn eval_never_panics(e in expr_strategy(), x in -1e3f64..1e3) {
            let _ = e.eval(x);
        }
    }
}
