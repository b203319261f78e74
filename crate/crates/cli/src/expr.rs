//! Expression language for symbols: complex-valued expressions over `z` with
//! `conj`, `re`, `im`, `abs`, `abs2`, `exp`, `sin`, `cos`, the constant `i`,
//! numeric literals, `+ - * /`, integer powers with `^`, and parentheses.
//! Everything type-checks to a function from the plane to the plane by
//! construction; parse errors carry positions.

use std::fmt;
use std::sync::Arc;

use fockbench_core::{c64, Complex64};
use fockbench_core::symbol::Symbol;

#[derive(Clone, Debug)]
pub enum Expr {
    Z,
    I,
    Num(f64),
    Neg(Arc<Expr>),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    Pow(Arc<Expr>, u32),
    Call(Func, Arc<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Conj,
    Re,
    Im,
    Abs,
    Abs2,
    Exp,
    Sin,
    Cos,
}

impl Expr {
    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            Expr::Z => z,
            Expr::I => c64(0.0, 1.0),
            Expr::Num(x) => c64(*x, 0.0),
            Expr::Neg(e) => -e.eval(z),
            Expr::Add(a, b) => a.eval(z) + b.eval(z),
            Expr::Sub(a, b) => a.eval(z) - b.eval(z),
            Expr::Mul(a, b) => a.eval(z) * b.eval(z),
            Expr::Div(a, b) => a.eval(z) / b.eval(z),
            Expr::Pow(e, n) => e.eval(z).powu(*n),
            Expr::Call(f, e) => {
                let v = e.eval(z);
                match f {
                    Func::Conj => v.conj(),
                    Func::Re => c64(v.re, 0.0),
                    Func::Im => c64(v.im, 0.0),
                    Func::Abs => c64(v.norm(), 0.0),
                    Func::Abs2 => c64(v.norm_sqr(), 0.0),
                    Func::Exp => v.exp(),
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub at: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "expression error at byte {}: {}", self.at, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                out.push((i, Tok::Plus));
                i += 1;
            }
            '-' => {
                out.push((i, Tok::Minus));
                i += 1;
            }
            '*' => {
                out.push((i, Tok::Star));
                i += 1;
            }
            '/' => {
                out.push((i, Tok::Slash));
                i += 1;
            }
            '^' => {
                out.push((i, Tok::Caret));
                i += 1;
            }
            '(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            ')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_digit()
                        || bytes[i] == b'.'
                        || bytes[i] == b'e'
                        || bytes[i] == b'E'
                        || ((bytes[i] == b'+' || bytes[i] == b'-')
                            && i > start
                            && (bytes[i - 1] == b'e' || bytes[i - 1] == b'E')))
                {
                    i += 1;
                }
                let text = &src[start..i];
                let v: f64 = text.parse().map_err(|_| ParseError {
                    at: start,
                    message: format!("bad number literal '{text}'"),
                })?;
                out.push((start, Tok::Num(v)));
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let start = i;
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(src[start..i].to_lowercase())));
            }
            other => {
                return Err(ParseError {
                    at: i,
                    message: format!("unexpected character '{other}'"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn at(&self) -> usize {
        self.toks.get(self.pos).map(|(a, _)| *a).unwrap_or(self.len)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            Err(ParseError {
                at: self.at(),
                message: format!("expected {what}"),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = Expr::Add(Arc::new(acc), Arc::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = Expr::Sub(Arc::new(acc), Arc::new(self.term()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = Expr::Mul(Arc::new(acc), Arc::new(self.factor()?));
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    acc = Expr::Div(Arc::new(acc), Arc::new(self.factor()?));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        // '^' binds tighter than unary minus: -z^2 is -(z^2)
        if self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            return Ok(Expr::Neg(Arc::new(self.factor()?)));
        }
        let base = self.unary()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let at = self.at();
            match self.bump() {
                Some(Tok::Num(v)) if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 => {
                    Ok(Expr::Pow(Arc::new(base), v as u32))
                }
                _ => Err(ParseError {
                    at,
                    message: "power must be a nonnegative integer".into(),
                }),
            }
        } else {
            Ok(base)
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let at = self.at();
        match self.bump() {
            Some(Tok::Num(v)) => Ok(Expr::Num(v)),
            Some(Tok::LParen) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => match name.as_str() {
                "z" => Ok(Expr::Z),
                "i" => Ok(Expr::I),
                "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                _ => {
                    let func = match name.as_str() {
                        "conj" => Func::Conj,
                        "re" => Func::Re,
                        "im" => Func::Im,
                        "abs" => Func::Abs,
                        "abs2" => Func::Abs2,
                        "exp" => Func::Exp,
                        "sin" => Func::Sin,
                        "cos" => Func::Cos,
                        other => {
                            return Err(ParseError {
                                at,
                                message: format!("unknown identifier '{other}'"),
                            })
                        }
                    };
                    self.expect(Tok::LParen, "'(' after function name")?;
                    let arg = self.expr()?;
                    self.expect(Tok::RParen, "')'")?;
                    Ok(Expr::Call(func, Arc::new(arg)))
                }
            },
            _ => Err(ParseError {
                at,
                message: "expected a value".into(),
            }),
        }
    }
}

/// Parse an expression; the result is a total function on the plane.
pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        len: src.len(),
    };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(ParseError {
            at: p.at(),
            message: "trailing input".into(),
        });
    }
    Ok(e)
}

/// Resolve a symbol spec: a built-in corpus id, or an expression (which
/// carries no closed-form derivatives).
pub fn resolve_symbol(spec: &str) -> Result<Symbol, String> {
    if let Ok(s) = fockbench_core::symbol::corpus::by_id(spec) {
        return Ok(s);
    }
    if spec == "decaybar_smoothed" {
        return Ok(fockbench_core::symbol::corpus::decaybar_smoothed());
    }
    let expr = parse(spec).map_err(|e| e.to_string())?;
    let name = spec.to_string();
    Ok(Symbol::new(name, move |z| expr.eval(z)))
}
