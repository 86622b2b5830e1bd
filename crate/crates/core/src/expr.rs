//! Small arithmetic-expression interpreter for problem files.
//!
//! Grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('+' | '-') unary | power
//! power  := atom ('^' unary)?
//! atom   := number | const | var | func '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Variables are `eta`, `xi` and `t`; constants `pi` and `e`; functions
//! `sin`, `cos`, `sinh`, `cosh`, `exp` and `pow(a, b)`. `^` is
//! right-associative and binds tighter than unary minus, so `-x^2` is
//! `-(x^2)`.

use std::fmt;

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at offset {offset}")]
pub struct ExprError {
    pub offset: usize,
    pub kind: ExprErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprErrorKind {
    UnexpectedEnd,
    UnexpectedChar(char),
    UnexpectedToken(String),
    UnknownIdentifier(String),
    BadNumber(String),
    Arity {
        name: String,
        expected: usize,
        found: usize,
    },
}

impl fmt::Display for ExprErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExprErrorKind::UnexpectedEnd => write!(f, "unexpected end of expression"),
            ExprErrorKind::UnexpectedChar(c) => write!(f, "unexpected character '{c}'"),
            ExprErrorKind::UnexpectedToken(t) => write!(f, "unexpected token '{t}'"),
            ExprErrorKind::UnknownIdentifier(id) => write!(f, "unknown identifier '{id}'"),
            ExprErrorKind::BadNumber(s) => write!(f, "malformed number '{s}'"),
            ExprErrorKind::Arity {
                name,
                expected,
                found,
            } => write!(f, "{name} takes {expected} argument(s), got {found}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    Eta,
    Xi,
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Exp,
    Pow,
}

impl Func {
    fn lookup(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "exp" => Func::Exp,
            "pow" => Func::Pow,
            _ => return None,
        })
    }

    fn arity(self) -> usize {
        match self {
            Func::Pow => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr<T> {
    Num(T),
    Var(Var),
    Neg(Box<Expr<T>>),
    Add(Box<Expr<T>>, Box<Expr<T>>),
    Sub(Box<Expr<T>>, Box<Expr<T>>),
    Mul(Box<Expr<T>>, Box<Expr<T>>),
    Div(Box<Expr<T>>, Box<Expr<T>>),
    Pow(Box<Expr<T>>, Box<Expr<T>>),
    Call(Func, Vec<Expr<T>>),
}

impl<T: Real> Expr<T> {
    pub fn parse(src: &str) -> Result<Self, ExprError> {
        let tokens = lex(src)?;
        let mut p = Parser {
            tokens,
            pos: 0,
            end: src.len(),
        };
        let e = p.expr()?;
        if let Some(tok) = p.peek() {
            return Err(ExprError {
                offset: tok.offset,
                kind: ExprErrorKind::UnexpectedToken(tok.text.clone()),
            });
        }
        Ok(e)
    }

    pub fn eval(&self, eta: T, xi: T, t: T) -> T {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(Var::Eta) => eta,
            Expr::Var(Var::Xi) => xi,
            Expr::Var(Var::T) => t,
            Expr::Neg(a) => -a.eval(eta, xi, t),
            Expr::Add(a, b) => a.eval(eta, xi, t) + b.eval(eta, xi, t),
            Expr::Sub(a, b) => a.eval(eta, xi, t) - b.eval(eta, xi, t),
            Expr::Mul(a, b) => a.eval(eta, xi, t) * b.eval(eta, xi, t),
            Expr::Div(a, b) => a.eval(eta, xi, t) / b.eval(eta, xi, t),
            Expr::Pow(a, b) => power(a.eval(eta, xi, t), b.eval(eta, xi, t)),
            Expr::Call(f, args) => {
                let x = args[0].eval(eta, xi, t);
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Sinh => x.sinh(),
                    Func::Cosh => x.cosh(),
                    Func::Exp => x.exp(),
                    Func::Pow => power(x, args[1].eval(eta, xi, t)),
                }
            }
        }
    }

    /// Whether the expression mentions `v`.
    pub fn uses(&self, v: Var) -> bool {
        match self {
            Expr::Num(_) => false,
            Expr::Var(w) => *w == v,
            Expr::Neg(a) => a.uses(v),
            Expr::Add(a, b)
            | Expr::Sub(a, b)
            | Expr::Mul(a, b)
            | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.uses(v) || b.uses(v),
            Expr::Call(_, args) => args.iter().any(|a| a.uses(v)),
        }
    }
}

// Integer exponents go through repeated multiplication so that negative
// bases work.
fn power<T: Real>(base: T, exp: T) -> T {
    if exp.floor() == exp && exp.abs() <= T::lit(1024.0) {
        let n = exp.to_i64().unwrap_or(0) as i32;
        base.powi(n)
    } else {
        base.powf(exp)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Number,
    Ident,
    Op(char),
}

#[derive(Debug, Clone)]
struct Token {
    kind: Kind,
    text: String,
    offset: usize,
}

fn lex(src: &str) -> Result<Vec<Token>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                // exponent only if digits follow, otherwise `e` is the constant
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            out.push(Token {
                kind: Kind::Number,
                text: src[start..i].to_string(),
                offset: start,
            });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                kind: Kind::Ident,
                text: src[start..i].to_string(),
                offset: start,
            });
        } else if "+-*/^(),".contains(c) {
            out.push(Token {
                kind: Kind::Op(c),
                text: c.to_string(),
                offset: i,
            });
            i += 1;
        } else {
            let ch = src[i..].chars().next().unwrap_or(c);
            return Err(ExprError {
                offset: i,
                kind: ExprErrorKind::UnexpectedChar(ch),
            });
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Result<Token, ExprError> {
        let tok = self.tokens.get(self.pos).cloned().ok_or(ExprError {
            offset: self.end,
            kind: ExprErrorKind::UnexpectedEnd,
        })?;
        self.pos += 1;
        Ok(tok)
    }

    fn eat_op(&mut self, c: char) -> bool {
        if matches!(self.peek(), Some(Token { kind: Kind::Op(o), .. }) if *o == c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, c: char) -> Result<(), ExprError> {
        let tok = self.next()?;
        if tok.kind == Kind::Op(c) {
            Ok(())
        } else {
            Err(ExprError {
                offset: tok.offset,
                kind: ExprErrorKind::UnexpectedToken(tok.text),
            })
        }
    }

    fn expr<T: Real>(&mut self) -> Result<Expr<T>, ExprError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat_op('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat_op('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term<T: Real>(&mut self) -> Result<Expr<T>, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat_op('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat_op('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary<T: Real>(&mut self) -> Result<Expr<T>, ExprError> {
        if self.eat_op('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if self.eat_op('+') {
            return self.unary();
        }
        self.power()
    }

    fn power<T: Real>(&mut self) -> Result<Expr<T>, ExprError> {
        let base = self.atom()?;
        if self.eat_op('^') {
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom<T: Real>(&mut self) -> Result<Expr<T>, ExprError> {
        let tok = self.next()?;
        match tok.kind {
            Kind::Number => T::from_str_radix(&tok.text, 10)
                .map(Expr::Num)
                .map_err(|_| ExprError {
                    offset: tok.offset,
                    kind: ExprErrorKind::BadNumber(tok.text),
                }),
            Kind::Op('(') => {
                let e = self.expr()?;
                self.expect_op(')')?;
                Ok(e)
            }
            Kind::Op(_) => Err(ExprError {
                offset: tok.offset,
                kind: ExprErrorKind::UnexpectedToken(tok.text),
            }),
            Kind::Ident => match tok.text.as_str() {
                "eta" => Ok(Expr::Var(Var::Eta)),
                "xi" => Ok(Expr::Var(Var::Xi)),
                "t" => Ok(Expr::Var(Var::T)),
                "pi" => Ok(Expr::Num(T::pi())),
                "e" => Ok(Expr::Num(T::euler())),
                name => {
                    let f = Func::lookup(name).ok_or_else(|| ExprError {
                        offset: tok.offset,
                        kind: ExprErrorKind::UnknownIdentifier(name.to_string()),
                    })?;
                    self.expect_op('(')?;
                    let mut args = vec![self.expr()?];
                    while self.eat_op(',') {
                        args.push(self.expr()?);
                    }
                    self.expect_op(')')?;
                    if args.len() != f.arity() {
                        return Err(ExprError {
                            offset: tok.offset,
                            kind: ExprErrorKind::Arity {
                                name: name.to_string(),
                                expected: f.arity(),
                                found: args.len(),
                            },
                        });
                    }
                    Ok(Expr::Call(f, args))
                }
            },
        }
    }
}
