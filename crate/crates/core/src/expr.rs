//! Matrix-entry expressions in the parameter `l`.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := ('-' | '+') unary | power
//! power    := atom ('^' exponent)?
//! exponent := '-'? INT | '(' '-'? INT ')'
//! atom     := NUMBER | NUMBER 'i' | 'i' | 'l' | '(' expr ')'
//! ```
//!
//! Exponents are integers. A negative exponent is only accepted on `l` or on a
//! nonzero constant, so every expression is a Laurent polynomial in `l` up to
//! the quotients the user writes explicitly with `/`.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

#[allow(unused_imports)] // shadowed by std float methods when std is in the build
use num_traits::Float;

use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(C64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = lex(src)?;
        let mut parser = Parser { tokens, pos: 0 };
        let expr = parser.expr()?;
        match parser.peek() {
            Tok::End => Ok(expr),
            _ => Err(parser.error("unexpected trailing input")),
        }
    }

    pub fn eval(&self, l: C64) -> C64 {
        match self {
            Expr::Const(c) => *c,
            Expr::Var => l,
            Expr::Neg(e) => -e.eval(l),
            Expr::Add(a, b) => a.eval(l) + b.eval(l),
            Expr::Sub(a, b) => a.eval(l) - b.eval(l),
            Expr::Mul(a, b) => a.eval(l) * b.eval(l),
            Expr::Div(a, b) => a.eval(l) / b.eval(l),
            Expr::Pow(base, k) => powi(base.eval(l), *k),
        }
    }

    /// True when the expression does not mention `l`.
    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Const(_) => true,
            Expr::Var => false,
            Expr::Neg(e) | Expr::Pow(e, _) => e.is_constant(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.is_constant() && b.is_constant()
            }
        }
    }
}

fn powi(z: C64, k: i32) -> C64 {
    let mut base = if k < 0 { C64::new(1.0, 0.0) / z } else { z };
    let mut e = k.unsigned_abs();
    let mut acc = C64::new(1.0, 0.0);
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base = base * base;
        e >>= 1;
    }
    acc
}

/// Fully parenthesised output that parses back to an expression with the same
/// value everywhere.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write_const(f, *c),
            Expr::Var => f.write_str("l"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Add(a, b) => write!(f, "({a}+{b})"),
            Expr::Sub(a, b) => write!(f, "({a}-{b})"),
            Expr::Mul(a, b) => write!(f, "({a}*{b})"),
            Expr::Div(a, b) => write!(f, "({a}/{b})"),
            Expr::Pow(base, k) => write!(f, "({base}^{k})"),
        }
    }
}

fn write_const(f: &mut fmt::Formatter<'_>, c: C64) -> fmt::Result {
    let re = c.re;
    let im = c.im;
    if im == 0.0 {
        if re.is_sign_negative() {
            write!(f, "(-{})", -re)
        } else {
            write!(f, "{re}")
        }
    } else if re == 0.0 {
        if im.is_sign_negative() {
            write!(f, "(-{}i)", -im)
        } else {
            write!(f, "{im}i")
        }
    } else {
        let sign = if re.is_sign_negative() { "-" } else { "" };
        let op = if im.is_sign_negative() { '-' } else { '+' };
        write!(f, "({sign}{}{op}{}i)", re.abs(), im.abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num { value: f64, imaginary: bool },
    Imag,
    Var,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Spanned {
    tok: Tok,
    column: usize,
    text: String,
}

fn lex(src: &str) -> Result<Vec<Spanned>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let column = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let single = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = single {
            out.push(Spanned {
                tok,
                column,
                text: c.to_string(),
            });
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            // optional exponent: e[+-]digits
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let value: f64 = text.parse().map_err(|_| Error::Syntax {
                column,
                message: format!("malformed number `{text}`"),
            })?;
            let imaginary = i < chars.len()
                && chars[i] == 'i'
                && !chars.get(i + 1).is_some_and(|c| c.is_alphanumeric() || *c == '_');
            if imaginary {
                i += 1;
            }
            out.push(Spanned {
                tok: Tok::Num { value, imaginary },
                column,
                text,
            });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            let text: String = chars[start..i].iter().collect();
            let tok = match text.as_str() {
                "l" => Tok::Var,
                "i" => Tok::Imag,
                _ => {
                    return Err(Error::UnknownSymbol {
                        symbol: text,
                        column,
                    })
                }
            };
            out.push(Spanned { tok, column, text });
            continue;
        }
        return Err(Error::Syntax {
            column,
            message: format!("unexpected character `{c}`"),
        });
    }
    out.push(Spanned {
        tok: Tok::End,
        column: chars.len() + 1,
        text: String::new(),
    });
    Ok(out)
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn bump(&mut self) -> &Spanned {
        let t = &self.tokens[self.pos];
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, message: &str) -> Error {
        let t = &self.tokens[self.pos];
        let found = if t.tok == Tok::End {
            String::from("end of input")
        } else {
            format!("`{}`", t.text)
        };
        Error::Syntax {
            column: t.column,
            message: format!("{message}, found {found}"),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        let caret_column = self.bump().column;
        let exponent = self.exponent()?;
        if exponent < 0 {
            let laurent_ok = match &base {
                Expr::Var => true,
                Expr::Const(c) => *c != C64::new(0.0, 0.0),
                _ => false,
            };
            if !laurent_ok {
                return Err(Error::Syntax {
                    column: caret_column,
                    message: String::from(
                        "negative exponents are only allowed on `l` or a nonzero constant",
                    ),
                });
            }
        }
        if *self.peek() == Tok::Caret {
            return Err(self.error("chained exponents need parentheses"));
        }
        Ok(Expr::Pow(Box::new(base), exponent))
    }

    fn exponent(&mut self) -> Result<i32> {
        let parenthesised = *self.peek() == Tok::LParen;
        if parenthesised {
            self.bump();
        }
        let negative = *self.peek() == Tok::Minus;
        if negative {
            self.bump();
        }
        let value = match self.peek().clone() {
            Tok::Num {
                value,
                imaginary: false,
            } if value.fract() == 0.0 && value.abs() <= i32::MAX as f64 => {
                self.bump();
                value as i32
            }
            _ => return Err(self.error("expected an integer exponent")),
        };
        if parenthesised {
            if *self.peek() != Tok::RParen {
                return Err(self.error("expected `)`"));
            }
            self.bump();
        }
        Ok(if negative { -value } else { value })
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Num { value, imaginary } => {
                self.bump();
                Ok(Expr::Const(if imaginary {
                    C64::new(0.0, value)
                } else {
                    C64::new(value, 0.0)
                }))
            }
            Tok::Imag => {
                self.bump();
                Ok(Expr::Const(C64::new(0.0, 1.0)))
            }
            Tok::Var => {
                self.bump();
                Ok(Expr::Var)
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.error("expected `)`"));
                }
                self.bump();
                Ok(inner)
            }
            _ => Err(self.error("expected a number, `i`, `l` or `(`")),
        }
    }
}
