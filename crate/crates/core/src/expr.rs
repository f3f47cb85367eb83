//! Matrix-valued scalar expression trees and their parser.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! matrix := '[' row (',' row)* ']'
//! row    := '[' expr (',' expr)* ']'
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := base ('^' integer)?
//! base   := number | 'i' | variable | '(' expr ')' | 'exp(' expr ')'
//! ```
//!
//! Unary minus is accepted as a prefix on factors. Division is evaluated
//! lazily; hitting a denominator root raises an evaluation error rather than
//! a parse error.

use std::collections::HashMap;
use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum ScalarExpr {
    Num(f64),
    ImaginaryUnit,
    Var(String),
    Add(Box<ScalarExpr>, Box<ScalarExpr>),
    Sub(Box<ScalarExpr>, Box<ScalarExpr>),
    Mul(Box<ScalarExpr>, Box<ScalarExpr>),
    Div(Box<ScalarExpr>, Box<ScalarExpr>),
    Pow(Box<ScalarExpr>, i64),
    Exp(Box<ScalarExpr>),
    Neg(Box<ScalarExpr>),
}

impl ScalarExpr {
    pub fn eval(&self, env: &HashMap<String, Complex64>) -> Result<Complex64> {
        match self {
            ScalarExpr::Num(x) => Ok(Complex64::new(*x, 0.0)),
            ScalarExpr::ImaginaryUnit => Ok(Complex64::new(0.0, 1.0)),
            ScalarExpr::Var(name) => env
                .get(name)
                .copied()
                .ok_or_else(|| Error::eval(None, format!("unbound variable '{name}'"))),
            ScalarExpr::Add(a, b) => Ok(a.eval(env)? + b.eval(env)?),
            ScalarExpr::Sub(a, b) => Ok(a.eval(env)? - b.eval(env)?),
            ScalarExpr::Mul(a, b) => Ok(a.eval(env)? * b.eval(env)?),
            ScalarExpr::Div(a, b) => {
                let den = b.eval(env)?;
                if den.norm() < 1e-14 {
                    return Err(Error::eval(
                        None,
                        format!("division by a vanishing denominator ({den})"),
                    ));
                }
                Ok(a.eval(env)? / den)
            }
            ScalarExpr::Pow(a, k) => {
                let base = a.eval(env)?;
                if *k < 0 && base.norm() < 1e-14 {
                    return Err(Error::eval(None, "negative power of a vanishing base"));
                }
                Ok(base.powi(*k as i32))
            }
            ScalarExpr::Exp(a) => Ok(a.eval(env)?.exp()),
            ScalarExpr::Neg(a) => Ok(-a.eval(env)?),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            ScalarExpr::Add(..) | ScalarExpr::Sub(..) => 1,
            ScalarExpr::Mul(..) | ScalarExpr::Div(..) => 2,
            ScalarExpr::Neg(..) => 3,
            ScalarExpr::Pow(..) => 4,
            _ => 5,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, parent: u8) -> fmt::Result {
        let prec = self.precedence();
        let need_parens = prec < parent;
        if need_parens {
            write!(f, "(")?;
        }
        match self {
            ScalarExpr::Num(x) => write!(f, "{x}")?,
            ScalarExpr::ImaginaryUnit => write!(f, "i")?,
            ScalarExpr::Var(name) => write!(f, "{name}")?,
            ScalarExpr::Add(a, b) => {
                a.fmt_prec(f, prec)?;
                write!(f, "+")?;
                b.fmt_prec(f, prec + 1)?;
            }
            ScalarExpr::Sub(a, b) => {
                a.fmt_prec(f, prec)?;
                write!(f, "-")?;
                b.fmt_prec(f, prec + 1)?;
            }
            ScalarExpr::Mul(a, b) => {
                a.fmt_prec(f, prec)?;
                write!(f, "*")?;
                b.fmt_prec(f, prec + 1)?;
            }
            ScalarExpr::Div(a, b) => {
                a.fmt_prec(f, prec)?;
                write!(f, "/")?;
                b.fmt_prec(f, prec + 1)?;
            }
            ScalarExpr::Pow(a, k) => {
                a.fmt_prec(f, prec + 1)?;
                write!(f, "^{k}")?;
            }
            ScalarExpr::Exp(a) => {
                write!(f, "exp(")?;
                a.fmt_prec(f, 0)?;
                write!(f, ")")?;
            }
            ScalarExpr::Neg(a) => {
                write!(f, "-")?;
                a.fmt_prec(f, prec + 1)?;
            }
        }
        if need_parens {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// Square matrix of scalar expressions.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixExpr {
    n: usize,
    entries: Vec<ScalarExpr>,
}

impl MatrixExpr {
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entry(&self, i: usize, j: usize) -> &ScalarExpr {
        &self.entries[i * self.n + j]
    }

    pub fn from_entries(n: usize, entries: Vec<ScalarExpr>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::invalid("matrix expression must be square"));
        }
        Ok(MatrixExpr { n, entries })
    }

    pub fn eval(&self, env: &HashMap<String, Complex64>) -> Result<crate::matrix::Matrix> {
        let vals: Result<Vec<Complex64>> = self.entries.iter().map(|e| e.eval(env)).collect();
        crate::matrix::Matrix::from_rows(self.n, &vals?)
    }

    /// Evaluate with a single variable bound (the common 1-variable case).
    pub fn eval_single(&self, var: &str, value: Complex64) -> Result<crate::matrix::Matrix> {
        let mut env = HashMap::new();
        env.insert(var.to_string(), value);
        self.eval(&env)
    }
}

impl fmt::Display for MatrixExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for j in 0..self.n {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{}", self.entry(i, j))?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
    line: usize,
    col: usize,
}

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
    LBracket,
    RBracket,
    Comma,
    End,
}

struct Located {
    tok: Tok,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0, line: 1, col: 1 }
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.src.get(self.pos).copied()?;
        self.pos += 1;
        if b == b'\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(b)
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn error(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line, col: self.col, msg: msg.into() }
    }

    fn next_token(&mut self) -> Result<Located> {
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.bump();
        }
        let (line, col) = (self.line, self.col);
        let b = match self.peek() {
            None => return Ok(Located { tok: Tok::End, line, col }),
            Some(b) => b,
        };
        let tok = match b {
            b'+' => {
                self.bump();
                Tok::Plus
            }
            b'-' => {
                self.bump();
                Tok::Minus
            }
            b'*' => {
                self.bump();
                Tok::Star
            }
            b'/' => {
                self.bump();
                Tok::Slash
            }
            b'^' => {
                self.bump();
                Tok::Caret
            }
            b'(' => {
                self.bump();
                Tok::LParen
            }
            b')' => {
                self.bump();
                Tok::RParen
            }
            b'[' => {
                self.bump();
                Tok::LBracket
            }
            b']' => {
                self.bump();
                Tok::RBracket
            }
            b',' => {
                self.bump();
                Tok::Comma
            }
            b'0'..=b'9' | b'.' => {
                let start = self.pos;
                while matches!(self.peek(), Some(b'0'..=b'9') | Some(b'.')) {
                    self.bump();
                }
                if matches!(self.peek(), Some(b'e') | Some(b'E')) {
                    // exponent only if followed by digits (or a sign and digits)
                    let mark = self.pos;
                    self.bump();
                    if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                        self.bump();
                    }
                    if matches!(self.peek(), Some(b'0'..=b'9')) {
                        while matches!(self.peek(), Some(b'0'..=b'9')) {
                            self.bump();
                        }
                    } else {
                        self.pos = mark;
                    }
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let value: f64 = text
                    .parse()
                    .map_err(|_| self.error(format!("malformed number '{text}'")))?;
                Tok::Num(value)
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = self.pos;
                while matches!(self.peek(), Some(b'a'..=b'z') | Some(b'A'..=b'Z') | Some(b'0'..=b'9') | Some(b'_'))
                {
                    self.bump();
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                Tok::Ident(text.to_string())
            }
            other => {
                return Err(self.error(format!("unexpected character '{}'", other as char)))
            }
        };
        Ok(Located { tok, line, col })
    }
}

pub struct Parser {
    tokens: Vec<Located>,
    idx: usize,
    variables: Vec<String>,
}

impl Parser {
    fn new(text: &str, variables: &[&str]) -> Result<Self> {
        let mut lexer = Lexer::new(text);
        let mut tokens = Vec::new();
        loop {
            let t = lexer.next_token()?;
            let end = t.tok == Tok::End;
            tokens.push(t);
            if end {
                break;
            }
        }
        Ok(Parser {
            tokens,
            idx: 0,
            variables: variables.iter().map(|s| s.to_string()).collect(),
        })
    }

    fn peek(&self) -> &Located {
        &self.tokens[self.idx]
    }

    fn advance(&mut self) -> &Located {
        let t = &self.tokens[self.idx];
        if self.idx + 1 < self.tokens.len() {
            self.idx += 1;
        }
        t
    }

    fn error_here(&self, msg: impl Into<String>) -> Error {
        let t = self.peek();
        Error::Parse { line: t.line, col: t.col, msg: msg.into() }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if self.peek().tok == tok {
            self.advance();
            Ok(())
        } else {
            Err(self.error_here(format!("expected {what}")))
        }
    }

    fn parse_expr(&mut self) -> Result<ScalarExpr> {
        let mut lhs = self.parse_term()?;
        loop {
            match self.peek().tok {
                Tok::Plus => {
                    self.advance();
                    let rhs = self.parse_term()?;
                    lhs = ScalarExpr::Add(Box::new(lhs), Box::new(rhs));
                }
                Tok::Minus => {
                    self.advance();
                    let rhs = self.parse_term()?;
                    lhs = ScalarExpr::Sub(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_term(&mut self) -> Result<ScalarExpr> {
        let mut lhs = self.parse_factor()?;
        loop {
            match self.peek().tok {
                Tok::Star => {
                    self.advance();
                    let rhs = self.parse_factor()?;
                    lhs = ScalarExpr::Mul(Box::new(lhs), Box::new(rhs));
                }
                Tok::Slash => {
                    self.advance();
                    let rhs = self.parse_factor()?;
                    lhs = ScalarExpr::Div(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn parse_factor(&mut self) -> Result<ScalarExpr> {
        if self.peek().tok == Tok::Minus {
            self.advance();
            let inner = self.parse_factor()?;
            return Ok(ScalarExpr::Neg(Box::new(inner)));
        }
        let base = self.parse_base()?;
        if self.peek().tok == Tok::Caret {
            self.advance();
            let negative = if self.peek().tok == Tok::Minus {
                self.advance();
                true
            } else {
                false
            };
            let k = match self.peek().tok {
                Tok::Num(x) if x.fract() == 0.0 => {
                    self.advance();
                    x as i64
                }
                _ => return Err(self.error_here("expected an integer exponent after '^'")),
            };
            return Ok(ScalarExpr::Pow(Box::new(base), if negative { -k } else { k }));
        }
        Ok(base)
    }

    fn parse_base(&mut self) -> Result<ScalarExpr> {
        let tok = self.peek().tok.clone();
        match tok {
            Tok::Num(x) => {
                self.advance();
                Ok(ScalarExpr::Num(x))
            }
            Tok::LParen => {
                self.advance();
                let inner = self.parse_expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                if name == "exp" {
                    self.advance();
                    self.expect(Tok::LParen, "'(' after exp")?;
                    let inner = self.parse_expr()?;
                    self.expect(Tok::RParen, "')'")?;
                    return Ok(ScalarExpr::Exp(Box::new(inner)));
                }
                if name == "i" {
                    self.advance();
                    return Ok(ScalarExpr::ImaginaryUnit);
                }
                if self.variables.iter().any(|v| v == &name) {
                    self.advance();
                    return Ok(ScalarExpr::Var(name));
                }
                Err(self.error_here(format!("unknown identifier '{name}'")))
            }
            _ => Err(self.error_here("expected a number, variable, '(' or 'exp('")),
        }
    }

    fn parse_matrix(&mut self) -> Result<MatrixExpr> {
        self.expect(Tok::LBracket, "'[' starting the matrix")?;
        let mut rows: Vec<Vec<ScalarExpr>> = Vec::new();
        loop {
            self.expect(Tok::LBracket, "'[' starting a row")?;
            let mut row = Vec::new();
            loop {
                row.push(self.parse_expr()?);
                if self.peek().tok == Tok::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
            self.expect(Tok::RBracket, "']' closing a row")?;
            rows.push(row);
            if self.peek().tok == Tok::Comma {
                self.advance();
            } else {
                break;
            }
        }
        self.expect(Tok::RBracket, "']' closing the matrix")?;
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(self.error_here("matrix literal is not square"));
        }
        let entries = rows.into_iter().flatten().collect();
        MatrixExpr::from_entries(n, entries)
    }
}

/// Parse a matrix of scalar expressions; identifiers must come from
/// `variables` (plus the builtin 'i' and 'exp').
pub fn parse_expr(text: &str, variables: &[&str]) -> Result<MatrixExpr> {
    let mut p = Parser::new(text, variables)?;
    let m = p.parse_matrix()?;
    if p.peek().tok != Tok::End {
        return Err(p.error_here("trailing input after the matrix"));
    }
    Ok(m)
}

/// Parse a single scalar expression (used for 1 x 1 coefficients).
pub fn parse_scalar(text: &str, variables: &[&str]) -> Result<ScalarExpr> {
    let mut p = Parser::new(text, variables)?;
    let e = p.parse_expr()?;
    if p.peek().tok != Tok::End {
        return Err(p.error_here("trailing input after the expression"));
    }
    Ok(e)
}
