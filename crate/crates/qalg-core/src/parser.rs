//! Equation syntax: tokens, AST with source spans, canonicalisation.
//!
//! ```text
//! equation := expr ("=" expr)?
//! expr     := term (("+" | "-") term)*
//! term     := factor (("*" | "/") factor)*
//! factor   := base ("^" sint)?
//! base     := number | "q" | "u" | "I" | "rho" | "z" | fapp | "(" expr ")" | "-" factor
//! fapp     := "f" "(" expr ")"          -- the argument must reduce to q^j*z
//! ```
//!
//! Division is accepted only when the divisor is free of `z` and `f`, and
//! negative exponents only on such bases.

use crate::qpoly::{MonomialKey, QPolynomial};
use crate::scalar::{FieldDescriptor, FieldError, Scalar};
use rug::Integer;
use std::fmt;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{} (bytes {}..{})", self.line, self.column, self.start, self.end)
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at {span}: {message}; expected one of {expected:?}")]
    Syntax { span: SourceSpan, expected: Vec<String>, message: String },
    #[error("argument of f at {span} is not of the form q^j*z")]
    NonAffineShift { span: SourceSpan },
    #[error("at {span}: {source}")]
    Field { span: SourceSpan, source: FieldError },
}

impl ParseError {
    pub fn span(&self) -> SourceSpan {
        match self {
            ParseError::Syntax { span, .. } | ParseError::NonAffineShift { span } | ParseError::Field { span, .. } => *span,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Node {
    Const(Integer),
    VarZ,
    VarQ,
    VarU,
    Imag,
    Rho,
    FApp(i32),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
    Neg(Box<Expr>),
    Paren(Box<Expr>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub node: Node,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EquationAst {
    pub lhs: Expr,
    pub rhs: Option<Expr>,
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Integer),
    Ident(String),
    Sym(char),
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    span: SourceSpan,
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let (mut line, mut col) = (1usize, 1usize);
    let mut it = text.char_indices().peekable();
    while let Some(&(i, ch)) = it.peek() {
        let span_at = |end: usize, line: usize, col: usize| SourceSpan { start: i, end, line, column: col };
        if ch == '\n' {
            it.next();
            line += 1;
            col = 1;
            continue;
        }
        if ch.is_whitespace() {
            it.next();
            col += 1;
            continue;
        }
        if ch.is_ascii_digit() {
            let mut end = i;
            let mut s = String::new();
            while let Some(&(j, c)) = it.peek() {
                if !c.is_ascii_digit() {
                    break;
                }
                s.push(c);
                end = j + 1;
                it.next();
            }
            out.push(Token { tok: Tok::Num(s.parse().unwrap()), span: span_at(end, line, col) });
            col += s.len();
            continue;
        }
        if ch.is_ascii_alphabetic() || ch == '_' {
            let mut end = i;
            let mut s = String::new();
            while let Some(&(j, c)) = it.peek() {
                if !(c.is_ascii_alphanumeric() || c == '_') {
                    break;
                }
                s.push(c);
                end = j + 1;
                it.next();
            }
            out.push(Token { tok: Tok::Ident(s.clone()), span: span_at(end, line, col) });
            col += s.len();
            continue;
        }
        if "+-*/^()=".contains(ch) {
            out.push(Token { tok: Tok::Sym(ch), span: span_at(i + 1, line, col) });
            it.next();
            col += 1;
            continue;
        }
        return Err(ParseError::Syntax {
            span: span_at(i + ch.len_utf8(), line, col),
            expected: vec!["number".into(), "identifier".into(), "operator".into()],
            message: format!("unexpected character {ch:?}"),
        });
    }
    let n = text.len();
    out.push(Token { tok: Tok::End, span: SourceSpan { start: n, end: n, line, column: col } });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

fn join(a: SourceSpan, b: SourceSpan) -> SourceSpan {
    SourceSpan { start: a.start, end: b.end.max(a.end), line: a.line, column: a.column }
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn is_sym(&self, c: char) -> bool {
        self.peek().tok == Tok::Sym(c)
    }

    fn err<T>(&self, expected: &[&str], message: &str) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            span: self.peek().span,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            message: message.to_string(),
        })
    }

    fn expect_sym(&mut self, c: char) -> Result<Token, ParseError> {
        if self.is_sym(c) {
            Ok(self.next())
        } else {
            self.err(&[&c.to_string()], "unexpected token")
        }
    }

    fn equation(&mut self) -> Result<EquationAst, ParseError> {
        if self.peek().tok == Tok::End {
            return self.err(&["expression"], "empty input");
        }
        let lhs = self.expr()?;
        let rhs = if self.is_sym('=') {
            self.next();
            Some(self.expr()?)
        } else {
            None
        };
        if self.peek().tok != Tok::End {
            return self.err(&["+", "-", "*", "/", "=", "end of input"], "trailing input");
        }
        Ok(EquationAst { lhs, rhs })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let node = if self.is_sym('+') {
                Node::Add as fn(Box<Expr>, Box<Expr>) -> Node
            } else if self.is_sym('-') {
                Node::Sub
            } else {
                break;
            };
            self.next();
            let rhs = self.term()?;
            let span = join(lhs.span, rhs.span);
            lhs = Expr { node: node(Box::new(lhs), Box::new(rhs)), span };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let node = if self.is_sym('*') {
                Node::Mul as fn(Box<Expr>, Box<Expr>) -> Node
            } else if self.is_sym('/') {
                Node::Div
            } else {
                if matches!(self.peek().tok, Tok::Num(_) | Tok::Ident(_)) || self.is_sym('(') {
                    return self.err(&["*"], "implicit multiplication is not allowed");
                }
                break;
            };
            self.next();
            let rhs = self.factor()?;
            let span = join(lhs.span, rhs.span);
            lhs = Expr { node: node(Box::new(lhs), Box::new(rhs)), span };
        }
        Ok(lhs)
    }

    fn sint(&mut self) -> Result<(i64, SourceSpan), ParseError> {
        let neg = if self.is_sym('-') {
            self.next();
            true
        } else {
            false
        };
        match self.peek().tok.clone() {
            Tok::Num(n) => {
                let t = self.next();
                let v = n.to_i64().filter(|v| *v <= i32::MAX as i64);
                match v {
                    Some(v) => Ok((if neg { -v } else { v }, t.span)),
                    None => Err(ParseError::Syntax { span: t.span, expected: vec!["small integer".into()], message: "exponent too large".into() }),
                }
            }
            _ => self.err(&["integer"], "expected an integer exponent"),
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if self.is_sym('^') {
            self.next();
            let (e, sp) = self.sint()?;
            let span = join(base.span, sp);
            return Ok(Expr { node: Node::Pow(Box::new(base), e), span });
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Num(n) => {
                self.next();
                Ok(Expr { node: Node::Const(n), span: t.span })
            }
            Tok::Sym('(') => {
                self.next();
                let inner = self.expr()?;
                let close = self.expect_sym(')')?;
                Ok(Expr { node: Node::Paren(Box::new(inner)), span: join(t.span, close.span) })
            }
            Tok::Sym('-') => {
                self.next();
                let inner = self.factor()?;
                let span = join(t.span, inner.span);
                Ok(Expr { node: Node::Neg(Box::new(inner)), span })
            }
            Tok::Ident(ref s) => {
                self.next();
                let node = match s.as_str() {
                    "z" => Node::VarZ,
                    "q" => Node::VarQ,
                    "u" => Node::VarU,
                    "I" => Node::Imag,
                    "rho" => Node::Rho,
                    "f" => return self.fapp(t.span),
                    _ => {
                        return Err(ParseError::Syntax {
                            span: t.span,
                            expected: vec!["z".into(), "q".into(), "u".into(), "I".into(), "rho".into(), "f".into()],
                            message: format!("unknown identifier {s:?}"),
                        })
                    }
                };
                Ok(Expr { node, span: t.span })
            }
            _ => self.err(&["number", "identifier", "(", "-"], "expected an operand"),
        }
    }

    fn fapp(&mut self, fspan: SourceSpan) -> Result<Expr, ParseError> {
        self.expect_sym('(')?;
        let arg = self.expr()?;
        let close = self.expect_sym(')')?;
        let span = join(fspan, close.span);
        let j = affine_shift(&arg).ok_or(ParseError::NonAffineShift { span: arg.span })?;
        Ok(Expr { node: Node::FApp(j), span })
    }
}

/// `(q-exponent, z-exponent)` of a product of `q`, `z` and their powers.
fn monomial_qz(e: &Expr) -> Option<(i64, i64)> {
    match &e.node {
        Node::VarQ => Some((1, 0)),
        Node::VarZ => Some((0, 1)),
        Node::Const(n) if *n == 1 => Some((0, 0)),
        Node::Paren(x) => monomial_qz(x),
        Node::Mul(a, b) => {
            let (x, y) = monomial_qz(a)?;
            let (u, v) = monomial_qz(b)?;
            Some((x + u, y + v))
        }
        Node::Div(a, b) => {
            let (x, y) = monomial_qz(a)?;
            let (u, v) = monomial_qz(b)?;
            Some((x - u, y - v))
        }
        Node::Pow(a, k) => {
            let (x, y) = monomial_qz(a)?;
            Some((x * k, y * k))
        }
        _ => None,
    }
}

fn affine_shift(arg: &Expr) -> Option<i32> {
    match monomial_qz(arg)? {
        (j, 1) => i32::try_from(j).ok(),
        _ => None,
    }
}

pub fn parse_equation(text: &str) -> Result<EquationAst, ParseError> {
    let toks = lex(text)?;
    Parser { toks, pos: 0 }.equation()
}

fn has_zf(e: &Expr) -> bool {
    match &e.node {
        Node::VarZ | Node::FApp(_) => true,
        Node::Const(_) | Node::VarQ | Node::VarU | Node::Imag | Node::Rho => false,
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => has_zf(a) || has_zf(b),
        Node::Pow(a, _) | Node::Neg(a) | Node::Paren(a) => has_zf(a),
    }
}

fn eval(e: &Expr, fd: &FieldDescriptor) -> Result<QPolynomial, ParseError> {
    let field_err = |source| ParseError::Field { span: e.span, source };
    let c = |s: Scalar| Ok(QPolynomial::constant(s, fd.clone()));
    match &e.node {
        Node::Const(n) => c(Scalar::from_rational(n.clone().into())),
        Node::VarZ => Ok(QPolynomial::monomial(MonomialKey::pure(1), Scalar::one(), fd.clone())),
        Node::VarQ => c(fd.q_pow(1)),
        Node::VarU => c(fd.u_pow(1)),
        Node::Imag => c(Scalar::i()),
        Node::Rho => match fd.rho() {
            Some(r) => c(r),
            None => Err(field_err(FieldError::NotRepresentable("rho used without a declared extension".into()))),
        },
        Node::FApp(j) => Ok(QPolynomial::monomial(MonomialKey::new(0, vec![*j]), Scalar::one(), fd.clone())),
        Node::Add(a, b) => Ok(eval(a, fd)?.add(&eval(b, fd)?)),
        Node::Sub(a, b) => Ok(eval(a, fd)?.sub(&eval(b, fd)?)),
        Node::Mul(a, b) => Ok(eval(a, fd)?.mul(&eval(b, fd)?)),
        Node::Neg(a) => Ok(eval(a, fd)?.neg()),
        Node::Paren(a) => eval(a, fd),
        Node::Div(a, b) => {
            if has_zf(b) {
                return Err(ParseError::Syntax {
                    span: b.span,
                    expected: vec!["constant divisor".into()],
                    message: "division by an expression in z or f; clear denominators first".into(),
                });
            }
            let d = constant_of(&eval(b, fd)?).ok_or_else(|| field_err(FieldError::DivisionByZero))?;
            let inv = d.checked_inv().map_err(field_err)?;
            Ok(eval(a, fd)?.scale_coeffs(&inv))
        }
        Node::Pow(a, k) => {
            let base = eval(a, fd)?;
            if *k >= 0 {
                return Ok(base.pow(*k as u32));
            }
            if has_zf(a) {
                return Err(ParseError::Syntax {
                    span: e.span,
                    expected: vec!["nonnegative exponent".into()],
                    message: "negative exponent on an expression in z or f".into(),
                });
            }
            let d = constant_of(&base).ok_or_else(|| field_err(FieldError::DivisionByZero))?;
            c(d.pow(*k).map_err(field_err)?)
        }
    }
}

fn constant_of(p: &QPolynomial) -> Option<Scalar> {
    if p.is_zero() {
        return None;
    }
    if p.len() == 1 {
        return p.terms().get(&MonomialKey::pure(0)).cloned();
    }
    None
}

/// Expand the equation into a collected polynomial `lhs - rhs`.
pub fn canonicalize(ast: &EquationAst, fd: &FieldDescriptor) -> Result<QPolynomial, ParseError> {
    let l = eval(&ast.lhs, fd)?;
    match &ast.rhs {
        Some(r) => Ok(l.sub(&eval(r, fd)?)),
        None => Ok(l),
    }
}

/// `parse_equation` followed by `canonicalize`.
pub fn parse_polynomial(text: &str, fd: &FieldDescriptor) -> Result<QPolynomial, ParseError> {
    canonicalize(&parse_equation(text)?, fd)
}

/// A constant expression (no `z`, no `f`) as a scalar.
pub fn parse_scalar(text: &str, fd: &FieldDescriptor) -> Result<Scalar, ParseError> {
    let p = parse_polynomial(text, fd)?;
    if p.is_zero() {
        return Ok(Scalar::zero());
    }
    match p.terms().get(&MonomialKey::pure(0)) {
        Some(c) if p.len() == 1 => Ok(c.clone()),
        _ => Err(ParseError::Syntax {
            span: SourceSpan { start: 0, end: text.len(), line: 1, column: 1 },
            expected: vec!["constant expression".into()],
            message: "expression depends on z or f".into(),
        }),
    }
}
