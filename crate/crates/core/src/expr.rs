//! A small arithmetic expression language for coefficient and data fields.
//!
//! Grammar (lowest to highest precedence, all binary operators left-associative):
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' (atom | '-' unary))*
//! atom    := number | 'pi' | var | func '(' sum ')' | '(' sum ')'
//! var     := 'x' | 'y' | 'z' | 't'
//! func    := 'sin' | 'cos' | 'exp'
//! ```

use std::fmt;
use std::sync::Arc;

use crate::error::{Result, SeamError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
    Z,
    T,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Pi,
    Var(Var),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Var {
    fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::Z => "z",
            Var::T => "t",
        }
    }
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }

    fn apply(self, v: f64) -> f64 {
        match self {
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
        }
    }
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

impl Expr {
    /// Evaluates at point `p` (x, y, z) and time `t`.
    pub fn eval(&self, p: [f64; 3], t: f64) -> std::result::Result<f64, EvalFault> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Pi => std::f64::consts::PI,
            Expr::Var(Var::X) => p[0],
            Expr::Var(Var::Y) => p[1],
            Expr::Var(Var::Z) => p[2],
            Expr::Var(Var::T) => t,
            Expr::Neg(e) => -e.eval(p, t)?,
            Expr::Call(f, e) => f.apply(e.eval(p, t)?),
            Expr::Binary(op, l, r) => {
                let a = l.eval(p, t)?;
                let b = r.eval(p, t)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(EvalFault::DivisionByZero);
                        }
                        a / b
                    }
                    BinOp::Pow => a.powf(b),
                }
            }
        })
    }

    pub fn mentions(&self, var: Var) -> bool {
        match self {
            Expr::Var(v) => *v == var,
            Expr::Num(_) | Expr::Pi => false,
            Expr::Neg(e) | Expr::Call(_, e) => e.mentions(var),
            Expr::Binary(_, l, r) => l.mentions(var) || r.mentions(var),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalFault {
    DivisionByZero,
}

/// Fully parenthesised rendering; parsing it back yields the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Pi => f.write_str("pi"),
            Expr::Var(v) => f.write_str(v.name()),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
            Expr::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
        }
    }
}

/// A parsed scalar field `g(x, y, z, t)`. Cheap to clone; the tree is shared.
#[derive(Debug, Clone)]
pub struct ScalarField {
    source: Arc<str>,
    expr: Arc<Expr>,
}

impl ScalarField {
    pub fn parse(text: &str) -> Result<ScalarField> {
        let expr = parse_expression(text)?;
        Ok(ScalarField {
            source: text.into(),
            expr: Arc::new(expr),
        })
    }

    pub fn constant(v: f64) -> ScalarField {
        ScalarField {
            source: format!("{v:?}").into(),
            expr: Arc::new(Expr::Num(v)),
        }
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn eval(&self, p: [f64; 3], t: f64) -> Result<f64> {
        let v = self.expr.eval(p, t).map_err(|fault| match fault {
            EvalFault::DivisionByZero => SeamError::DivisionByZero(self.source.to_string()),
        })?;
        if !v.is_finite() {
            return Err(SeamError::NonFinite(self.source.to_string()));
        }
        Ok(v)
    }

    pub fn is_time_dependent(&self) -> bool {
        self.expr.mentions(Var::T)
    }

    /// True when the tree is a literal zero, so assembly can be skipped.
    pub fn is_zero(&self) -> bool {
        matches!(*self.expr, Expr::Num(v) if v == 0.0)
    }
}

impl fmt::Display for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

pub fn parse_expression(text: &str) -> Result<Expr> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(SeamError::Syntax {
            offset: 0,
            message: "empty expression".into(),
        });
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: text.len(),
    };
    let expr = parser.sum()?;
    if let Some(tok) = parser.peek() {
        return Err(SeamError::Syntax {
            offset: tok.offset,
            message: format!("unexpected {}", tok.kind.describe()),
        });
    }
    Ok(expr)
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl TokenKind {
    fn describe(&self) -> String {
        match self {
            TokenKind::Num(v) => format!("number {v}"),
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Op(c) => format!("operator `{c}`"),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    offset: usize,
}

fn tokenize(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let kind = if c.is_ascii_digit() || c == '.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // exponent part, only when followed by digits
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let literal = &text[start..i];
            let value: f64 = literal.parse().map_err(|_| SeamError::Syntax {
                offset: start,
                message: format!("malformed number `{literal}`"),
            })?;
            if !value.is_finite() {
                return Err(SeamError::Syntax {
                    offset: start,
                    message: format!("number `{literal}` overflows"),
                });
            }
            TokenKind::Num(value)
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            TokenKind::Ident(text[start..i].to_string())
        } else {
            i += c.len_utf8();
            match c {
                '+' | '-' | '*' | '/' | '^' => TokenKind::Op(c),
                '(' => TokenKind::LParen,
                ')' => TokenKind::RParen,
                _ => {
                    return Err(SeamError::Syntax {
                        offset: start,
                        message: format!("unexpected character `{c}`"),
                    })
                }
            }
        };
        tokens.push(Token {
            kind,
            offset: start,
        });
    }
    Ok(tokens)
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

    fn peek_op(&self) -> Option<char> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::Op(c),
                ..
            }) => Some(*c),
            _ => None,
        }
    }

    fn next(&mut self) -> Result<Token> {
        let tok = self
            .tokens
            .get(self.pos)
            .cloned()
            .ok_or(SeamError::Syntax {
                offset: self.end,
                message: "unexpected end of input".into(),
            })?;
        self.pos += 1;
        Ok(tok)
    }

    fn sum(&mut self) -> Result<Expr> {
        let mut lhs = self.product()?;
        while let Some(c @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.product()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(c @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek_op() == Some('-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let mut lhs = self.atom()?;
        while self.peek_op() == Some('^') {
            self.pos += 1;
            let rhs = if self.peek_op() == Some('-') {
                self.unary()?
            } else {
                self.atom()?
            };
            lhs = Expr::Binary(BinOp::Pow, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn atom(&mut self) -> Result<Expr> {
        let tok = self.next()?;
        match tok.kind {
            TokenKind::Num(v) => Ok(Expr::Num(v)),
            TokenKind::LParen => {
                let inner = self.sum()?;
                self.expect_rparen(tok.offset)?;
                Ok(inner)
            }
            TokenKind::Ident(name) => {
                let func = match name.as_str() {
                    "pi" => return Ok(Expr::Pi),
                    "x" => return Ok(Expr::Var(Var::X)),
                    "y" => return Ok(Expr::Var(Var::Y)),
                    "z" => return Ok(Expr::Var(Var::Z)),
                    "t" => return Ok(Expr::Var(Var::T)),
                    "sin" => Func::Sin,
                    "cos" => Func::Cos,
                    "exp" => Func::Exp,
                    _ => {
                        return Err(SeamError::UnknownIdentifier {
                            name,
                            offset: tok.offset,
                        })
                    }
                };
                let open = self.next()?;
                if open.kind != TokenKind::LParen {
                    return Err(SeamError::Syntax {
                        offset: open.offset,
                        message: format!("expected `(` after `{name}`"),
                    });
                }
                let arg = self.sum()?;
                self.expect_rparen(open.offset)?;
                Ok(Expr::Call(func, Box::new(arg)))
            }
            other => Err(SeamError::Syntax {
                offset: tok.offset,
                message: format!("unexpected {}", other.describe()),
            }),
        }
    }

    fn expect_rparen(&mut self, opened_at: usize) -> Result<()> {
        match self.peek() {
            Some(Token {
                kind: TokenKind::RParen,
                ..
            }) => {
                self.pos += 1;
                Ok(())
            }
            Some(tok) => Err(SeamError::Syntax {
                offset: tok.offset,
                message: format!("expected `)` to close `(` at offset {opened_at}"),
            }),
            None => Err(SeamError::Syntax {
                offset: self.end,
                message: format!("unclosed `(` at offset {opened_at}"),
            }),
        }
    }
}
