//! Recursive-descent parser and evaluator for curvature expressions.
//!
//! Grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := atom ('^' factor)?            right-associative
//! atom   := number | 'x' | 's' | '(' expr ')' | func '(' expr ')'
//! func   := 'abs' | 'sgn' | 'log' | 'sqrt' | 'sin' | 'cos' | 'exp'
//! ```
//!
//! There is no unary minus; write `0-x`. Columns in diagnostics are 1-based.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Func {
    Abs,
    Sgn,
    Log,
    Sqrt,
    Sin,
    Cos,
    Exp,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "abs" => Func::Abs,
            "sgn" => Func::Sgn,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Sgn => "sgn",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }

    fn apply(self, v: f64) -> Option<f64> {
        let out = match self {
            Func::Abs => v.abs(),
            Func::Sgn => {
                if v > 0.0 {
                    1.0
                } else if v < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            Func::Log if v <= 0.0 => return None,
            Func::Log => v.ln(),
            Func::Sqrt if v < 0.0 => return None,
            Func::Sqrt => v.sqrt(),
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Exp => v.exp(),
        };
        Some(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Num(f64),
    X,
    S,
    Bin(BinOp, Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A parsed expression together with its source text.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    root: Node,
}

/// Which variables an expression may mention.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vars {
    /// `x` and `s`.
    Both,
    /// `x` only (the 1D form).
    XOnly,
    /// `s` only.
    SOnly,
}

impl Expr {
    /// Parses an expression in `x` and `s`.
    pub fn parse(src: &str) -> Result<Expr, CoreError> {
        Self::parse_with(src, Vars::Both)
    }

    /// Parses an expression that must not mention `s`.
    pub fn parse_1d(src: &str) -> Result<Expr, CoreError> {
        Self::parse_with(src, Vars::XOnly)
    }

    pub fn parse_with(src: &str, vars: Vars) -> Result<Expr, CoreError> {
        let tokens = lex(src)?;
        let mut p = Parser { tokens, pos: 0, vars, end_col: src.chars().count() + 1 };
        let root = p.expr()?;
        if let Some(t) = p.peek() {
            return Err(parse_err(t.col, format!("unexpected {}", t.kind)));
        }
        Ok(Expr { source: src.to_string(), root })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn root(&self) -> &Node {
        &self.root
    }

    pub fn mentions_x(&self) -> bool {
        mentions(&self.root, &Node::X)
    }

    pub fn mentions_s(&self) -> bool {
        mentions(&self.root, &Node::S)
    }

    /// Evaluates at `(x, s)`; `None` on a domain error or a non-finite result.
    pub fn eval(&self, x: f64, s: f64) -> Option<f64> {
        let v = eval(&self.root, x, s)?;
        v.is_finite().then_some(v)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

fn mentions(node: &Node, var: &Node) -> bool {
    match node {
        Node::Num(_) => false,
        Node::X | Node::S => node == var,
        Node::Bin(_, l, r) => mentions(l, var) || mentions(r, var),
        Node::Call(_, a) => mentions(a, var),
    }
}

fn eval(node: &Node, x: f64, s: f64) -> Option<f64> {
    Some(match node {
        Node::Num(v) => *v,
        Node::X => x,
        Node::S => s,
        Node::Call(f, a) => f.apply(eval(a, x, s)?)?,
        Node::Bin(op, l, r) => {
            let l = eval(l, x, s)?;
            let r = eval(r, x, s)?;
            match op {
                BinOp::Add => l + r,
                BinOp::Sub => l - r,
                BinOp::Mul => l * r,
                BinOp::Div if r == 0.0 => return None,
                BinOp::Div => l / r,
                BinOp::Pow => {
                    let v = l.powf(r);
                    if v.is_nan() {
                        return None;
                    }
                    v
                }
            }
        }
    })
}

#[derive(Debug, Clone, PartialEq)]
enum TokKind {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl fmt::Display for TokKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokKind::Num(v) => write!(f, "number {v}"),
            TokKind::Ident(s) => write!(f, "identifier '{s}'"),
            TokKind::Op(c) => write!(f, "operator '{c}'"),
            TokKind::LParen => f.write_str("'('"),
            TokKind::RParen => f.write_str("')'"),
        }
    }
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokKind,
    col: usize,
}

fn parse_err(column: usize, message: impl Into<String>) -> CoreError {
    CoreError::Parse { column, message: message.into() }
}

fn lex(src: &str) -> Result<Vec<Token>, CoreError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        match c {
            '+' | '-' | '*' | '/' | '^' => {
                out.push(Token { kind: TokKind::Op(c), col });
                i += 1;
            }
            '(' => {
                out.push(Token { kind: TokKind::LParen, col });
                i += 1;
            }
            ')' => {
                out.push(Token { kind: TokKind::RParen, col });
                i += 1;
            }
            c if c.is_ascii_digit() || c == '.' => {
                let start = i;
                let mut digits = 0;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                    digits += 1;
                }
                if i < chars.len() && chars[i] == '.' {
                    i += 1;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                        digits += 1;
                    }
                }
                if digits == 0 {
                    return Err(parse_err(col, "malformed number"));
                }
                if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                    let mut j = i + 1;
                    if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                        j += 1;
                    }
                    let exp_start = j;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                    if j == exp_start {
                        return Err(parse_err(i + 1, "exponent without digits"));
                    }
                    i = j;
                }
                let text: String = chars[start..i].iter().collect();
                let v: f64 = text.parse().map_err(|_| parse_err(col, format!("malformed number '{text}'")))?;
                out.push(Token { kind: TokKind::Num(v), col });
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < chars.len() && chars[i].is_ascii_alphanumeric() {
                    i += 1;
                }
                let name: String = chars[start..i].iter().collect();
                out.push(Token { kind: TokKind::Ident(name), col });
            }
            other => return Err(parse_err(col, format!("unexpected character '{other}'"))),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    vars: Vars,
    end_col: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn peek_op(&self) -> Option<char> {
        match self.peek() {
            Some(Token { kind: TokKind::Op(c), .. }) => Some(*c),
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Node, CoreError> {
        let mut lhs = self.term()?;
        while let Some(c @ ('+' | '-')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, CoreError> {
        let mut lhs = self.factor()?;
        while let Some(c @ ('*' | '/')) = self.peek_op() {
            self.pos += 1;
            let rhs = self.factor()?;
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Node::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Node, CoreError> {
        let base = self.atom()?;
        if self.peek_op() == Some('^') {
            self.pos += 1;
            let exponent = self.factor()?;
            return Ok(Node::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Node, CoreError> {
        let end_col = self.end_col;
        let Some(tok) = self.next() else {
            return Err(parse_err(end_col, "unexpected end of input"));
        };
        match tok.kind {
            TokKind::Num(v) => Ok(Node::Num(v)),
            TokKind::LParen => {
                let inner = self.expr()?;
                self.expect_rparen(tok.col)?;
                Ok(inner)
            }
            TokKind::Ident(name) => match name.as_str() {
                "x" if self.vars == Vars::SOnly => {
                    Err(parse_err(tok.col, "variable 'x' is not allowed here"))
                }
                "s" if self.vars == Vars::XOnly => {
                    Err(parse_err(tok.col, "variable 's' is not allowed in a 1D expression"))
                }
                "x" => Ok(Node::X),
                "s" => Ok(Node::S),
                _ => {
                    let Some(func) = Func::from_name(&name) else {
                        return Err(parse_err(tok.col, format!("unknown identifier '{name}'")));
                    };
                    match self.next() {
                        Some(Token { kind: TokKind::LParen, col }) => {
                            let arg = self.expr()?;
                            self.expect_rparen(col)?;
                            Ok(Node::Call(func, Box::new(arg)))
                        }
                        Some(t) => Err(parse_err(t.col, format!("expected '(' after {}", func.name()))),
                        None => Err(parse_err(end_col, format!("expected '(' after {}", func.name()))),
                    }
                }
            },
            other => Err(parse_err(tok.col, format!("unexpected {other}"))),
        }
    }

    fn expect_rparen(&mut self, open_col: usize) -> Result<(), CoreError> {
        match self.next() {
            Some(Token { kind: TokKind::RParen, .. }) => Ok(()),
            Some(t) => Err(parse_err(t.col, format!("expected ')' to close '(' at column {open_col}"))),
            None => Err(parse_err(self.end_col, format!("unclosed '(' at column {open_col}"))),
        }
    }
}
