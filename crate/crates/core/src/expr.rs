//! Arithmetic expressions in `x` and `y` for source terms.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | 'x' | 'y' | 'pi' | func '(' expr ')' | '(' expr ')'
//! func    := 'sin' | 'cos' | 'exp' | 'sqrt'
//! ```
//!
//! `^` binds tighter than unary minus and is right associative, so
//! `-x^2 = -(x^2)` and `2^3^2 = 2^(3^2)`.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
            BinaryOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Function {
    Sin,
    Cos,
    Exp,
    Sqrt,
}

impl Function {
    pub const ALL: [Function; 4] = [Function::Sin, Function::Cos, Function::Exp, Function::Sqrt];

    pub fn name(self) -> &'static str {
        match self {
            Function::Sin => "sin",
            Function::Cos => "cos",
            Function::Exp => "exp",
            Function::Sqrt => "sqrt",
        }
    }
}

/// Syntax tree of an expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    X,
    Y,
    Pi,
    Neg(Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    Call(Function, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("at byte {offset}: expected {}, found {found}", expected.join(" or "))]
pub struct ParseError {
    /// Byte offset of the offending token.
    pub offset: usize,
    /// Tokens that would have been accepted.
    pub expected: Vec<String>,
    pub found: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero at ({x}, {y})")]
    DivisionByZero { x: f64, y: f64 },
    #[error("{function} is undefined for argument {argument} at ({x}, {y})")]
    Domain { function: &'static str, argument: f64, x: f64, y: f64 },
    #[error("non-finite value at ({x}, {y})")]
    NonFinite { x: f64, y: f64 },
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Symbol(char),
    End,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Number(v) => write!(f, "number {v}"),
            Token::Ident(s) => write!(f, "'{s}'"),
            Token::Symbol(c) => write!(f, "'{c}'"),
            Token::End => write!(f, "end of input"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
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
            let literal = &text[start..i];
            let value = literal.parse::<f64>().map_err(|_| ParseError {
                offset: start,
                expected: vec!["number".into()],
                found: format!("'{literal}'"),
            })?;
            tokens.push((start, Token::Number(value)));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            tokens.push((start, Token::Ident(text[start..i].to_string())));
        } else if b"+-*/^()".contains(&c) {
            tokens.push((i, Token::Symbol(c as char)));
            i += 1;
        } else {
            let ch = text[i..].chars().next().expect("index is on a char boundary");
            return Err(ParseError {
                offset: i,
                expected: vec!["number".into(), "identifier".into(), "operator".into()],
                found: format!("'{ch}'"),
            });
        }
    }
    tokens.push((text.len(), Token::End));
    Ok(tokens)
}

const OPERAND: [&str; 8] = ["number", "'x'", "'y'", "'pi'", "function", "'('", "'-'", "expression"];

struct Parser {
    tokens: Vec<(usize, Token)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos].1
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].0
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError {
            offset: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().to_string(),
        }
    }

    fn eat(&mut self, symbol: char) -> bool {
        if *self.peek() == Token::Symbol(symbol) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Token::Symbol('+') => BinaryOp::Add,
                Token::Symbol('-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(self.term()?));
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Token::Symbol('*') => BinaryOp::Mul,
                Token::Symbol('/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(self.unary()?));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let base = self.primary()?;
        if self.eat('^') {
            return Ok(Expr::Binary(BinaryOp::Pow, Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let token = self.peek().clone();
        match token {
            Token::Number(v) => {
                self.pos += 1;
                Ok(Expr::Number(v))
            }
            Token::Symbol('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error(&["')'", "operator"]));
                }
                Ok(inner)
            }
            Token::Ident(name) => {
                let leaf = match name.as_str() {
                    "x" => Some(Expr::X),
                    "y" => Some(Expr::Y),
                    "pi" => Some(Expr::Pi),
                    _ => None,
                };
                if let Some(leaf) = leaf {
                    self.pos += 1;
                    return Ok(leaf);
                }
                let Some(func) = Function::ALL.into_iter().find(|f| f.name() == name) else {
                    return Err(self.error(&["'x'", "'y'", "'pi'", "'sin'", "'cos'", "'exp'", "'sqrt'"]));
                };
                self.pos += 1;
                if !self.eat('(') {
                    return Err(self.error(&["'('"]));
                }
                let arg = self.expr()?;
                if !self.eat(')') {
                    return Err(self.error(&["')'", "operator"]));
                }
                Ok(Expr::Call(func, Box::new(arg)))
            }
            _ => Err(self.error(&OPERAND[..7])),
        }
    }
}

/// Parses an expression.
pub fn parse_expression(text: &str) -> Result<Expr, ParseError> {
    let mut parser = Parser {
        tokens: tokenize(text)?,
        pos: 0,
    };
    if *parser.peek() == Token::End {
        return Err(parser.error(&OPERAND[7..]));
    }
    let expr = parser.expr()?;
    if *parser.peek() != Token::End {
        return Err(parser.error(&["operator", "end of input"]));
    }
    Ok(expr)
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_expression(s)
    }
}

impl Expr {
    /// Evaluates at `(x, y)`, reporting division by zero, domain errors and
    /// overflow.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64, EvalError> {
        let value = match self {
            Expr::Number(v) => *v,
            Expr::X => x,
            Expr::Y => y,
            Expr::Pi => std::f64::consts::PI,
            Expr::Neg(e) => -e.eval(x, y)?,
            Expr::Binary(op, a, b) => {
                let (a, b) = (a.eval(x, y)?, b.eval(x, y)?);
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => {
                        if b == 0.0 {
                            return Err(EvalError::DivisionByZero { x, y });
                        }
                        a / b
                    }
                    BinaryOp::Pow => {
                        let v = a.powf(b);
                        if v.is_nan() {
                            return Err(EvalError::Domain { function: "^", argument: a, x, y });
                        }
                        v
                    }
                }
            }
            Expr::Call(f, arg) => {
                let a = arg.eval(x, y)?;
                match f {
                    Function::Sin => a.sin(),
                    Function::Cos => a.cos(),
                    Function::Exp => a.exp(),
                    Function::Sqrt => {
                        if a < 0.0 {
                            return Err(EvalError::Domain { function: "sqrt", argument: a, x, y });
                        }
                        a.sqrt()
                    }
                }
            }
        };
        if !value.is_finite() {
            return Err(EvalError::NonFinite { x, y });
        }
        Ok(value)
    }
}

/// Fully parenthesized form that parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Number(v) => write!(f, "{v:?}"),
            Expr::X => f.write_str("x"),
            Expr::Y => f.write_str("y"),
            Expr::Pi => f.write_str("pi"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}
