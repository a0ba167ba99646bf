//! Expression syntax.
//!
//! Precedence, tightest first: `^` (integer exponents), unary `−`, `*` `/` and
//! juxtaposition, `+` `−`. Juxtaposition lets canonical polynomial text such as
//! `-(1/2)i * w + z zbar` be read back unchanged.

use std::fmt;

use num::{BigInt, BigRational, One, Zero};

#[derive(Debug, Clone, PartialEq)]
pub enum Func {
    Re,
    Im,
    Conj,
    Abs2,
}

impl Func {
    fn name(&self) -> &'static str {
        match self {
            Func::Re => "Re",
            Func::Im => "Im",
            Func::Conj => "conj",
            Func::Abs2 => "abs2",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Source position, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Num(BigRational),
    /// The imaginary unit.
    I,
    Var(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

impl Expr {
    /// Built only from real literals, `Re`, `Im`, `abs2`, `+ − *`, `^` and division by such constants.
    pub fn is_syntactically_real(&self) -> bool {
        match &self.kind {
            ExprKind::Num(_) => true,
            ExprKind::I | ExprKind::Var(_) => false,
            ExprKind::Neg(e) | ExprKind::Pow(e, _) => e.is_syntactically_real(),
            ExprKind::Bin(_, a, b) => a.is_syntactically_real() && b.is_syntactically_real(),
            ExprKind::Call(Func::Conj, e) => e.is_syntactically_real(),
            ExprKind::Call(_, _) => true,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Num(q) if q.denom().is_one() => write!(f, "{}", q.numer()),
            ExprKind::Num(q) => write!(f, "({}/{})", q.numer(), q.denom()),
            ExprKind::I => write!(f, "i"),
            ExprKind::Var(v) => write!(f, "{v}"),
            ExprKind::Neg(e) => write!(f, "(-{e})"),
            ExprKind::Bin(op, a, b) => {
                let s = match op {
                    BinOp::Add => "+",
                    BinOp::Sub => "-",
                    BinOp::Mul => "*",
                    BinOp::Div => "/",
                };
                write!(f, "({a} {s} {b})")
            }
            ExprKind::Pow(e, k) => write!(f, "{e}^{k}"),
            ExprKind::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("unexpected character '{0}'")]
    BadChar(char),
    #[error("unexpected {0}")]
    Unexpected(String),
    #[error("expected {expected}, found {found}")]
    Expected { expected: String, found: String },
    #[error("unknown identifier '{0}'")]
    UnknownIdentifier(String),
    #[error("non-integer exponent")]
    NonIntegerExponent,
    #[error("exponent must be a non-negative integer constant")]
    BadExponent,
    #[error("malformed number '{0}'")]
    BadNumber(String),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{pos}: {kind}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(BigRational, String),
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

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(_, s) => format!("number '{s}'"),
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn decimal(text: &str) -> Option<BigRational> {
    let (int, frac) = text.split_once('.').unwrap_or((text, ""));
    let digits = format!("{int}{frac}");
    let n: BigInt = digits.parse().ok()?;
    Some(BigRational::new(n, num::pow(BigInt::from(10), frac.len())))
}

fn tokenize(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut line, mut col) = (1, 1);
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        let pos = Pos { line, column: col };
        if c == '\n' {
            line += 1;
            col = 1;
            k += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            k += 1;
            continue;
        }
        let start = k;
        let tok = if c.is_ascii_digit() || c == '.' {
            while k < chars.len() && (chars[k].is_ascii_digit() || chars[k] == '.') {
                k += 1;
            }
            let text: String = chars[start..k].iter().collect();
            let q = decimal(&text).ok_or(ParseError { kind: ParseErrorKind::BadNumber(text.clone()), pos })?;
            Tok::Num(q, text)
        } else if c.is_alphabetic() || c == '_' {
            while k < chars.len() && (chars[k].is_alphanumeric() || chars[k] == '_') {
                k += 1;
            }
            Tok::Ident(chars[start..k].iter().collect())
        } else {
            k += 1;
            match c {
                '+' => Tok::Plus,
                '-' | '−' => Tok::Minus,
                '*' | '·' => Tok::Star,
                '/' => Tok::Slash,
                '^' => Tok::Caret,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                _ => return Err(ParseError { kind: ParseErrorKind::BadChar(c), pos }),
            }
        };
        col += k - start;
        out.push((tok, pos));
    }
    out.push((Tok::Eof, Pos { line, column: col }));
    Ok(out)
}

/// Names accepted as variables; everything else that is not a function or `i` is rejected.
pub fn is_variable(name: &str) -> bool {
    let indexed = |prefix: &str, rest: &str| {
        rest.strip_prefix(prefix)
            .map(|d| d.is_empty() || (d.chars().all(|c| c.is_ascii_digit()) && !d.starts_with('0')))
            .unwrap_or(false)
    };
    let base = name.strip_suffix("bar").unwrap_or(name);
    matches!(base, "w") || indexed("z", base) || (!name.ends_with("bar") && (name == "y" || indexed("x", name)))
}

struct Parser {
    toks: Vec<(Tok, Pos)>,
    k: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.k].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.k].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.k].clone();
        if self.k + 1 < self.toks.len() {
            self.k += 1;
        }
        t
    }

    fn err<T>(&self, kind: ParseErrorKind) -> Result<T, ParseError> {
        Err(ParseError { kind, pos: self.pos() })
    }

    fn expect(&mut self, want: Tok) -> Result<(), ParseError> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            self.err(ParseErrorKind::Expected { expected: want.describe(), found: self.peek().describe() })
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let (_, pos) = self.bump();
            let rhs = self.product()?;
            lhs = Expr { kind: ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)), pos };
        }
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let (op, pos) = match self.peek() {
                Tok::Star => (BinOp::Mul, self.bump().1),
                Tok::Slash => (BinOp::Div, self.bump().1),
                Tok::Num(..) | Tok::Ident(_) | Tok::LParen => (BinOp::Mul, self.pos()),
                _ => return Ok(lhs),
            };
            let rhs = self.unary()?;
            lhs = Expr { kind: ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)), pos };
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Tok::Minus => {
                let (_, pos) = self.bump();
                let e = self.unary()?;
                Ok(Expr { kind: ExprKind::Neg(Box::new(e)), pos })
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        let (_, pos) = self.bump();
        let exp_pos = self.pos();
        // Exponents are constant expressions; `z^-1` and `z^(1/2)` parse but are rejected here.
        let e = self.unary()?;
        let k = match const_value(&e) {
            Some(q) if !q.denom().is_one() => return Err(ParseError { kind: ParseErrorKind::NonIntegerExponent, pos: exp_pos }),
            Some(q) if q >= BigRational::zero() && q <= BigRational::from_integer(u32::MAX.into()) => {
                q.numer().to_string().parse::<u32>().expect("range checked")
            }
            _ => return Err(ParseError { kind: ParseErrorKind::BadExponent, pos: exp_pos }),
        };
        Ok(Expr { kind: ExprKind::Pow(Box::new(base), k), pos })
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let (tok, pos) = self.bump();
        let kind = match tok {
            Tok::Num(q, _) => ExprKind::Num(q),
            Tok::LParen => {
                let e = self.sum()?;
                self.expect(Tok::RParen)?;
                return Ok(e);
            }
            Tok::Ident(name) => {
                let func = match name.as_str() {
                    "Re" => Some(Func::Re),
                    "Im" => Some(Func::Im),
                    "conj" => Some(Func::Conj),
                    "abs2" => Some(Func::Abs2),
                    _ => None,
                };
                if let Some(func) = func {
                    self.expect(Tok::LParen)?;
                    let arg = self.sum()?;
                    self.expect(Tok::RParen)?;
                    ExprKind::Call(func, Box::new(arg))
                } else if name == "i" {
                    ExprKind::I
                } else if is_variable(&name) {
                    ExprKind::Var(name)
                } else {
                    return Err(ParseError { kind: ParseErrorKind::UnknownIdentifier(name), pos });
                }
            }
            other => return Err(ParseError { kind: ParseErrorKind::Unexpected(other.describe()), pos }),
        };
        Ok(Expr { kind, pos })
    }
}

/// Value of a variable-free, `i`-free expression.
fn const_value(e: &Expr) -> Option<BigRational> {
    match &e.kind {
        ExprKind::Num(q) => Some(q.clone()),
        ExprKind::Neg(a) => const_value(a).map(|q| -q),
        ExprKind::Bin(op, a, b) => {
            let (a, b) = (const_value(a)?, const_value(b)?);
            match op {
                BinOp::Add => Some(a + b),
                BinOp::Sub => Some(a - b),
                BinOp::Mul => Some(a * b),
                BinOp::Div => (!b.is_zero()).then(|| a / b),
            }
        }
        ExprKind::Pow(a, k) => const_value(a).map(|q| num::pow(q, *k as usize)),
        _ => None,
    }
}

pub fn parse(src: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { toks: tokenize(src)?, k: 0 };
    if *p.peek() == Tok::Eof {
        return p.err(ParseErrorKind::Unexpected("end of input".into()));
    }
    let e = p.sum()?;
    if *p.peek() != Tok::Eof {
        let found = p.peek().describe();
        return p.err(ParseErrorKind::Unexpected(found));
    }
    Ok(e)
}
