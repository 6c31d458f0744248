//! Rate-expression parser and evaluator.
//!
//! Grammar (whitespace insensitive):
//!
//! ```text
//! expr   := term  (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := base ('^' factor)?                  right associative
//! base   := NUMBER
//!         | 'x' '[' IDENT ']'                   species concentration
//!         | '-' base
//!         | '(' expr ')'
//!         | FUNC '(' expr (',' expr)* ')'
//! ```
//!
//! Functions: `exp`, `log`, `step` (one argument); `pow`, `min`, `max`
//! (two arguments). `pow(a, b)` is the same node as `a ^ b`.
//!
//! Conventions, chosen so rates are right-continuous and defined on the
//! closed positive orthant:
//!
//! - `0 ^ 0 = 1`.
//! - `step(u) = 1` for `u >= 0`, else `0` (right continuous at zero).
//! - `min`/`max` propagate NaN instead of swallowing it.
//! - Unary minus lives at the `base` level, so `-a^b` parses as `(-a)^b`.
//!
//! Besides plain evaluation, every expression can report the logarithm of
//! its value computed structurally (`Mul` becomes a sum of logs, `exp`
//! drops the wrapper, and so on). That keeps quantities like
//! `log(exp(-1/x))` finite for small `x` where the plain value underflows
//! to zero, which the action integrators depend on near the set where
//! rates vanish.

use crate::error::{Error, Result};
use crate::numeric::{log_add_exp, log_sub_exp};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Species index into the network's species list.
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Exp(Box<Expr>),
    Log(Box<Expr>),
    Step(Box<Expr>),
    Min(Box<Expr>, Box<Expr>),
    Max(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Num(c) => *c,
            Expr::Var(i) => x[*i],
            Expr::Neg(a) => -a.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            // powf already returns 1 for 0^0.
            Expr::Pow(a, b) => a.eval(x).powf(b.eval(x)),
            Expr::Exp(a) => a.eval(x).exp(),
            Expr::Log(a) => a.eval(x).ln(),
            Expr::Step(a) => {
                let v = a.eval(x);
                if v.is_nan() {
                    f64::NAN
                } else if v >= 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Expr::Min(a, b) => {
                let (va, vb) = (a.eval(x), b.eval(x));
                if va.is_nan() || vb.is_nan() {
                    f64::NAN
                } else {
                    va.min(vb)
                }
            }
            Expr::Max(a, b) => {
                let (va, vb) = (a.eval(x), b.eval(x));
                if va.is_nan() || vb.is_nan() {
                    f64::NAN
                } else {
                    va.max(vb)
                }
            }
        }
    }

    /// Structural log of the value; NaN when a subterm is negative or the
    /// structure does not expose a log form (the caller falls back to the
    /// plain value in that case).
    fn log_eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Num(c) => c.ln(),
            Expr::Var(i) => x[*i].ln(),
            Expr::Neg(a) => (-a.eval(x)).ln(),
            Expr::Add(a, b) => log_add_exp(a.log_eval(x), b.log_eval(x)),
            Expr::Sub(a, b) => log_sub_exp(a.log_eval(x), b.log_eval(x)),
            Expr::Mul(a, b) => a.log_eval(x) + b.log_eval(x),
            Expr::Div(a, b) => a.log_eval(x) - b.log_eval(x),
            Expr::Pow(a, b) => {
                let e = b.eval(x);
                if e == 0.0 {
                    0.0
                } else {
                    e * a.log_eval(x)
                }
            }
            Expr::Exp(a) => a.eval(x),
            Expr::Log(a) => a.eval(x).ln().ln(),
            Expr::Step(a) => {
                let v = a.eval(x);
                if v.is_nan() {
                    f64::NAN
                } else if v >= 0.0 {
                    0.0
                } else {
                    f64::NEG_INFINITY
                }
            }
            Expr::Min(a, b) => {
                let (la, lb) = (a.log_eval(x), b.log_eval(x));
                if la.is_nan() || lb.is_nan() {
                    f64::NAN
                } else {
                    la.min(lb)
                }
            }
            Expr::Max(a, b) => {
                let (la, lb) = (a.log_eval(x), b.log_eval(x));
                if la.is_nan() || lb.is_nan() {
                    f64::NAN
                } else {
                    la.max(lb)
                }
            }
        }
    }

    /// log of the expression's value, preferring the structural form and
    /// falling back to `ln(eval(x))` when the structure gives NaN. Returns
    /// NaN when the value itself is negative or undefined.
    pub fn log_value(&self, x: &[f64]) -> f64 {
        let l = self.log_eval(x);
        if l.is_nan() {
            self.eval(x).ln()
        } else {
            l
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Pow(..) => 3,
            Expr::Neg(..) => 4,
            _ => 5,
        }
    }

    /// Render with minimal parentheses; reparsing reproduces the same
    /// evaluation (up to `Neg(Num(c))` versus a negative literal).
    pub fn to_formula(&self, species: &[String]) -> String {
        fn go(e: &Expr, species: &[String], min_prec: u8, out: &mut String) {
            let prec = e.precedence();
            let parens = prec < min_prec;
            if parens {
                out.push('(');
            }
            match e {
                Expr::Num(c) => out.push_str(&format!("{c}")),
                Expr::Var(i) => {
                    out.push_str("x[");
                    out.push_str(&species[*i]);
                    out.push(']');
                }
                Expr::Neg(a) => {
                    out.push('-');
                    go(a, species, 4, out);
                }
                Expr::Add(a, b) => {
                    go(a, species, 1, out);
                    out.push_str(" + ");
                    go(b, species, 2, out);
                }
                Expr::Sub(a, b) => {
                    go(a, species, 1, out);
                    out.push_str(" - ");
                    go(b, species, 2, out);
                }
                Expr::Mul(a, b) => {
                    go(a, species, 2, out);
                    out.push_str(" * ");
                    go(b, species, 3, out);
                }
                Expr::Div(a, b) => {
                    go(a, species, 2, out);
                    out.push_str(" / ");
                    go(b, species, 3, out);
                }
                Expr::Pow(a, b) => {
                    go(a, species, 4, out);
                    out.push_str(" ^ ");
                    go(b, species, 3, out);
                }
                Expr::Exp(a) | Expr::Log(a) | Expr::Step(a) => {
                    out.push_str(match e {
                        Expr::Exp(..) => "exp(",
                        Expr::Log(..) => "log(",
                        _ => "step(",
                    });
                    go(a, species, 0, out);
                    out.push(')');
                }
                Expr::Min(a, b) | Expr::Max(a, b) => {
                    out.push_str(if matches!(e, Expr::Min(..)) {
                        "min("
                    } else {
                        "max("
                    });
                    go(a, species, 0, out);
                    out.push_str(", ");
                    go(b, species, 0, out);
                    out.push(')');
                }
            }
            if parens {
                out.push(')');
            }
        }
        let mut s = String::new();
        go(self, species, 0, &mut s);
        s
    }
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
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    line: u32,
    col: u32,
}

fn err_at(line: u32, col: u32, message: impl Into<String>) -> Error {
    Error::Expr {
        line: line as usize,
        column: col as usize,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Spanned>> {
    let mut out = Vec::new();
    let mut line: u32 = 1;
    let mut col: u32 = 1;
    let bytes = text.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let (tline, tcol) = (line, col);
        match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            ' ' | '\t' | '\r' => {
                i += 1;
                col += 1;
                continue;
            }
            '+' => out.push(Spanned { tok: Tok::Plus, line: tline, col: tcol }),
            '-' => out.push(Spanned { tok: Tok::Minus, line: tline, col: tcol }),
            '*' => out.push(Spanned { tok: Tok::Star, line: tline, col: tcol }),
            '/' => out.push(Spanned { tok: Tok::Slash, line: tline, col: tcol }),
            '^' => out.push(Spanned { tok: Tok::Caret, line: tline, col: tcol }),
            '(' => out.push(Spanned { tok: Tok::LParen, line: tline, col: tcol }),
            ')' => out.push(Spanned { tok: Tok::RParen, line: tline, col: tcol }),
            '[' => out.push(Spanned { tok: Tok::LBracket, line: tline, col: tcol }),
            ']' => out.push(Spanned { tok: Tok::RBracket, line: tline, col: tcol }),
            ',' => out.push(Spanned { tok: Tok::Comma, line: tline, col: tcol }),
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    if i >= bytes.len() || !bytes[i].is_ascii_digit() {
                        return Err(err_at(tline, tcol, "digit expected after decimal point"));
                    }
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
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
                let s = &text[start..i];
                let v: f64 = s
                    .parse()
                    .map_err(|_| err_at(tline, tcol, format!("malformed number {s:?}")))?;
                col += (i - start) as u32;
                out.push(Spanned { tok: Tok::Num(v), line: tline, col: tcol });
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let start = i;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let s = text[start..i].to_string();
                col += (i - start) as u32;
                out.push(Spanned { tok: Tok::Ident(s), line: tline, col: tcol });
                continue;
            }
            other => {
                return Err(err_at(tline, tcol, format!("unexpected character {other:?}")));
            }
        }
        i += 1;
        col += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    species: &'a [String],
    end_line: u32,
    end_col: u32,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|s| &s.tok)
    }

    fn here(&self) -> (u32, u32) {
        self.toks
            .get(self.pos)
            .map(|s| (s.line, s.col))
            .unwrap_or((self.end_line, self.end_col))
    }

    fn bump(&mut self) -> Option<Spanned> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<()> {
        let (line, col) = self.here();
        match self.bump() {
            Some(s) if s.tok == *want => Ok(()),
            Some(s) => Err(err_at(s.line, s.col, format!("expected {what}, found {:?}", s.tok))),
            None => Err(err_at(line, col, format!("expected {what}, found end of input"))),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Tok::Minus) => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.factor()?));
                }
                Some(Tok::Slash) => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.factor()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if matches!(self.peek(), Some(Tok::Caret)) {
            self.bump();
            let rhs = self.factor()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(rhs)));
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr> {
        let (line, col) = self.here();
        let Some(s) = self.bump() else {
            return Err(err_at(line, col, "expected an operand, found end of input"));
        };
        match s.tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Minus => Ok(Expr::Neg(Box::new(self.base()?))),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(&Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) if name == "x" && matches!(self.peek(), Some(Tok::LBracket)) => {
                self.bump();
                let (sl, sc) = self.here();
                let sp = match self.bump() {
                    Some(Spanned { tok: Tok::Ident(n), .. }) => n,
                    _ => return Err(err_at(sl, sc, "expected a species name inside x[..]")),
                };
                self.expect(&Tok::RBracket, "']'")?;
                match self.species.iter().position(|s| *s == sp) {
                    Some(i) => Ok(Expr::Var(i)),
                    None => Err(err_at(
                        sl,
                        sc,
                        format!(
                            "unknown species {sp:?}; model species are [{}]",
                            self.species.join(", ")
                        ),
                    )),
                }
            }
            Tok::Ident(name) => {
                let arity = match name.as_str() {
                    "exp" | "log" | "step" => 1usize,
                    "pow" | "min" | "max" => 2,
                    _ => {
                        return Err(err_at(
                            s.line,
                            s.col,
                            format!("unknown function or identifier {name:?}"),
                        ))
                    }
                };
                self.expect(&Tok::LParen, "'('")?;
                let mut args = vec![self.expr()?];
                while matches!(self.peek(), Some(Tok::Comma)) {
                    self.bump();
                    args.push(self.expr()?);
                }
                self.expect(&Tok::RParen, "')'")?;
                if args.len() != arity {
                    return Err(err_at(
                        s.line,
                        s.col,
                        format!("{name} takes {arity} argument(s), found {}", args.len()),
                    ));
                }
                let mut it = args.into_iter();
                let a = Box::new(it.next().unwrap());
                Ok(match name.as_str() {
                    "exp" => Expr::Exp(a),
                    "log" => Expr::Log(a),
                    "step" => Expr::Step(a),
                    "pow" => Expr::Pow(a, Box::new(it.next().unwrap())),
                    "min" => Expr::Min(a, Box::new(it.next().unwrap())),
                    "max" => Expr::Max(a, Box::new(it.next().unwrap())),
                    _ => unreachable!(),
                })
            }
            other => Err(err_at(s.line, s.col, format!("expected an operand, found {other:?}"))),
        }
    }
}

/// Parse a rate formula against a species list; variables `x[Name]` resolve
/// to indices in that list.
pub fn parse_expr(text: &str, species: &[String]) -> Result<Expr> {
    let toks = lex(text)?;
    let lines = text.lines().count().max(1) as u32;
    let last_len = text.lines().last().map(|l| l.len()).unwrap_or(0) as u32;
    let mut p = Parser {
        toks,
        pos: 0,
        species,
        end_line: lines,
        end_col: last_len + 1,
    };
    let e = p.expr()?;
    if let Some(s) = p.toks.get(p.pos) {
        return Err(err_at(
            s.line,
            s.col,
            format!("unexpected trailing input starting at {:?}", s.tok),
        ));
    }
    Ok(e)
}
