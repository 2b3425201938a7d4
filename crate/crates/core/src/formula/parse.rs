//! Recursive-descent parser for the concrete formula syntax.
//!
//! ```text
//! formula  := ("forall" | "exists") var ["in" gen "(" vars ")"] "." formula
//!           | disj ["->" formula]
//! disj     := conj ("|" conj)*
//! conj     := unary ("&" unary)*
//! unary    := "!" unary | quantified | "true" | "false" | "(" formula ")"
//!           | tf relop tf
//! relop    := "<=" | "~<=" | "=" | "~=" | "!="
//! tf       := cat ("+" cat)*
//! cat      := post (";" post)*
//! post     := prim ("*" | "[" int [":" int] "]")*
//! prim     := "eps" | value | proj "(" var ")" | "stutter" "(" tf ")"
//!           | "(" tf ")"
//! ```
//!
//! `#` starts a comment that runs to the end of the line.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use super::{Formula, TraceFormula, Var};
use crate::trace::{DataDomain, Value};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.col, self.message)
    }
}

impl core::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Str(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Colon,
    Comma,
    Dot,
    Semi,
    Plus,
    Star,
    Amp,
    Pipe,
    Bang,
    Arrow,
    Le,
    StutterLe,
    Eq,
    StutterEq,
    Ne,
    FloorOpen,
    FloorClose,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Int(n) => write!(f, "`{n}`"),
            Tok::Str(s) => write!(f, "{s:?}"),
            Tok::Eof => f.write_str("end of input"),
            other => {
                let s = match other {
                    Tok::LParen => "(",
                    Tok::RParen => ")",
                    Tok::LBracket => "[",
                    Tok::RBracket => "]",
                    Tok::Colon => ":",
                    Tok::Comma => ",",
                    Tok::Dot => ".",
                    Tok::Semi => ";",
                    Tok::Plus => "+",
                    Tok::Star => "*",
                    Tok::Amp => "&",
                    Tok::Pipe => "|",
                    Tok::Bang => "!",
                    Tok::Arrow => "->",
                    Tok::Le => "<=",
                    Tok::StutterLe => "~<=",
                    Tok::Eq => "=",
                    Tok::StutterEq => "~=",
                    Tok::Ne => "!=",
                    Tok::FloorOpen => "⌊",
                    Tok::FloorClose => "⌋",
                    _ => unreachable!(),
                };
                write!(f, "`{s}`")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Pos {
    line: usize,
    col: usize,
}

fn error(pos: Pos, message: impl Into<String>) -> ParseError {
    ParseError {
        line: pos.line,
        col: pos.col,
        message: message.into(),
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, col };
        let peek = chars.get(i + 1).copied();
        let peek2 = chars.get(i + 2).copied();
        let mut width = 1;
        let tok = match c {
            '\n' => {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            c if c.is_whitespace() => {
                i += 1;
                col += 1;
                continue;
            }
            '#' => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ':' => Tok::Colon,
            ',' => Tok::Comma,
            '.' => Tok::Dot,
            ';' => Tok::Semi,
            '+' => Tok::Plus,
            '*' => Tok::Star,
            '&' | '∧' => Tok::Amp,
            '|' | '∨' => Tok::Pipe,
            '¬' => Tok::Bang,
            '→' => Tok::Arrow,
            '≤' => Tok::Le,
            '≾' => Tok::StutterLe,
            '≅' => Tok::StutterEq,
            '≠' => Tok::Ne,
            '⌊' => Tok::FloorOpen,
            '⌋' => Tok::FloorClose,
            'ε' => Tok::Ident("eps".into()),
            '∀' => Tok::Ident("forall".into()),
            '∃' => Tok::Ident("exists".into()),
            '∈' => Tok::Ident("in".into()),
            '!' if peek == Some('=') => {
                width = 2;
                Tok::Ne
            }
            '!' => Tok::Bang,
            '<' if peek == Some('=') => {
                width = 2;
                Tok::Le
            }
            '~' if peek == Some('<') && peek2 == Some('=') => {
                width = 3;
                Tok::StutterLe
            }
            '~' if peek == Some('=') => {
                width = 2;
                Tok::StutterEq
            }
            '=' => Tok::Eq,
            '-' if peek == Some('>') => {
                width = 2;
                Tok::Arrow
            }
            '-' | '0'..='9' => {
                let start = i;
                let mut j = if c == '-' { i + 1 } else { i };
                if !chars.get(j).is_some_and(|d| d.is_ascii_digit()) {
                    return Err(error(pos, "expected a digit after `-`"));
                }
                while chars.get(j).is_some_and(|d| d.is_ascii_digit()) {
                    j += 1;
                }
                let text: String = chars[start..j].iter().collect();
                width = j - start;
                Tok::Int(
                    text.parse().map_err(|_| {
                        error(pos, format!("integer literal `{text}` out of range"))
                    })?,
                )
            }
            '"' => {
                let mut s = String::new();
                let mut j = i + 1;
                loop {
                    match chars.get(j) {
                        None | Some('\n') => return Err(error(pos, "unterminated string literal")),
                        Some('"') => break,
                        Some('\\') => {
                            let e = match chars.get(j + 1) {
                                Some('n') => '\n',
                                Some('t') => '\t',
                                Some('"') => '"',
                                Some('\\') => '\\',
                                _ => return Err(error(pos, "unknown escape in string literal")),
                            };
                            s.push(e);
                            j += 2;
                        }
                        Some(&ch) => {
                            s.push(ch);
                            j += 1;
                        }
                    }
                }
                width = j + 1 - i;
                Tok::Str(s)
            }
            c if c.is_alphabetic() || c == '_' => {
                let start = i;
                let mut j = i;
                while chars
                    .get(j)
                    .is_some_and(|d| d.is_alphanumeric() || *d == '_' || *d == '\'')
                {
                    j += 1;
                }
                width = j - start;
                Tok::Ident(chars[start..j].iter().collect())
            }
            other => return Err(error(pos, format!("unexpected character `{other}`"))),
        };
        out.push((tok, pos));
        i += width;
        col += width;
    }
    out.push((Tok::Eof, Pos { line, col }));
    Ok(out)
}

const KEYWORDS: &[&str] = &["forall", "exists", "in", "true", "false", "eps", "stutter"];

struct Parser<'a> {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    domain: Option<&'a DataDomain>,
    quantified: Vec<Var>,
    /// The furthest error seen while backtracking, reported if every
    /// alternative fails.
    furthest: Option<ParseError>,
    /// An error that must not be hidden by backtracking.
    fatal: Option<ParseError>,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn new(src: &str, domain: Option<&'a DataDomain>) -> PResult<Self> {
        Ok(Parser {
            toks: lex(src)?,
            at: 0,
            domain,
            quantified: Vec::new(),
            furthest: None,
            fatal: None,
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.at + k).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn fail<T>(&self, what: &str) -> PResult<T> {
        Err(error(
            self.pos(),
            format!("expected {what}, found {}", self.peek()),
        ))
    }

    fn expect(&mut self, tok: Tok, what: &str) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.fail(what)
        }
    }

    fn ident(&mut self, what: &str) -> PResult<(String, Pos)> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok((s, pos))
            }
            _ => self.fail(what),
        }
    }

    fn record(&mut self, e: ParseError) {
        let further = match &self.furthest {
            Some(f) => (e.line, e.col) > (f.line, f.col),
            None => true,
        };
        if further {
            self.furthest = Some(e);
        }
    }

    fn formula(&mut self) -> PResult<Formula> {
        if self.is_kw("forall") || self.is_kw("exists") {
            return self.quantified();
        }
        let lhs = self.disjunction()?;
        if *self.peek() == Tok::Arrow {
            self.bump();
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn quantified(&mut self) -> PResult<Formula> {
        let universal = self.is_kw("forall");
        self.bump();
        let (var, var_pos) = self.ident("a trace variable")?;
        let var: Var = Arc::from(var.as_str());
        if self.quantified.contains(&var) {
            return Err(error(
                var_pos,
                format!("trace variable `{var}` is quantified twice"),
            ));
        }
        self.quantified.push(var.clone());
        let mut generator = None;
        if self.is_kw("in") {
            self.bump();
            let (name, gen_pos) = self.ident("a generator name")?;
            self.expect(Tok::LParen, "`(`")?;
            let mut args = Vec::new();
            if *self.peek() != Tok::RParen {
                loop {
                    let (a, _) = self.ident("a trace variable")?;
                    args.push(Arc::<str>::from(a.as_str()));
                    if *self.peek() == Tok::Comma {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            self.expect(Tok::RParen, "`)`")?;
            generator = Some((name, args, gen_pos));
        }
        self.expect(Tok::Dot, "`.` after the quantified variable")?;
        let body = self.formula()?;
        let wrap = |b: Formula| if universal { Formula::not(b) } else { b };
        let q = match generator {
            None => Formula::Exists {
                var,
                body: Box::new(wrap(body)),
            },
            Some((name, args, gen_pos)) => {
                let later = body.bound_vars();
                if let Some(a) = args.iter().find(|a| later.contains(a)) {
                    return Err(error(
                        gen_pos,
                        format!(
                            "generator argument `{a}` must be quantified before `{name}` is used"
                        ),
                    ));
                }
                Formula::ExistsIn {
                    var,
                    generator: Arc::from(name.as_str()),
                    args,
                    body: Box::new(wrap(body)),
                }
            }
        };
        Ok(wrap(q))
    }

    fn disjunction(&mut self) -> PResult<Formula> {
        let mut f = self.conjunction()?;
        while *self.peek() == Tok::Pipe {
            self.bump();
            let rhs = self.conjunction()?;
            f = Formula::or(f, rhs);
        }
        Ok(f)
    }

    fn conjunction(&mut self) -> PResult<Formula> {
        let mut f = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let rhs = self.unary()?;
            f = Formula::and(f, rhs);
        }
        Ok(f)
    }

    fn unary(&mut self) -> PResult<Formula> {
        if *self.peek() == Tok::Bang {
            self.bump();
            return Ok(Formula::not(self.unary()?));
        }
        if self.is_kw("forall") || self.is_kw("exists") {
            return self.quantified();
        }
        if self.is_kw("true") {
            self.bump();
            return Ok(Formula::tt());
        }
        if self.is_kw("false") {
            self.bump();
            return Ok(Formula::ff());
        }
        if *self.peek() == Tok::LParen {
            let save = self.at;
            let saved_quantified = self.quantified.len();
            match self.relation() {
                Ok(f) => return Ok(f),
                Err(e) => {
                    if let Some(f) = self.fatal.take() {
                        return Err(f);
                    }
                    self.record(e);
                    self.at = save;
                    self.quantified.truncate(saved_quantified);
                }
            }
            self.bump();
            let f = match self.formula() {
                Ok(f) => f,
                Err(e) => {
                    self.record(e);
                    return Err(self.furthest.take().unwrap());
                }
            };
            if let Err(e) = self.expect(Tok::RParen, "`)`") {
                self.record(e);
                return Err(self.furthest.take().unwrap());
            }
            self.furthest = None;
            return Ok(f);
        }
        self.relation()
    }

    fn relation(&mut self) -> PResult<Formula> {
        let pos = self.pos();
        let lhs = self.trace_formula()?;
        let op = self.peek().clone();
        match op {
            Tok::Le | Tok::StutterLe | Tok::Eq | Tok::StutterEq | Tok::Ne => {
                self.bump();
            }
            _ => return self.fail("a comparison (`<=`, `~<=`, `=`, `~=`, `!=`)"),
        }
        let rhs = self.trace_formula()?;
        for side in [&lhs, &rhs] {
            if !side.is_simple() {
                let e = error(
                    pos,
                    format!(
                        "`{side}` is not simple: a side of a comparison may mention at most one trace variable, and none under `*`"
                    ),
                );
                self.fatal = Some(e.clone());
                return Err(e);
            }
        }
        Ok(match op {
            Tok::Le => Formula::leq(lhs, rhs),
            Tok::StutterLe => Formula::stutter_leq(lhs, rhs),
            Tok::Eq => Formula::eq(lhs, rhs),
            Tok::StutterEq => Formula::stutter_eq(lhs, rhs),
            Tok::Ne => Formula::not(Formula::eq(lhs, rhs)),
            _ => unreachable!(),
        })
    }

    fn trace_formula(&mut self) -> PResult<TraceFormula> {
        let mut f = self.concatenation()?;
        while *self.peek() == Tok::Plus {
            self.bump();
            let rhs = self.concatenation()?;
            f = TraceFormula::union(f, rhs);
        }
        Ok(f)
    }

    fn concatenation(&mut self) -> PResult<TraceFormula> {
        let mut f = self.postfix()?;
        while *self.peek() == Tok::Semi {
            self.bump();
            let rhs = self.postfix()?;
            f = TraceFormula::concat(f, rhs);
        }
        Ok(f)
    }

    fn postfix(&mut self) -> PResult<TraceFormula> {
        let mut f = self.primary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    f = TraceFormula::star(f);
                }
                Tok::LBracket => {
                    self.bump();
                    let i = self.int("a slice index")?;
                    let j = if *self.peek() == Tok::Colon {
                        self.bump();
                        self.int("a slice index")?
                    } else {
                        i
                    };
                    self.expect(Tok::RBracket, "`]`")?;
                    f = TraceFormula::slice(f, i, j);
                }
                _ => return Ok(f),
            }
        }
    }

    fn int(&mut self, what: &str) -> PResult<i64> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(n)
            }
            _ => self.fail(what),
        }
    }

    fn value(&mut self) -> PResult<Value> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Value::Int(n))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Value::from(s))
            }
            Tok::LBracket => {
                self.bump();
                let mut items = Vec::new();
                if *self.peek() != Tok::RBracket {
                    loop {
                        items.push(self.value()?);
                        if *self.peek() == Tok::Comma {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                }
                self.expect(Tok::RBracket, "`]`")?;
                Ok(Value::tuple(items))
            }
            _ => self.fail("a value"),
        }
    }

    fn primary(&mut self) -> PResult<TraceFormula> {
        match self.peek().clone() {
            Tok::Int(_) | Tok::Str(_) | Tok::LBracket => Ok(TraceFormula::Const(self.value()?)),
            Tok::LParen => {
                self.bump();
                let f = self.trace_formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::FloorOpen => {
                self.bump();
                let f = self.trace_formula()?;
                self.expect(Tok::FloorClose, "`⌋`")?;
                Ok(TraceFormula::stutter(f))
            }
            Tok::Ident(s) if s == "eps" => {
                self.bump();
                Ok(TraceFormula::Epsilon)
            }
            Tok::Ident(s) if s == "stutter" && *self.peek_at(1) == Tok::LParen => {
                self.bump();
                self.bump();
                let f = self.trace_formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(TraceFormula::stutter(f))
            }
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                let pos = self.pos();
                self.bump();
                if *self.peek() != Tok::LParen {
                    return Err(error(
                        pos,
                        format!("`{s}` must be applied to a trace variable, as in `{s}(p)`"),
                    ));
                }
                if let Some(domain) = self.domain {
                    if !domain.has_projection(&s) {
                        return Err(error(pos, format!("unknown projection `{s}`")));
                    }
                }
                self.bump();
                let (var, _) = self.ident("a trace variable")?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(TraceFormula::proj(&s, &var))
            }
            _ => self.fail("a trace formula"),
        }
    }

    fn finish(&mut self) -> PResult<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.fail("end of input")
        }
    }
}

/// Parses a formula without checking projection names.
pub fn parse_formula(src: &str) -> Result<Formula, ParseError> {
    let mut p = Parser::new(src, None)?;
    let f = p.formula()?;
    p.finish()?;
    Ok(f)
}

/// Parses a formula, rejecting projections the domain does not define.
pub fn parse_formula_in(src: &str, domain: &DataDomain) -> Result<Formula, ParseError> {
    let mut p = Parser::new(src, Some(domain))?;
    let f = p.formula()?;
    p.finish()?;
    Ok(f)
}

pub fn parse_trace_formula(src: &str) -> Result<TraceFormula, ParseError> {
    let mut p = Parser::new(src, None)?;
    let f = p.trace_formula()?;
    p.finish()?;
    Ok(f)
}
