//! Concrete text syntax for formulas: a recursive-descent parser and a
//! printer whose output parses back to the same tree.
//!
//! Binding from loosest to tightest is `->`, `|`, `&`, `~`. Inside the
//! parentheses of a probability term `P[t](...)` a top-level `|` is the
//! conditional bar, so a disjunction there needs its own parentheses.

use alloc::borrow::ToOwned;
use alloc::boxed::Box;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use num_traits::{One, Signed, Zero};

use crate::formula::{
    CondProbCmp, Comparator, EventSymbol, FactSymbol, Formula, Monomial, Polynomial, ProbCmp,
    TimeSymbol,
};
use crate::rational::{parse_rational, Rational};

pub const KEYWORDS: [&str; 5] = ["HOLDS", "OCC", "INEV", "POSS", "P"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub expected: Vec<String>,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError { line, column, message: message.into(), expected: Vec::new() }
    }

    fn expecting(mut self, expected: &[&str]) -> Self {
        self.expected = expected.iter().map(|s| (*s).to_owned()).collect();
        self
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl core::error::Error for ParseError {}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Number(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Amp,
    Bar,
    Tilde,
    Arrow,
    Plus,
    Minus,
    Star,
    Slash,
    Eq,
    Le,
    Lt,
    Ge,
    Gt,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => alloc::format!("`{s}`"),
            Tok::Number(s) => alloc::format!("number `{s}`"),
            Tok::Eof => "end of input".to_string(),
            other => alloc::format!("`{}`", other.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Amp => "&",
            Tok::Bar => "|",
            Tok::Tilde => "~",
            Tok::Arrow => "->",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Eq => "=",
            Tok::Le => "<=",
            Tok::Lt => "<",
            Tok::Ge => ">=",
            Tok::Gt => ">",
            Tok::Ident(_) | Tok::Number(_) | Tok::Eof => "",
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let (mut line, mut column) = (1, 1);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c == '\n' {
            line += 1;
            column = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            column += 1;
            i += 1;
            continue;
        }
        let start = (line, column);
        let next = chars.get(i + 1).copied();
        let (tok, len) = if ident_start(c) {
            let mut j = i + 1;
            loop {
                match chars.get(j) {
                    Some(&d) if ident_continue(d) => j += 1,
                    // a hyphen joins words, but never a `->` arrow
                    Some('-') if chars.get(j + 1).is_some_and(|&d| d.is_ascii_alphanumeric()) => j += 1,
                    _ => break,
                }
            }
            (Tok::Ident(chars[i..j].iter().collect()), j - i)
        } else if c.is_ascii_digit() || (c == '.' && next.is_some_and(|d| d.is_ascii_digit())) {
            let mut j = i;
            let mut seen_dot = false;
            while let Some(&d) = chars.get(j) {
                if d.is_ascii_digit() {
                    j += 1;
                } else if d == '.' && !seen_dot && chars.get(j + 1).is_some_and(|e| e.is_ascii_digit()) {
                    seen_dot = true;
                    j += 1;
                } else {
                    break;
                }
            }
            (Tok::Number(chars[i..j].iter().collect()), j - i)
        } else {
            match (c, next) {
                ('-', Some('>')) => (Tok::Arrow, 2),
                ('<', Some('=')) => (Tok::Le, 2),
                ('>', Some('=')) => (Tok::Ge, 2),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                ('[', _) => (Tok::LBracket, 1),
                (']', _) => (Tok::RBracket, 1),
                (',', _) => (Tok::Comma, 1),
                ('&', _) => (Tok::Amp, 1),
                ('|', _) => (Tok::Bar, 1),
                ('~', _) => (Tok::Tilde, 1),
                ('+', _) => (Tok::Plus, 1),
                ('-', _) => (Tok::Minus, 1),
                ('*', _) => (Tok::Star, 1),
                ('/', _) => (Tok::Slash, 1),
                ('=', _) => (Tok::Eq, 1),
                ('<', _) => (Tok::Lt, 1),
                ('>', _) => (Tok::Gt, 1),
                _ => {
                    return Err(ParseError::new(line, column, alloc::format!("unexpected character `{c}`")))
                }
            }
        };
        tokens.push(Token { tok, line: start.0, column: start.1 });
        i += len;
        column += len;
    }
    tokens.push(Token { tok: Tok::Eof, line, column });
    Ok(tokens)
}

const ATOM_START: &[&str] = &["HOLDS", "OCC", "INEV", "POSS", "P", "time symbol", "number", "(", "~"];

struct PTerm {
    time: TimeSymbol,
    target: Formula,
    given: Option<Formula>,
    line: usize,
    column: usize,
}

enum Factor {
    Const(Rational),
    Terms(Rational, Vec<PTerm>),
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_here(&self, message: impl Into<String>, expected: &[&str]) -> ParseError {
        let t = self.peek();
        ParseError::new(t.line, t.column, message).expecting(expected)
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        let found = self.peek().tok.describe();
        self.error_here(alloc::format!("unexpected {found}"), expected)
    }

    fn expect(&mut self, tok: Tok) -> Result<Token, ParseError> {
        if self.peek().tok == tok {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&[tok.text()]))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match &self.peek().tok {
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                let name = name.clone();
                self.bump();
                Ok(name)
            }
            Tok::Ident(name) => {
                let msg = alloc::format!("keyword `{name}` cannot be used as a {what}");
                Err(self.error_here(msg, &[what]))
            }
            _ => Err(self.unexpected(&[what])),
        }
    }

    fn time(&mut self) -> Result<TimeSymbol, ParseError> {
        self.ident("time symbol").map(TimeSymbol::new)
    }

    fn formula(&mut self, in_pterm: bool) -> Result<Formula, ParseError> {
        let lhs = self.disjunction(in_pterm)?;
        if self.peek().tok == Tok::Arrow {
            self.bump();
            let rhs = self.formula(in_pterm)?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self, in_pterm: bool) -> Result<Formula, ParseError> {
        let mut acc = self.conjunction()?;
        while !in_pterm && self.peek().tok == Tok::Bar {
            self.bump();
            acc = Formula::or(acc, self.conjunction()?);
        }
        Ok(acc)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut acc = self.unary()?;
        while self.peek().tok == Tok::Amp {
            self.bump();
            acc = Formula::and(acc, self.unary()?);
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        if self.peek().tok == Tok::Tilde {
            self.bump();
            return Ok(Formula::not(self.unary()?));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        match self.peek().tok.clone() {
            Tok::LParen => {
                self.bump();
                let f = self.formula(false)?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::Number(_) | Tok::Minus | Tok::Plus => self.prob_comparison(),
            Tok::Ident(name) => match name.as_str() {
                "HOLDS" | "OCC" => {
                    self.bump();
                    self.expect(Tok::LParen)?;
                    let start = self.time()?;
                    self.expect(Tok::Comma)?;
                    let end = self.time()?;
                    self.expect(Tok::Comma)?;
                    let f = if name == "HOLDS" {
                        let fact = self.ident("fact symbol")?;
                        Formula::Holds(start, end, FactSymbol::new(fact))
                    } else {
                        let event = self.ident("event symbol")?;
                        Formula::Occ(start, end, EventSymbol::new(event))
                    };
                    self.expect(Tok::RParen)?;
                    Ok(f)
                }
                "INEV" | "POSS" => {
                    self.bump();
                    self.expect(Tok::LBracket)?;
                    let t = self.time()?;
                    self.expect(Tok::RBracket)?;
                    self.expect(Tok::LParen)?;
                    let inner = Box::new(self.formula(false)?);
                    self.expect(Tok::RParen)?;
                    Ok(if name == "INEV" { Formula::Inev(t, inner) } else { Formula::Poss(t, inner) })
                }
                "P" => self.prob_comparison(),
                _ => {
                    let lhs = self.time()?;
                    let ctor: fn(TimeSymbol, TimeSymbol) -> Formula = match self.peek().tok {
                        Tok::Eq => Formula::TimeEq,
                        Tok::Le => Formula::TimeLe,
                        Tok::Lt => Formula::TimeLt,
                        _ => return Err(self.unexpected(&["=", "<=", "<"])),
                    };
                    self.bump();
                    let rhs = self.time()?;
                    Ok(ctor(lhs, rhs))
                }
            },
            _ => Err(self.unexpected(ATOM_START)),
        }
    }

    fn rational(&mut self) -> Result<Rational, ParseError> {
        let tok = self.bump();
        let Tok::Number(num) = tok.tok else {
            self.pos -= 1;
            return Err(self.unexpected(&["number"]));
        };
        let mut text = num;
        if self.peek().tok == Tok::Slash {
            self.bump();
            match self.peek().tok.clone() {
                Tok::Number(den) => {
                    self.bump();
                    text.push('/');
                    text.push_str(&den);
                }
                _ => return Err(self.unexpected(&["denominator"])),
            }
        }
        parse_rational(&text).map_err(|e| ParseError::new(tok.line, tok.column, e.to_string()))
    }

    fn pterm(&mut self) -> Result<PTerm, ParseError> {
        let head = self.peek().clone();
        match &head.tok {
            Tok::Ident(p) if p == "P" => {
                self.bump();
            }
            _ => return Err(self.unexpected(&["P"])),
        }
        self.expect(Tok::LBracket)?;
        let time = self.time()?;
        self.expect(Tok::RBracket)?;
        self.expect(Tok::LParen)?;
        let target = self.formula(true)?;
        let given = if self.peek().tok == Tok::Bar {
            self.bump();
            let g = self.formula(true)?;
            if self.peek().tok == Tok::Bar {
                return Err(self.error_here(
                    "more than one top-level `|` inside a probability term; parenthesize disjunctions",
                    &[")"],
                ));
            }
            Some(g)
        } else {
            None
        };
        self.expect(Tok::RParen)?;
        Ok(PTerm { time, target, given, line: head.line, column: head.column })
    }

    fn term(&mut self) -> Result<Factor, ParseError> {
        let coeff = match self.peek().tok {
            Tok::Number(_) => {
                let c = self.rational()?;
                if self.peek().tok != Tok::Star {
                    return Ok(Factor::Const(c));
                }
                self.bump();
                c
            }
            _ => Rational::one(),
        };
        let mut terms = vec![self.pterm()?];
        while self.peek().tok == Tok::Star {
            self.bump();
            terms.push(self.pterm()?);
        }
        Ok(Factor::Terms(coeff, terms))
    }

    fn polynomial(&mut self) -> Result<Vec<(bool, Factor)>, ParseError> {
        let mut out = Vec::new();
        let mut negative = match self.peek().tok {
            Tok::Minus => {
                self.bump();
                true
            }
            Tok::Plus => {
                self.bump();
                false
            }
            _ => false,
        };
        loop {
            out.push((negative, self.term()?));
            negative = match self.peek().tok {
                Tok::Minus => true,
                Tok::Plus => false,
                _ => return Ok(out),
            };
            self.bump();
        }
    }

    fn comparator(&mut self) -> Result<Comparator, ParseError> {
        let cmp = match self.peek().tok {
            Tok::Ge => Comparator::Ge,
            Tok::Le => Comparator::Le,
            Tok::Eq => Comparator::Eq,
            Tok::Gt => Comparator::Gt,
            Tok::Lt => Comparator::Lt,
            _ => return Err(self.unexpected(&[">=", "<=", "=", ">", "<"])),
        };
        self.bump();
        Ok(cmp)
    }

    fn prob_comparison(&mut self) -> Result<Formula, ParseError> {
        let start = self.peek().clone();
        let lhs = self.polynomial()?;
        let cmp = self.comparator()?;
        let rhs = self.polynomial()?;

        let mut time: Option<TimeSymbol> = None;
        let mut conditional = false;
        for (_, factor) in lhs.iter().chain(rhs.iter()) {
            if let Factor::Terms(_, terms) = factor {
                for t in terms {
                    conditional |= t.given.is_some();
                    match &time {
                        None => time = Some(t.time.clone()),
                        Some(expected) if *expected != t.time => {
                            return Err(ParseError::new(
                                t.line,
                                t.column,
                                alloc::format!(
                                    "probability terms in one comparison must share a time index \
                                     (found `{}` after `{}`)",
                                    t.time, expected
                                ),
                            ))
                        }
                        Some(_) => {}
                    }
                }
            }
        }
        let Some(time) = time else {
            return Err(ParseError::new(start.line, start.column, "comparison needs at least one P-term")
                .expecting(&["P"]));
        };

        if conditional {
            return conditional_sugar(time, lhs, cmp, rhs, &start);
        }

        let to_poly = |side: Vec<(bool, Factor)>| {
            Polynomial::new(side.into_iter().map(|(negative, factor)| {
                let m = match factor {
                    Factor::Const(c) => Monomial::constant(c),
                    Factor::Terms(c, terms) => Monomial::term(c, terms.into_iter().map(|t| t.target).collect()),
                };
                if negative {
                    Monomial { coeff: -m.coeff, factors: m.factors }
                } else {
                    m
                }
            }))
        };
        let poly = to_poly(lhs).minus(to_poly(rhs));
        Ok(Formula::Prob(ProbCmp { time, poly, cmp }))
    }
}

fn conditional_sugar(
    time: TimeSymbol,
    mut lhs: Vec<(bool, Factor)>,
    cmp: Comparator,
    mut rhs: Vec<(bool, Factor)>,
    start: &Token,
) -> Result<Formula, ParseError> {
    let shape_error = || {
        ParseError::new(
            start.line,
            start.column,
            "a conditional probability term must stand alone on the left, compared with a constant",
        )
    };
    if lhs.len() != 1 || rhs.len() != 1 {
        return Err(shape_error());
    }
    let (lhs_negative, lhs) = lhs.pop().unwrap();
    let (rhs_negative, rhs) = rhs.pop().unwrap();
    let (Factor::Terms(coeff, mut terms), Factor::Const(bound)) = (lhs, rhs) else {
        return Err(shape_error());
    };
    if lhs_negative || !coeff.is_one() || terms.len() != 1 {
        return Err(shape_error());
    }
    let term = terms.pop().unwrap();
    let Some(given) = term.given else {
        return Err(shape_error());
    };
    Ok(Formula::CondProb(CondProbCmp {
        time,
        target: Box::new(term.target),
        given: Box::new(given),
        cmp,
        bound: if rhs_negative { -bound } else { bound },
    }))
}

pub fn parse_formula(text: &str) -> Result<Formula, ParseError> {
    let tokens = lex(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let f = parser.formula(false)?;
    if parser.peek().tok != Tok::Eof {
        return Err(parser.unexpected(&["end of input", "->", "|", "&"]));
    }
    Ok(f)
}

/// Whether `name` lexes as a single identifier usable as a symbol.
pub fn is_symbol_name(name: &str) -> bool {
    let mut chars = name.chars();
    let Some(first) = chars.next() else { return false };
    if !ident_start(first) || KEYWORDS.contains(&name) {
        return false;
    }
    match lex(name) {
        Ok(tokens) => tokens.len() == 2 && matches!(&tokens[0].tok, Tok::Ident(n) if n == name),
        Err(_) => false,
    }
}

pub fn print_formula(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(&mut out, f);
    out
}

fn write_formula(out: &mut String, f: &Formula) {
    use core::fmt::Write;
    let binary = |out: &mut String, a: &Formula, op: &str, b: &Formula| {
        out.push('(');
        write_formula(out, a);
        out.push(' ');
        out.push_str(op);
        out.push(' ');
        write_formula(out, b);
        out.push(')');
    };
    match f {
        Formula::TimeEq(a, b) => {
            let _ = write!(out, "{a} = {b}");
        }
        Formula::TimeLe(a, b) => {
            let _ = write!(out, "{a} <= {b}");
        }
        Formula::TimeLt(a, b) => {
            let _ = write!(out, "{a} < {b}");
        }
        Formula::Holds(a, b, fact) => {
            let _ = write!(out, "HOLDS({a}, {b}, {fact})");
        }
        Formula::Occ(a, b, event) => {
            let _ = write!(out, "OCC({a}, {b}, {event})");
        }
        Formula::Not(g) => {
            out.push('~');
            write_formula(out, g);
        }
        Formula::And(a, b) => binary(out, a, "&", b),
        Formula::Or(a, b) => binary(out, a, "|", b),
        Formula::Implies(a, b) => binary(out, a, "->", b),
        Formula::Inev(t, g) | Formula::Poss(t, g) => {
            let op = if matches!(f, Formula::Inev(..)) { "INEV" } else { "POSS" };
            let _ = write!(out, "{op}[{t}](");
            write_formula(out, g);
            out.push(')');
        }
        Formula::Prob(p) => write_prob(out, p),
        Formula::CondProb(c) => {
            let _ = write!(out, "P[{}](", c.time);
            write_formula(out, &c.target);
            out.push_str(" | ");
            write_formula(out, &c.given);
            let _ = write!(out, ") {} {}", c.cmp.token(), c.bound);
        }
    }
}

fn write_prob(out: &mut String, p: &ProbCmp) {
    use core::fmt::Write;
    let monomials = p.poly.monomials();
    let constant = p.poly.constant_term();
    let variable: Vec<&Monomial> = monomials.iter().filter(|m| !m.is_constant()).collect();
    let left: Vec<&Monomial> = if variable.is_empty() { monomials.iter().collect() } else { variable };
    if left.is_empty() {
        out.push('0');
    }
    for (i, m) in left.iter().enumerate() {
        let negative = m.coeff.is_negative();
        match (i, negative) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        let magnitude = m.coeff.abs();
        if m.is_constant() {
            let _ = write!(out, "{magnitude}");
            continue;
        }
        if !magnitude.is_one() {
            let _ = write!(out, "{magnitude}*");
        }
        for (j, factor) in m.factors.iter().enumerate() {
            if j > 0 {
                out.push('*');
            }
            let _ = write!(out, "P[{}](", p.time);
            write_formula(out, factor);
            out.push(')');
        }
    }
    let _ = write!(out, " {} ", p.cmp.token());
    if left.iter().any(|m| m.is_constant()) || constant.is_zero() {
        out.push('0');
    } else {
        let _ = write!(out, "{}", -constant);
    }
}
