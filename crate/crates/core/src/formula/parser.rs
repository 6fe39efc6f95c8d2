//! Text syntax for formulas.
//!
//! ```text
//! formula  := implies ;
//! implies  := untilthen ( "->" implies )? ;
//! untilthen:= or_e ( ("U"|"T") untilthen )? ;
//! or_e     := and_e ( "|" and_e )* ;
//! and_e    := unary ( "&" unary )* ;
//! unary    := ("!"|"F"|"G"|"X") unary | atom ;
//! atom     := "true" | "(" formula ")" | ident cmp number ;
//! cmp      := "<" | "<=" | ">" | ">=" ;
//! ```
//!
//! Precedence, tightest first: unary operators, `&`, `|`, `U`/`T`, `->`.
//! `&` and `|` fold to the left; `U`, `T` and `->` are right-associative, so
//! `a U b T c` is `a U (b T c)`.
//!
//! `<=` and `>=` are accepted as aliases of `<` and `>`. The robustness of
//! both forms is identical and they only disagree, under Boolean semantics, on
//! the measure-zero boundary `f(s) = c`, where the strict form is used.

use std::collections::HashMap;
use std::fmt;

use super::{Comparator, FeatureSchema, Formula, Predicate};

/// Words that cannot be used as feature names.
pub const KEYWORDS: &[&str] = &["true", "F", "G", "X", "U", "T"];

#[derive(Debug, Clone, PartialEq)]
pub enum ParseError {
    /// Unexpected input at byte offset `position`.
    Syntax {
        position: usize,
        found: String,
        expected: Vec<&'static str>,
    },
    /// A predicate names a feature that is not in the schema.
    UnknownFeature { position: usize, name: String },
    /// A number literal that does not denote a finite value.
    InvalidNumber { position: usize, text: String },
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Syntax {
                position,
                found,
                expected,
            } => write!(
                f,
                "syntax error at position {position}: found {found}, expected one of {}",
                expected.join(", ")
            ),
            ParseError::UnknownFeature { position, name } => {
                write!(f, "unknown feature `{name}` at position {position}")
            }
            ParseError::InvalidNumber { position, text } => {
                write!(f, "invalid number `{text}` at position {position}")
            }
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    True,
    Bang,
    Amp,
    Pipe,
    Arrow,
    Eventually,
    Always,
    Next,
    Until,
    Then,
    LParen,
    RParen,
    Ident(String),
    Cmp(Comparator),
    Number(f64),
    End,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::True => "`true`".into(),
            Token::Bang => "`!`".into(),
            Token::Amp => "`&`".into(),
            Token::Pipe => "`|`".into(),
            Token::Arrow => "`->`".into(),
            Token::Eventually => "`F`".into(),
            Token::Always => "`G`".into(),
            Token::Next => "`X`".into(),
            Token::Until => "`U`".into(),
            Token::Then => "`T`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::Ident(name) => format!("identifier `{name}`"),
            Token::Cmp(c) => format!("`{}`", c.symbol()),
            Token::Number(x) => format!("number {x}"),
            Token::End => "end of input".into(),
        }
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn lex(text: &str) -> Result<Vec<(usize, Token)>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < bytes.len() {
        let c = bytes[pos];
        if c.is_ascii_whitespace() {
            pos += 1;
            continue;
        }
        let start = pos;
        let next = bytes.get(pos + 1).copied();
        let token = match c {
            b'!' => {
                pos += 1;
                Token::Bang
            }
            b'&' => {
                pos += 1;
                Token::Amp
            }
            b'|' => {
                pos += 1;
                Token::Pipe
            }
            b'(' => {
                pos += 1;
                Token::LParen
            }
            b')' => {
                pos += 1;
                Token::RParen
            }
            b'-' if next == Some(b'>') => {
                pos += 2;
                Token::Arrow
            }
            b'<' | b'>' => {
                pos += if next == Some(b'=') { 2 } else { 1 };
                Token::Cmp(if c == b'<' {
                    Comparator::Lt
                } else {
                    Comparator::Gt
                })
            }
            b'-' | b'+' | b'.' | b'0'..=b'9' => {
                pos = scan_number(bytes, pos);
                let literal = &text[start..pos];
                match literal.parse::<f64>() {
                    Ok(x) if x.is_finite() => Token::Number(x),
                    _ => {
                        return Err(ParseError::InvalidNumber {
                            position: start,
                            text: literal.to_string(),
                        })
                    }
                }
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while pos < bytes.len() && (bytes[pos].is_ascii_alphanumeric() || bytes[pos] == b'_')
                {
                    pos += 1;
                }
                match &text[start..pos] {
                    "true" => Token::True,
                    "F" => Token::Eventually,
                    "G" => Token::Always,
                    "X" => Token::Next,
                    "U" => Token::Until,
                    "T" => Token::Then,
                    word => Token::Ident(word.to_string()),
                }
            }
            _ => {
                let found = text[start..].chars().next().unwrap_or(' ');
                return Err(ParseError::Syntax {
                    position: start,
                    found: format!("character `{found}`"),
                    expected: vec!["a token"],
                });
            }
        };
        tokens.push((start, token));
    }
    tokens.push((text.len(), Token::End));
    Ok(tokens)
}

fn scan_number(bytes: &[u8], mut pos: usize) -> usize {
    let digits = |bytes: &[u8], mut p: usize| {
        while p < bytes.len() && bytes[p].is_ascii_digit() {
            p += 1;
        }
        p
    };
    if matches!(bytes[pos], b'-' | b'+') {
        pos += 1;
    }
    pos = digits(bytes, pos);
    if pos < bytes.len() && bytes[pos] == b'.' {
        pos = digits(bytes, pos + 1);
    }
    if pos < bytes.len() && matches!(bytes[pos], b'e' | b'E') {
        let mut p = pos + 1;
        if p < bytes.len() && matches!(bytes[p], b'-' | b'+') {
            p += 1;
        }
        let end = digits(bytes, p);
        if end > p {
            pos = end;
        }
    }
    pos
}

struct Parser<'a> {
    tokens: Vec<(usize, Token)>,
    cursor: usize,
    schema: &'a FeatureSchema,
    scales: &'a HashMap<String, f64>,
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.cursor].1
    }

    fn position(&self) -> usize {
        self.tokens[self.cursor].0
    }

    fn bump(&mut self) -> Token {
        let token = self.tokens[self.cursor].1.clone();
        if token != Token::End {
            self.cursor += 1;
        }
        token
    }

    fn unexpected(&self, expected: Vec<&'static str>) -> ParseError {
        ParseError::Syntax {
            position: self.position(),
            found: self.peek().describe(),
            expected,
        }
    }

    fn implies(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.until_then()?;
        if *self.peek() == Token::Arrow {
            self.bump();
            let rhs = self.implies()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn until_then(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        match self.peek() {
            Token::Until => {
                self.bump();
                Ok(Formula::until(lhs, self.until_then()?))
            }
            Token::Then => {
                self.bump();
                Ok(Formula::then(lhs, self.until_then()?))
            }
            _ => Ok(lhs),
        }
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while *self.peek() == Token::Pipe {
            self.bump();
            lhs = Formula::or(lhs, self.and()?);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while *self.peek() == Token::Amp {
            self.bump();
            lhs = Formula::and(lhs, self.unary()?);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let wrap: fn(Formula) -> Formula = match self.peek() {
            Token::Bang => Formula::not,
            Token::Eventually => Formula::eventually,
            Token::Always => Formula::always,
            Token::Next => Formula::next,
            _ => return self.atom(),
        };
        self.bump();
        Ok(wrap(self.unary()?))
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let position = self.position();
        match self.peek().clone() {
            Token::True => {
                self.bump();
                Ok(Formula::True)
            }
            Token::LParen => {
                self.bump();
                let inner = self.implies()?;
                if *self.peek() != Token::RParen {
                    return Err(self.unexpected(vec!["`)`", "`->`", "`U`", "`T`", "`|`", "`&`"]));
                }
                self.bump();
                Ok(inner)
            }
            Token::Ident(name) => {
                self.bump();
                let comparator = match self.peek() {
                    Token::Cmp(c) => *c,
                    _ => return Err(self.unexpected(vec!["`<`", "`<=`", "`>`", "`>=`"])),
                };
                self.bump();
                let threshold = match self.peek() {
                    Token::Number(x) => *x,
                    _ => return Err(self.unexpected(vec!["number"])),
                };
                self.bump();
                if self.schema.index_of(&name).is_none() {
                    return Err(ParseError::UnknownFeature { position, name });
                }
                let scale = self.scales.get(&name).copied().unwrap_or(1.0);
                Predicate::new(self.schema, &name, comparator, threshold, scale).map_err(|_| {
                    ParseError::InvalidNumber {
                        position,
                        text: scale.to_string(),
                    }
                })
                .map(Formula::Pred)
            }
            _ => Err(self.unexpected(vec![
                "`true`",
                "`(`",
                "identifier",
                "`!`",
                "`F`",
                "`G`",
                "`X`",
            ])),
        }
    }
}

/// Parses `text` against `schema`; every predicate gets scale 1.
pub fn parse(text: &str, schema: &FeatureSchema) -> Result<Formula, ParseError> {
    parse_with_scales(text, schema, &HashMap::new())
}

/// Parses `text` against `schema`, giving predicates over the features in
/// `scales` the listed robustness multiplier. A non-positive scale is reported
/// as [`ParseError::InvalidNumber`] at the offending predicate.
pub fn parse_with_scales(
    text: &str,
    schema: &FeatureSchema,
    scales: &HashMap<String, f64>,
) -> Result<Formula, ParseError> {
    let mut parser = Parser {
        tokens: lex(text)?,
        cursor: 0,
        schema,
        scales,
    };
    let formula = parser.implies()?;
    if *parser.peek() != Token::End {
        return Err(parser.unexpected(vec!["end of input", "`->`", "`U`", "`T`", "`|`", "`&`"]));
    }
    Ok(formula)
}

// Binding strength, larger binds tighter.
fn level(f: &Formula) -> u8 {
    match f {
        Formula::Implies(..) => 1,
        Formula::Until(..) | Formula::Then(..) => 2,
        Formula::Or(..) => 3,
        Formula::And(..) => 4,
        Formula::Not(_) | Formula::Eventually(_) | Formula::Always(_) | Formula::Next(_) => 5,
        Formula::True | Formula::Pred(_) => 6,
    }
}

pub(crate) fn format_number(x: f64) -> String {
    // `Display` prints the shortest decimal that reads back to the same f64.
    format!("{x}")
}

/// Renders `f` in the concrete syntax with the minimum parentheses needed for
/// [`parse`] to rebuild the same tree. Predicate scales are not part of the
/// syntax and must be supplied again through [`parse_with_scales`].
pub fn unparse(f: &Formula) -> String {
    let mut out = String::new();
    write_formula(f, &mut out);
    out
}

fn write_child(f: &Formula, parens: bool, out: &mut String) {
    if parens {
        out.push('(');
        write_formula(f, out);
        out.push(')');
    } else {
        write_formula(f, out);
    }
}

fn write_formula(f: &Formula, out: &mut String) {
    let own = level(f);
    match f {
        Formula::True => out.push_str("true"),
        Formula::Pred(p) => out.push_str(&p.to_string()),
        Formula::Not(a) | Formula::Eventually(a) | Formula::Always(a) | Formula::Next(a) => {
            out.push_str(match f {
                Formula::Not(_) => "!",
                Formula::Eventually(_) => "F ",
                Formula::Always(_) => "G ",
                _ => "X ",
            });
            let bare = matches!(**a, Formula::True) || level(a) == 5;
            write_child(a, !bare, out);
        }
        Formula::And(a, b) | Formula::Or(a, b) => {
            let op = if matches!(f, Formula::And(..)) { " & " } else { " | " };
            write_child(a, level(a) < own, out);
            out.push_str(op);
            write_child(b, level(b) <= own, out);
        }
        Formula::Implies(a, b) | Formula::Until(a, b) | Formula::Then(a, b) => {
            let op = match f {
                Formula::Implies(..) => " -> ",
                Formula::Until(..) => " U ",
                _ => " T ",
            };
            write_child(a, level(a) <= own, out);
            out.push_str(op);
            write_child(b, level(b) < own, out);
        }
    }
}
