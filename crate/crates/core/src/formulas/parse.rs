//! Hand-rolled lexer and recursive-descent parser for the concrete formula
//! syntax documented in the module root.

use std::fmt;

use thiserror::Error;

use super::{Formula, PropSymbol, KEYWORDS};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{kind} at byte {offset}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the input where the problem was detected.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnexpectedChar(char),
    UnexpectedEnd,
    Unexpected { found: String, expected: &'static str },
    TrailingInput,
    NnfViolation,
    NestedInclusion,
    InclArityMismatch { lhs: usize, rhs: usize },
    InclArgNotMl,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character `{c}`"),
            ParseErrorKind::UnexpectedEnd => write!(f, "unexpected end of input"),
            ParseErrorKind::Unexpected { found, expected } => {
                write!(f, "unexpected `{found}`, expected {expected}")
            }
            ParseErrorKind::TrailingInput => write!(f, "trailing input after formula"),
            ParseErrorKind::NnfViolation => {
                write!(f, "negation normal form violation: `~` may only negate a proposition")
            }
            ParseErrorKind::NestedInclusion => write!(f, "nested inclusion atom"),
            ParseErrorKind::InclArityMismatch { lhs, rhs } => {
                write!(f, "inclusion atom arity mismatch ({lhs} vs {rhs})")
            }
            ParseErrorKind::InclArgNotMl => {
                write!(f, "inclusion atom arguments must be plain modal-logic formulas")
            }
        }
    }
}

fn err<T>(kind: ParseErrorKind, offset: usize) -> Result<T, ParseError> {
    Err(ParseError { kind, offset })
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    KwDia,
    KwBox,
    KwNab,
    KwTop,
    KwBot,
    Tilde,
    Amp,
    Pipe,
    PipeBang,
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    SubsetEq,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => s.clone(),
            Tok::KwDia => "dia".into(),
            Tok::KwBox => "box".into(),
            Tok::KwNab => "nab".into(),
            Tok::KwTop => "top".into(),
            Tok::KwBot => "bot".into(),
            Tok::Tilde => "~".into(),
            Tok::Amp => "&".into(),
            Tok::Pipe => "|".into(),
            Tok::PipeBang => "|!".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::LBracket => "[".into(),
            Tok::RBracket => "]".into(),
            Tok::Comma => ",".into(),
            Tok::SubsetEq => "<=".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'~' => {
                toks.push((Tok::Tilde, i));
                i += 1;
            }
            b'&' => {
                toks.push((Tok::Amp, i));
                i += 1;
            }
            b'|' => {
                if bytes.get(i + 1) == Some(&b'!') {
                    toks.push((Tok::PipeBang, i));
                    i += 2;
                } else {
                    toks.push((Tok::Pipe, i));
                    i += 1;
                }
            }
            b'(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            b')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            b'[' => {
                toks.push((Tok::LBracket, i));
                i += 1;
            }
            b']' => {
                toks.push((Tok::RBracket, i));
                i += 1;
            }
            b',' => {
                toks.push((Tok::Comma, i));
                i += 1;
            }
            b'<' => {
                if bytes.get(i + 1) == Some(&b'=') {
                    toks.push((Tok::SubsetEq, i));
                    i += 2;
                } else {
                    return err(ParseErrorKind::UnexpectedChar('<'), i);
                }
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                let word = &text[start..i];
                let tok = match word {
                    "dia" => Tok::KwDia,
                    "box" => Tok::KwBox,
                    "nab" => Tok::KwNab,
                    "top" => Tok::KwTop,
                    "bot" => Tok::KwBot,
                    _ => Tok::Ident(word.to_string()),
                };
                toks.push((tok, start));
            }
            other => {
                let ch = text[i..].chars().next().unwrap_or(other as char);
                return err(ParseErrorKind::UnexpectedChar(ch), i);
            }
        }
    }
    Ok(toks)
}

/// Parses the concrete syntax into a [`Formula`].
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let toks = lex(text)?;
    let mut parser = Parser {
        toks,
        pos: 0,
        end: text.len(),
    };
    let formula = parser.or_level()?;
    if let Some((tok, offset)) = parser.peek_with_offset() {
        return err(
            ParseErrorKind::Unexpected {
                found: tok.describe(),
                expected: "end of input",
            },
            offset,
        )
        .map_err(|mut e| {
            e.kind = ParseErrorKind::TrailingInput;
            e
        });
    }
    Ok(formula)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn peek_with_offset(&self) -> Option<(&Tok, usize)> {
        self.toks.get(self.pos).map(|(t, o)| (t, *o))
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |(_, o)| *o)
    }

    fn bump(&mut self) -> Option<(Tok, usize)> {
        let item = self.toks.get(self.pos).cloned();
        if item.is_some() {
            self.pos += 1;
        }
        item
    }

    fn expect(&mut self, want: Tok, expected: &'static str) -> Result<usize, ParseError> {
        match self.bump() {
            Some((tok, offset)) if tok == want => Ok(offset),
            Some((tok, offset)) => err(
                ParseErrorKind::Unexpected {
                    found: tok.describe(),
                    expected,
                },
                offset,
            ),
            None => err(ParseErrorKind::UnexpectedEnd, self.end),
        }
    }

    fn or_level(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and_level()?;
        loop {
            match self.peek() {
                Some(Tok::Pipe) => {
                    self.bump();
                    let rhs = self.and_level()?;
                    lhs = Formula::or(lhs, rhs);
                }
                Some(Tok::PipeBang) => {
                    self.bump();
                    let rhs = self.and_level()?;
                    lhs = Formula::nedisj(lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn and_level(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary_level()?;
        while self.peek() == Some(&Tok::Amp) {
            self.bump();
            let rhs = self.unary_level()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary_level(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::KwDia) => {
                self.bump();
                Ok(Formula::dia(self.unary_level()?))
            }
            Some(Tok::KwBox) => {
                self.bump();
                Ok(Formula::box_(self.unary_level()?))
            }
            Some(Tok::KwNab) => {
                self.bump();
                Ok(Formula::nab(self.unary_level()?))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        match self.bump() {
            Some((Tok::Ident(name), _)) => Ok(Formula::Prop(ident_symbol(name))),
            Some((Tok::Tilde, offset)) => match self.bump() {
                Some((Tok::Ident(name), _)) => Ok(Formula::NegProp(ident_symbol(name))),
                Some(_) => err(ParseErrorKind::NnfViolation, offset),
                None => err(ParseErrorKind::UnexpectedEnd, self.end),
            },
            Some((Tok::KwTop, _)) => Ok(Formula::Top),
            Some((Tok::KwBot, _)) => Ok(Formula::Bot),
            Some((Tok::LParen, _)) => {
                let inner = self.or_level()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some((Tok::LBracket, open_offset)) => self.inclusion(open_offset),
            Some((tok, offset)) => err(
                ParseErrorKind::Unexpected {
                    found: tok.describe(),
                    expected: "a formula",
                },
                offset,
            ),
            None => err(ParseErrorKind::UnexpectedEnd, self.end),
        }
    }

    fn inclusion(&mut self, open_offset: usize) -> Result<Formula, ParseError> {
        let mut lhs = Vec::new();
        let mut arg_offsets = Vec::new();
        loop {
            arg_offsets.push(self.offset());
            lhs.push(self.or_level()?);
            match self.bump() {
                Some((Tok::Comma, _)) => continue,
                Some((Tok::SubsetEq, _)) => break,
                Some((tok, offset)) => {
                    return err(
                        ParseErrorKind::Unexpected {
                            found: tok.describe(),
                            expected: "`,` or `<=`",
                        },
                        offset,
                    )
                }
                None => return err(ParseErrorKind::UnexpectedEnd, self.end),
            }
        }
        let mut rhs = Vec::new();
        loop {
            arg_offsets.push(self.offset());
            rhs.push(self.or_level()?);
            match self.bump() {
                Some((Tok::Comma, _)) => continue,
                Some((Tok::RBracket, _)) => break,
                Some((tok, offset)) => {
                    return err(
                        ParseErrorKind::Unexpected {
                            found: tok.describe(),
                            expected: "`,` or `]`",
                        },
                        offset,
                    )
                }
                None => return err(ParseErrorKind::UnexpectedEnd, self.end),
            }
        }
        if lhs.len() != rhs.len() {
            return err(
                ParseErrorKind::InclArityMismatch {
                    lhs: lhs.len(),
                    rhs: rhs.len(),
                },
                open_offset,
            );
        }
        for (arg, &offset) in lhs.iter().chain(rhs.iter()).zip(&arg_offsets) {
            if arg.contains_incl() {
                return err(ParseErrorKind::NestedInclusion, offset);
            }
            if !arg.is_pure_ml() {
                return err(ParseErrorKind::InclArgNotMl, offset);
            }
        }
        Ok(Formula::Incl(lhs, rhs))
    }
}

fn ident_symbol(name: String) -> PropSymbol {
    debug_assert!(!KEYWORDS.contains(&name.as_str()));
    PropSymbol::new(name).expect("lexer produces valid identifiers")
}
