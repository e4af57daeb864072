use std::collections::HashSet;

use super::{Circuit, Node};
use crate::error::{ParseError, ParseErrorKind, Result};

/// Parses the prefix DSL
/// `expr := (and expr+) | (or expr+) | (not expr) | x<digits> | 0 | 1`.
///
/// The circuit has `n = 1 + max variable index` inputs (0 when no variable
/// occurs). A repeated variable is rejected at the position of its second
/// occurrence.
pub fn parse(text: &str) -> Result<Circuit> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        seen: HashSet::new(),
    };
    let root = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error(ParseErrorKind::TrailingInput).into());
    }
    Circuit::from_node(root)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    seen: HashSet<usize>,
}

impl Parser<'_> {
    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError {
            kind,
            position: self.pos,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn unexpected(&self) -> ParseError {
        match std::str::from_utf8(&self.src[self.pos..])
            .ok()
            .and_then(|s| s.chars().next())
        {
            Some(c) => self.error(ParseErrorKind::UnexpectedChar(c)),
            None => self.error(ParseErrorKind::UnexpectedEnd),
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        match self.peek() {
            None => Err(self.error(ParseErrorKind::UnexpectedEnd)),
            Some(b'(') => self.gate(),
            Some(b'0') => {
                self.pos += 1;
                Ok(Node::Const(false))
            }
            Some(b'1') => {
                self.pos += 1;
                Ok(Node::Const(true))
            }
            Some(b'x') => self.variable(),
            Some(_) => Err(self.unexpected()),
        }
    }

    fn variable(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        self.pos += 1;
        let digits_start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        let digits = &self.src[digits_start..self.pos];
        let var = std::str::from_utf8(digits)
            .ok()
            .filter(|d| !d.is_empty())
            .and_then(|d| d.parse::<usize>().ok())
            .ok_or(ParseError {
                kind: ParseErrorKind::BadVariable,
                position: start,
            })?;
        if !self.seen.insert(var) {
            return Err(ParseError {
                kind: ParseErrorKind::DuplicateVariable(var),
                position: start,
            });
        }
        Ok(Node::var(var))
    }

    fn gate(&mut self) -> Result<Node, ParseError> {
        let open = self.pos;
        self.pos += 1;
        self.skip_ws();
        let word_start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
            self.pos += 1;
        }
        let op = &self.src[word_start..self.pos];
        if !matches!(op, b"and" | b"or" | b"not") {
            return Err(ParseError {
                kind: ParseErrorKind::UnknownOperator,
                position: word_start,
            });
        }
        let mut args = Vec::new();
        loop {
            match self.peek() {
                Some(b')') => {
                    self.pos += 1;
                    break;
                }
                None => return Err(self.error(ParseErrorKind::UnexpectedEnd)),
                Some(_) => args.push(self.expr()?),
            }
        }
        match op {
            b"not" => {
                if args.len() != 1 {
                    return Err(ParseError {
                        kind: ParseErrorKind::NotArity,
                        position: open,
                    });
                }
                Ok(Node::Not(Box::new(args.pop().unwrap())))
            }
            _ if args.is_empty() => Err(ParseError {
                kind: ParseErrorKind::EmptyGate,
                position: open,
            }),
            b"and" => Ok(Node::And(args)),
            _ => Ok(Node::Or(args)),
        }
    }
}
