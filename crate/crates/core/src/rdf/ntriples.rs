//! Line-oriented N-Triples reader and writer.
//!
//! Blank nodes are rejected: every subject and predicate must be an IRI and
//! every object an IRI or a literal.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::term::{Literal, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("syntax error on line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("unsupported feature on line {line}: {feature}")]
    UnsupportedFeature { line: usize, feature: String },
    #[error("read error: {0}")]
    Io(String),
}

impl ParseError {
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::Syntax { line, .. } | ParseError::UnsupportedFeature { line, .. } => {
                Some(*line)
            }
            ParseError::Io(_) => None,
        }
    }
}

/// A triple of owned terms, before interning.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RdfTriple {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl RdfTriple {
    pub fn new(subject: Term, predicate: Term, object: Term) -> Self {
        RdfTriple {
            subject,
            predicate,
            object,
        }
    }
}

/// Streams triples from any buffered reader, one line at a time.
pub struct NTriplesReader<R> {
    input: R,
    line_no: usize,
    buf: String,
    failed: bool,
}

impl<R: BufRead> NTriplesReader<R> {
    pub fn new(input: R) -> Self {
        NTriplesReader {
            input,
            line_no: 0,
            buf: String::new(),
            failed: false,
        }
    }
}

impl<R: BufRead> Iterator for NTriplesReader<R> {
    type Item = Result<RdfTriple, ParseError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        loop {
            self.buf.clear();
            match self.input.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {}
                Err(err) => {
                    self.failed = true;
                    return Some(Err(ParseError::Io(err.to_string())));
                }
            }
            self.line_no += 1;
            match parse_line(&self.buf, self.line_no) {
                Ok(Some(triple)) => return Some(Ok(triple)),
                Ok(None) => continue,
                Err(err) => {
                    self.failed = true;
                    return Some(Err(err));
                }
            }
        }
    }
}

pub fn parse_ntriples<R: BufRead>(input: R) -> Result<Vec<RdfTriple>, ParseError> {
    NTriplesReader::new(input).collect()
}

pub fn parse_ntriples_str(input: &str) -> Result<Vec<RdfTriple>, ParseError> {
    parse_ntriples(input.as_bytes())
}

pub fn write_ntriples<'a, W: Write>(
    mut out: W,
    triples: impl IntoIterator<Item = &'a RdfTriple>,
) -> io::Result<()> {
    for t in triples {
        writeln!(out, "{} {} {} .", t.subject, t.predicate, t.object)?;
    }
    Ok(())
}

/// Parses one line. Blank lines and comment-only lines yield `None`.
pub fn parse_line(line: &str, line_no: usize) -> Result<Option<RdfTriple>, ParseError> {
    let mut cur = Cursor {
        chars: line.trim_end_matches(['\n', '\r']).char_indices().peekable(),
        line: line_no,
    };
    cur.skip_ws();
    match cur.peek() {
        None | Some('#') => return Ok(None),
        _ => {}
    }
    let subject = match cur.peek() {
        Some('<') => Term::Uri(cur.iri()?),
        Some('_') => return Err(cur.blank_node()),
        Some('"') => return Err(cur.syntax("literal in subject position")),
        _ => return Err(cur.syntax("expected IRI subject")),
    };
    cur.require_ws()?;
    let predicate = match cur.peek() {
        Some('<') => Term::Uri(cur.iri()?),
        Some('_') => return Err(cur.blank_node()),
        _ => return Err(cur.syntax("expected IRI predicate")),
    };
    cur.require_ws()?;
    let object = match cur.peek() {
        Some('<') => Term::Uri(cur.iri()?),
        Some('_') => return Err(cur.blank_node()),
        Some('"') => Term::Literal(cur.literal()?),
        _ => return Err(cur.syntax("expected IRI or literal object")),
    };
    cur.skip_ws();
    if cur.next() != Some('.') {
        return Err(cur.syntax("expected '.' after object"));
    }
    cur.skip_ws();
    match cur.peek() {
        None | Some('#') => Ok(Some(RdfTriple::new(subject, predicate, object))),
        _ => Err(cur.syntax("trailing characters after '.'")),
    }
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::CharIndices<'a>>,
    line: usize,
}

impl Cursor<'_> {
    fn peek(&mut self) -> Option<char> {
        self.chars.peek().map(|(_, c)| *c)
    }

    fn next(&mut self) -> Option<char> {
        self.chars.next().map(|(_, c)| c)
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(' ' | '\t')) {
            self.next();
        }
    }

    fn require_ws(&mut self) -> Result<(), ParseError> {
        if !matches!(self.peek(), Some(' ' | '\t')) {
            return Err(self.syntax("expected whitespace between terms"));
        }
        self.skip_ws();
        Ok(())
    }

    fn syntax(&self, message: &str) -> ParseError {
        ParseError::Syntax {
            line: self.line,
            message: message.to_string(),
        }
    }

    fn blank_node(&self) -> ParseError {
        ParseError::UnsupportedFeature {
            line: self.line,
            feature: "blank nodes".to_string(),
        }
    }

    fn iri(&mut self) -> Result<String, ParseError> {
        self.next(); // '<'
        let mut iri = String::new();
        loop {
            match self.next() {
                None => return Err(self.syntax("unterminated IRI")),
                Some('>') => break,
                Some('\\') => match self.next() {
                    Some('u') => iri.push(self.hex_escape(4)?),
                    Some('U') => iri.push(self.hex_escape(8)?),
                    _ => return Err(self.syntax("invalid escape in IRI")),
                },
                Some(c) if c == ' ' || c == '<' || c == '"' => {
                    return Err(self.syntax("invalid character in IRI"))
                }
                Some(c) => iri.push(c),
            }
        }
        if iri.is_empty() {
            return Err(self.syntax("empty IRI"));
        }
        Ok(iri)
    }

    fn literal(&mut self) -> Result<Literal, ParseError> {
        self.next(); // '"'
        let mut lexical = String::new();
        loop {
            match self.next() {
                None => return Err(self.syntax("unterminated string literal")),
                Some('"') => break,
                Some('\\') => {
                    let c = match self.next() {
                        Some('t') => '\t',
                        Some('b') => '\u{8}',
                        Some('n') => '\n',
                        Some('r') => '\r',
                        Some('f') => '\u{c}',
                        Some('"') => '"',
                        Some('\'') => '\'',
                        Some('\\') => '\\',
                        Some('u') => self.hex_escape(4)?,
                        Some('U') => self.hex_escape(8)?,
                        _ => return Err(self.syntax("invalid escape in literal")),
                    };
                    lexical.push(c);
                }
                Some(c) => lexical.push(c),
            }
        }
        match self.peek() {
            Some('@') => {
                self.next();
                let mut lang = String::new();
                while let Some(c) = self.peek() {
                    if c.is_ascii_alphanumeric() || c == '-' {
                        lang.push(c);
                        self.next();
                    } else {
                        break;
                    }
                }
                if lang.is_empty() || !lang.starts_with(|c: char| c.is_ascii_alphabetic()) {
                    return Err(self.syntax("invalid language tag"));
                }
                Ok(Literal::with_language(lexical, lang))
            }
            Some('^') => {
                self.next();
                if self.next() != Some('^') || self.peek() != Some('<') {
                    return Err(self.syntax("expected ^^<datatype>"));
                }
                let datatype = self.iri()?;
                Ok(Literal::typed(lexical, datatype))
            }
            _ => Ok(Literal::simple(lexical)),
        }
    }

    fn hex_escape(&mut self, digits: usize) -> Result<char, ParseError> {
        let mut value = 0u32;
        for _ in 0..digits {
            let d = self
                .next()
                .and_then(|c| c.to_digit(16))
                .ok_or_else(|| self.syntax("invalid unicode escape"))?;
            value = value * 16 + d;
        }
        char::from_u32(value).ok_or_else(|| self.syntax("escape is not a unicode scalar value"))
    }
}
