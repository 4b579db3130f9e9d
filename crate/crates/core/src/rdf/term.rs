use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::vocab::{xsd, XSD_STRING};

/// Dense handle into a graph's interning table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TermId(pub u32);

impl TermId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// An RDF literal. A `language` tag and a `datatype` are never both set, and
/// `xsd:string` is normalized away so `"a"` and `"a"^^xsd:string` are one term.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    pub lexical: String,
    pub language: Option<String>,
    pub datatype: Option<String>,
}

impl Literal {
    pub fn simple(lexical: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            language: None,
            datatype: None,
        }
    }

    pub fn with_language(lexical: impl Into<String>, language: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            language: Some(language.into()),
            datatype: None,
        }
    }

    pub fn typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Self {
        let datatype = datatype.into();
        Literal {
            lexical: lexical.into(),
            language: None,
            datatype: if datatype == XSD_STRING {
                None
            } else {
                Some(datatype)
            },
        }
    }

    pub fn integer(value: u64) -> Self {
        Literal::typed(value.to_string(), xsd("integer"))
    }

    /// Numeric value of literals carrying one of the XSD numeric datatypes.
    /// Plain strings that happen to look like numbers are not numeric.
    pub fn numeric_value(&self) -> Option<f64> {
        let datatype = self.datatype.as_deref()?;
        if !is_numeric_datatype(datatype) {
            return None;
        }
        let lexical = self.lexical.trim();
        match lexical {
            "INF" | "+INF" => Some(f64::INFINITY),
            "-INF" => Some(f64::NEG_INFINITY),
            _ => lexical.parse::<f64>().ok(),
        }
    }

    pub fn is_integer_typed(&self) -> bool {
        matches!(self.datatype.as_deref(), Some(dt) if INTEGER_TYPES.iter().any(|t| xsd_eq(dt, t)))
    }
}

const INTEGER_TYPES: &[&str] = &[
    "integer",
    "int",
    "long",
    "short",
    "byte",
    "nonNegativeInteger",
    "nonPositiveInteger",
    "positiveInteger",
    "negativeInteger",
    "unsignedLong",
    "unsignedInt",
    "unsignedShort",
    "unsignedByte",
];

fn xsd_eq(datatype: &str, local: &str) -> bool {
    datatype
        .strip_prefix(super::vocab::XSD_NS)
        .is_some_and(|l| l == local)
}

pub fn is_numeric_datatype(datatype: &str) -> bool {
    ["decimal", "double", "float"]
        .iter()
        .chain(INTEGER_TYPES)
        .any(|t| xsd_eq(datatype, t))
}

/// An RDF term. Blank nodes are not representable.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Term {
    Uri(String),
    Literal(Literal),
}

impl Term {
    pub fn uri(iri: impl Into<String>) -> Self {
        Term::Uri(iri.into())
    }

    pub fn literal(lexical: impl Into<String>) -> Self {
        Term::Literal(Literal::simple(lexical))
    }

    pub fn is_uri(&self) -> bool {
        matches!(self, Term::Uri(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }

    pub fn as_uri(&self) -> Option<&str> {
        match self {
            Term::Uri(iri) => Some(iri),
            Term::Literal(_) => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(lit) => Some(lit),
            Term::Uri(_) => None,
        }
    }

    /// The IRI string for URIs, the lexical form for literals.
    pub fn lexical(&self) -> &str {
        match self {
            Term::Uri(iri) => iri,
            Term::Literal(lit) => &lit.lexical,
        }
    }

    pub fn numeric_value(&self) -> Option<f64> {
        self.as_literal().and_then(Literal::numeric_value)
    }
}

impl PartialOrd for Term {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// URIs sort before literals; within a kind, by lexical form first.
impl Ord for Term {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Term::Uri(a), Term::Uri(b)) => a.cmp(b),
            (Term::Uri(_), Term::Literal(_)) => Ordering::Less,
            (Term::Literal(_), Term::Uri(_)) => Ordering::Greater,
            (Term::Literal(a), Term::Literal(b)) => a.cmp(b),
        }
    }
}

/// Text after the last `/` or `#`, or the whole IRI when that would be empty.
pub fn local_name(iri: &str) -> &str {
    let trimmed = iri.trim_end_matches(['/', '#']);
    match trimmed.rfind(['/', '#']) {
        Some(pos) if pos + 1 < trimmed.len() => &trimmed[pos + 1..],
        _ => iri,
    }
}

impl fmt::Display for Term {
    /// N-Triples syntax.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Uri(iri) => write_iri(f, iri),
            Term::Literal(lit) => {
                f.write_str("\"")?;
                for c in lit.lexical.chars() {
                    match c {
                        '"' => f.write_str("\\\"")?,
                        '\\' => f.write_str("\\\\")?,
                        '\n' => f.write_str("\\n")?,
                        '\r' => f.write_str("\\r")?,
                        '\t' => f.write_str("\\t")?,
                        c if (c as u32) < 0x20 || c as u32 == 0x7f => {
                            write!(f, "\\u{:04X}", c as u32)?
                        }
                        c => write!(f, "{c}")?,
                    }
                }
                f.write_str("\"")?;
                if let Some(lang) = &lit.language {
                    write!(f, "@{lang}")
                } else if let Some(dt) = &lit.datatype {
                    f.write_str("^^")?;
                    write_iri(f, dt)
                } else {
                    Ok(())
                }
            }
        }
    }
}

fn write_iri(f: &mut fmt::Formatter<'_>, iri: &str) -> fmt::Result {
    f.write_str("<")?;
    for c in iri.chars() {
        match c {
            '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\' => {
                write!(f, "\\u{:04X}", c as u32)?
            }
            c if (c as u32) <= 0x20 => write!(f, "\\u{:04X}", c as u32)?,
            c => write!(f, "{c}")?,
        }
    }
    f.write_str(">")
}
