use serde::{Deserialize, Serialize};

use super::error::ExploreError;
use crate::rdf::{Literal, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparator {
    Equals,
    Contains,
    Lt,
    Gt,
}

impl Comparator {
    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "equals" | "eq" | "=" => Some(Comparator::Equals),
            "contains" => Some(Comparator::Contains),
            "lt" | "<" => Some(Comparator::Lt),
            "gt" | ">" => Some(Comparator::Gt),
            _ => None,
        }
    }
}

/// JSON form: `{"uri": "..."}` or `{"literal": "...", "language"?, "datatype"?}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FilterValue {
    Uri {
        uri: String,
    },
    Literal {
        literal: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        language: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        datatype: Option<String>,
    },
}

impl FilterValue {
    pub fn uri(uri: impl Into<String>) -> Self {
        FilterValue::Uri { uri: uri.into() }
    }

    pub fn literal(lexical: impl Into<String>) -> Self {
        FilterValue::Literal {
            literal: lexical.into(),
            language: None,
            datatype: None,
        }
    }

    /// `<...>` is read as a URI, anything else as a plain literal.
    pub fn parse(s: &str) -> Self {
        match s.strip_prefix('<').and_then(|r| r.strip_suffix('>')) {
            Some(uri) => FilterValue::uri(uri),
            None => FilterValue::literal(s.trim_matches('"')),
        }
    }

    pub fn text(&self) -> &str {
        match self {
            FilterValue::Uri { uri } => uri,
            FilterValue::Literal { literal, .. } => literal,
        }
    }

    pub fn to_term(&self) -> Term {
        match self {
            FilterValue::Uri { uri } => Term::uri(uri.clone()),
            FilterValue::Literal {
                literal,
                language: Some(lang),
                ..
            } => Term::Literal(Literal::with_language(literal.clone(), lang.clone())),
            FilterValue::Literal {
                literal,
                datatype: Some(dt),
                ..
            } => Term::Literal(Literal::typed(literal.clone(), dt.clone())),
            FilterValue::Literal { literal, .. } => Term::literal(literal.clone()),
        }
    }

    /// Numeric value of a literal whose lexical form is a number and whose
    /// datatype, if any, is numeric.
    pub fn numeric(&self) -> Option<f64> {
        match self {
            FilterValue::Uri { .. } => None,
            FilterValue::Literal {
                literal,
                language: None,
                datatype,
            } => {
                if datatype
                    .as_deref()
                    .is_some_and(|dt| !crate::rdf::is_numeric_datatype(dt))
                {
                    return None;
                }
                literal.trim().parse::<f64>().ok().filter(|v| v.is_finite())
            }
            FilterValue::Literal { .. } => None,
        }
    }
}

/// A condition on the outgoing values of `property`. A member passes when at
/// least one value satisfies the comparator.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FilterCondition {
    pub property: String,
    pub comparator: Comparator,
    pub value: FilterValue,
}

impl FilterCondition {
    pub fn new(property: impl Into<String>, comparator: Comparator, value: FilterValue) -> Self {
        FilterCondition {
            property: property.into(),
            comparator,
            value,
        }
    }

    pub fn validate(&self) -> Result<(), ExploreError> {
        match self.comparator {
            Comparator::Lt | Comparator::Gt if self.value.numeric().is_none() => {
                Err(ExploreError::InvalidComparator {
                    comparator: self.comparator,
                    value: self.value.text().to_string(),
                })
            }
            _ => Ok(()),
        }
    }

    /// Whether a single value `o` of the property satisfies the condition.
    pub fn accepts(&self, o: &Term) -> bool {
        match (self.comparator, &self.value) {
            (Comparator::Equals, FilterValue::Uri { uri }) => o.as_uri() == Some(uri.as_str()),
            (Comparator::Equals, FilterValue::Literal { literal, .. }) => {
                o.as_literal().is_some_and(|l| l.lexical == *literal)
            }
            (Comparator::Contains, v) => o
                .as_literal()
                .is_some_and(|l| l.lexical.contains(v.text())),
            (Comparator::Lt, v) => match (o.numeric_value(), v.numeric()) {
                (Some(a), Some(b)) => a < b,
                _ => false,
            },
            (Comparator::Gt, v) => match (o.numeric_value(), v.numeric()) {
                (Some(a), Some(b)) => a > b,
                _ => false,
            },
        }
    }
}

pub fn validate_all(conditions: &[FilterCondition]) -> Result<(), ExploreError> {
    conditions.iter().try_for_each(FilterCondition::validate)
}
