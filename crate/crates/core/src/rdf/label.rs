use super::term::Literal;

/// One entry in a label language preference list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LangChoice {
    /// A literal tagged with this language (case-insensitive).
    Tag(String),
    /// A literal without a language tag.
    Untagged,
    /// Any literal at all.
    Any,
}

impl LangChoice {
    fn matches(&self, lit: &Literal) -> bool {
        match self {
            LangChoice::Tag(tag) => lit
                .language
                .as_deref()
                .is_some_and(|l| l.eq_ignore_ascii_case(tag)),
            LangChoice::Untagged => lit.language.is_none(),
            LangChoice::Any => true,
        }
    }
}

/// Ordered language preference for rdfs:label selection. The first entry
/// with any matching label wins; ties go to the lexicographically smallest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelPreference(pub Vec<LangChoice>);

impl Default for LabelPreference {
    fn default() -> Self {
        LabelPreference(vec![
            LangChoice::Tag("en".into()),
            LangChoice::Untagged,
            LangChoice::Any,
        ])
    }
}

impl LabelPreference {
    /// Parses a comma-separated list such as `en,none,*`.
    pub fn parse(spec: &str) -> Self {
        let choices = spec
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| match s {
                "*" | "any" => LangChoice::Any,
                "none" | "-" | "" => LangChoice::Untagged,
                tag => LangChoice::Tag(tag.to_string()),
            })
            .collect();
        LabelPreference(choices)
    }

    pub fn choose<'a>(&self, candidates: impl Iterator<Item = &'a Literal> + Clone) -> Option<&'a Literal> {
        self.0.iter().find_map(|choice| {
            candidates
                .clone()
                .filter(|l| choice.matches(l))
                .min_by(|a, b| a.lexical.cmp(&b.lexical))
        })
    }
}
