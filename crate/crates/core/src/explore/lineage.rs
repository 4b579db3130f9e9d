use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::bar::{BarLabel, Direction};
use super::filter::FilterCondition;

/// Deepest lineage that SPARQL generation will reconstruct.
pub const MAX_DEPTH: usize = 16;

/// How a bar's member set was derived, from the initial chart downwards.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum Lineage {
    /// Instances of `class` or of any class below it.
    ClassTree { class: String },
    /// Direct instances of `class`.
    DirectClass { class: String },
    /// Every subject typed with a class other than owl:Class or rdfs:Class.
    AllInstances,
    /// Members of `parent` directly typed `class`.
    Subclass { parent: Arc<Lineage>, class: String },
    /// Members of `parent` carrying `predicate` in `direction`.
    Property {
        parent: Arc<Lineage>,
        predicate: String,
        direction: Direction,
    },
    /// Terms reached from the property bar `parent` along its predicate and
    /// typed `class`.
    Object {
        parent: Arc<Lineage>,
        class: BarLabel,
        direction: Direction,
    },
    /// Members of `parent` satisfying every condition.
    Filter {
        parent: Arc<Lineage>,
        conditions: Vec<FilterCondition>,
    },
}

impl Lineage {
    pub fn depth(&self) -> usize {
        match self.parent() {
            Some(p) => 1 + p.depth(),
            None => 1,
        }
    }

    pub fn parent(&self) -> Option<&Arc<Lineage>> {
        match self {
            Lineage::ClassTree { .. } | Lineage::DirectClass { .. } | Lineage::AllInstances => None,
            Lineage::Subclass { parent, .. }
            | Lineage::Property { parent, .. }
            | Lineage::Object { parent, .. }
            | Lineage::Filter { parent, .. } => Some(parent),
        }
    }

    /// Predicate of a property lineage.
    pub fn predicate(&self) -> Option<&str> {
        match self {
            Lineage::Property { predicate, .. } => Some(predicate),
            _ => None,
        }
    }

    pub fn contains_pseudo(&self) -> bool {
        match self {
            Lineage::Object { class, .. } if class.is_pseudo() => true,
            _ => self.parent().is_some_and(|p| p.contains_pseudo()),
        }
    }

    /// Whether the lineage is one of the level-zero sets: a root class tree or
    /// the all-instances set.
    pub fn is_root(&self) -> bool {
        matches!(self, Lineage::ClassTree { .. } | Lineage::AllInstances)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn depth_and_pseudo() {
        let root = Arc::new(Lineage::ClassTree {
            class: "http://x/Work".into(),
        });
        let prop = Arc::new(Lineage::Property {
            parent: root.clone(),
            predicate: "http://x/name".into(),
            direction: Direction::Outgoing,
        });
        let obj = Lineage::Object {
            parent: prop.clone(),
            class: BarLabel::Literals,
            direction: Direction::Outgoing,
        };
        assert_eq!(root.depth(), 1);
        assert_eq!(obj.depth(), 3);
        assert!(obj.contains_pseudo());
        assert!(!prop.contains_pseudo());
        assert_eq!(prop.predicate(), Some("http://x/name"));
    }
}
