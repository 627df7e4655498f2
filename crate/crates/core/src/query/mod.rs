//! Prolog-style conjunctive queries over a [`Graph`](crate::store::Graph).
//!
//! Three goal kinds are understood: `rdf/3` pattern matching,
//! `rdf_reachable/3` reflexive-transitive closure and `rdf_assert/3`.
//! Goals run left to right with depth-first backtracking.

mod parse;
mod solve;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub use parse::{parse_query, parse_term};
pub use solve::{reachable, solve, solve_mut, solve_with, Direction, KnowledgeBase, Solutions};

use crate::store::StoreError;
use crate::term::{Term, TriplePattern};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Goal {
    Rdf(TriplePattern),
    RdfReachable(TriplePattern),
    RdfAssert(TriplePattern),
}

impl Goal {
    pub fn pattern(&self) -> &TriplePattern {
        match self {
            Goal::Rdf(p) | Goal::RdfReachable(p) | Goal::RdfAssert(p) => p,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Goal::Rdf(_) => "rdf",
            Goal::RdfReachable(_) => "rdf_reachable",
            Goal::RdfAssert(_) => "rdf_assert",
        }
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = self.pattern();
        write!(f, "{}({}, {}, {})", self.name(), p.subject, p.predicate, p.object)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConjunctiveQuery {
    pub goals: Vec<Goal>,
}

impl ConjunctiveQuery {
    pub fn new(goals: Vec<Goal>) -> Self {
        ConjunctiveQuery { goals }
    }

    /// Variable names in order of first occurrence.
    pub fn variables(&self) -> Vec<Arc<str>> {
        let mut out: Vec<Arc<str>> = Vec::new();
        for g in &self.goals {
            for t in g.pattern().terms() {
                if let Term::Var(v) = t {
                    if !out.contains(v) {
                        out.push(v.clone());
                    }
                }
            }
        }
        out
    }

    pub fn has_assert(&self) -> bool {
        self.goals.iter().any(|g| matches!(g, Goal::RdfAssert(_)))
    }
}

/// Variable name to ground term.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Binding(BTreeMap<Arc<str>, Term>);

impl Binding {
    pub fn new() -> Self {
        Binding::default()
    }

    pub fn get(&self, var: &str) -> Option<&Term> {
        self.0.get(var)
    }

    /// Bind `var`; panics if `value` is a variable.
    pub fn insert(&mut self, var: impl Into<Arc<str>>, value: Term) {
        assert!(value.is_ground(), "binding to a variable");
        self.0.insert(var.into(), value);
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Term)> {
        self.0.iter().map(|(k, v)| (&**k, v))
    }

    /// Replace a bound variable by its value; anything else is returned as is.
    pub fn apply(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => self.0.get(v).cloned().unwrap_or_else(|| t.clone()),
            _ => t.clone(),
        }
    }

    pub fn apply_pattern(&self, p: &TriplePattern) -> TriplePattern {
        TriplePattern::new(self.apply(&p.subject), self.apply(&p.predicate), self.apply(&p.object))
    }

    /// Only the listed variables.
    pub fn project(&self, vars: &[Arc<str>]) -> Binding {
        Binding(
            self.0
                .iter()
                .filter(|(k, _)| vars.contains(k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        )
    }
}

impl<K: Into<Arc<str>>> FromIterator<(K, Term)> for Binding {
    fn from_iter<I: IntoIterator<Item = (K, Term)>>(iter: I) -> Self {
        let mut b = Binding::new();
        for (k, v) in iter {
            b.insert(k, v);
        }
        b
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum QueryError {
    #[error("syntax error at {position}: {message}")]
    Syntax { position: usize, message: String },
    #[error("rdf_assert goal is not ground: {0}")]
    NonGroundAssert(String),
    #[error("rdf_reachable with both ends unbound: {0}")]
    BothEndsUnbound(String),
    #[error("predicate must be bound: {0}")]
    UnboundPredicate(String),
    #[error("rdf_assert needs a writable graph")]
    ReadOnly,
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl QueryError {
    /// Two-line rendering with a caret under the failing column.
    pub fn caret(&self, text: &str) -> Option<String> {
        let QueryError::Syntax { position, message } = self else {
            return None;
        };
        let line_start = text[..*position].rfind('\n').map_or(0, |i| i + 1);
        let line_end = text[*position..].find('\n').map_or(text.len(), |i| position + i);
        let col = text[line_start..*position].chars().count();
        Some(format!(
            "{}\n{}^ {}",
            &text[line_start..line_end],
            " ".repeat(col),
            message
        ))
    }
}
