//! The RDF/XML recipe dialect: parsing, serialization and recipe extraction.
//!
//! Only a closed subset of RDF/XML is accepted. Anything outside it is
//! reported as [`OwlError::UnsupportedConstruct`] rather than skipped, so a
//! generator that invents syntax is caught at parse time.

mod extract;
mod parse;
mod serialize;
pub(crate) mod xml;

pub use extract::{extract_recipe, find_recipe_root, ExtractError};
pub use parse::parse_rdfxml;
pub use serialize::{serialize_rdfxml, SerializeError};

use crate::term::{Iri, Term, Triple};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraint {
    HasValue(Term),
    SomeValuesFrom(Iri),
}

/// An anonymous `owl:Restriction` attached to a class by `rdfs:subClassOf`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OwlRestriction {
    pub on_property: Iri,
    pub constraint: Constraint,
    /// Document-local blank node label.
    pub node: String,
}

impl OwlRestriction {
    pub fn has_value_iri(&self) -> Option<&Iri> {
        match &self.constraint {
            Constraint::HasValue(Term::Iri(i)) => Some(i),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassAxiom {
    pub class_iri: Iri,
    pub super_classes: Vec<Iri>,
    pub restrictions: Vec<OwlRestriction>,
    pub label: Option<String>,
}

/// Everything a document contributes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParsedOntology {
    pub triples: Vec<Triple>,
    pub axioms: Vec<ClassAxiom>,
    /// Named typed individuals as `(individual, class)`.
    pub individuals: Vec<(Iri, Iri)>,
}

impl ParsedOntology {
    pub fn axiom(&self, class: &Iri) -> Option<&ClassAxiom> {
        self.axioms.iter().find(|a| &a.class_iri == class)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OwlError {
    #[error("XML syntax error at {line}:{column}: {message}")]
    XmlSyntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("undeclared entity `&{name};` at {line}:{column}")]
    UnknownEntityReference {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("unknown namespace prefix `{prefix}` at {line}:{column}")]
    UnknownPrefix {
        prefix: String,
        line: usize,
        column: usize,
    },
    #[error("unsupported construct `{name}` at {line}:{column}")]
    UnsupportedConstruct {
        name: String,
        line: usize,
        column: usize,
    },
    #[error("rdfs:subClassOf cycle through {}", .0.iter().map(|i| i.local_name()).collect::<Vec<_>>().join(" -> "))]
    SubclassCycle(Vec<Iri>),
}

#[cfg(test)]
mod tests;
