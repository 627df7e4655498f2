//! Action recipes: the extracted domain model, linearization, successor
//! lookup over the graph and the usability validator.

mod assert;
mod order;
mod validate;

pub use assert::{assert_recipe, retract_recipe};
pub use order::{first_action, linearize, next_action, OrderError};
pub use validate::{validate, validate_text, ValidationReport};

use crate::term::{Iri, Triple};

/// One subaction class and the parameters its restrictions pin down.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SubactionSpec {
    pub class_iri: Iri,
    pub super_classes: Vec<Iri>,
    pub performed_by: Option<Iri>,
    pub object_acted_on: Option<Iri>,
    pub to_location: Option<Iri>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionRecipe {
    pub root: Iri,
    pub label: Option<String>,
    /// In the order the root's restrictions list them.
    pub subactions: Vec<SubactionSpec>,
    /// `(before, after)` pairs.
    pub orderings: Vec<(Iri, Iri)>,
    pub individuals: Vec<(Iri, Iri)>,
    pub source_text: String,
    /// Every triple of the source document, with document-local blank labels.
    pub triples: Vec<Triple>,
}

impl ActionRecipe {
    pub fn subaction(&self, class: &Iri) -> Option<&SubactionSpec> {
        self.subactions.iter().find(|s| &s.class_iri == class)
    }

    pub fn is_subaction(&self, class: &Iri) -> bool {
        self.subaction(class).is_some()
    }
}

#[cfg(test)]
mod tests;
