use super::{Constraint, ParsedOntology};
use crate::recipe::{ActionRecipe, SubactionSpec};
use crate::term::{Iri, Term};
use crate::vocab;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExtractError {
    #[error("recipe root {0} is not defined in the document")]
    RootNotFound(Iri),
    #[error("recipe root {0} has no subAction restrictions")]
    NoSubactions(Iri),
}

/// The first class that carries subAction restrictions and is not itself
/// some other class's subaction.
pub fn find_recipe_root(parsed: &ParsedOntology) -> Option<Iri> {
    let sub_action = vocab::sub_action();
    let subactions_of = |a: &super::ClassAxiom| -> Vec<Iri> {
        a.restrictions
            .iter()
            .filter(|r| r.on_property == sub_action)
            .filter_map(|r| match &r.constraint {
                Constraint::SomeValuesFrom(c) => Some(c.clone()),
                Constraint::HasValue(Term::Iri(c)) => Some(c.clone()),
                Constraint::HasValue(_) => None,
            })
            .collect()
    };
    let nested: Vec<Iri> = parsed.axioms.iter().flat_map(subactions_of).collect();
    parsed
        .axioms
        .iter()
        .find(|a| !subactions_of(a).is_empty() && !nested.contains(&a.class_iri))
        .map(|a| a.class_iri.clone())
}

/// Lift the recipe rooted at `root` out of a parsed document.
pub fn extract_recipe(
    parsed: &ParsedOntology,
    root: &Iri,
    source_text: &str,
) -> Result<ActionRecipe, ExtractError> {
    let axiom = parsed
        .axiom(root)
        .ok_or_else(|| ExtractError::RootNotFound(root.clone()))?;
    let sub_action = vocab::sub_action();
    let mut subactions = Vec::new();
    for r in axiom.restrictions.iter().filter(|r| r.on_property == sub_action) {
        let class = match &r.constraint {
            Constraint::SomeValuesFrom(c) => c,
            Constraint::HasValue(Term::Iri(c)) => c,
            Constraint::HasValue(_) => continue,
        };
        subactions.push(subaction_spec(parsed, class));
    }
    if subactions.is_empty() {
        return Err(ExtractError::NoSubactions(root.clone()));
    }
    Ok(ActionRecipe {
        root: root.clone(),
        label: axiom.label.clone(),
        subactions,
        orderings: orderings(parsed),
        individuals: parsed.individuals.clone(),
        source_text: source_text.to_string(),
        triples: parsed.triples.clone(),
    })
}

fn subaction_spec(parsed: &ParsedOntology, class: &Iri) -> SubactionSpec {
    let mut spec = SubactionSpec {
        class_iri: class.clone(),
        ..SubactionSpec::default()
    };
    let Some(axiom) = parsed.axiom(class) else {
        return spec;
    };
    spec.super_classes = axiom.super_classes.clone();
    for r in &axiom.restrictions {
        let Some(value) = r.has_value_iri() else {
            continue;
        };
        let slot = if r.on_property == vocab::performed_by() {
            &mut spec.performed_by
        } else if r.on_property == vocab::object_acted_on() {
            &mut spec.object_acted_on
        } else if r.on_property == vocab::to_location() {
            &mut spec.to_location
        } else {
            continue;
        };
        if slot.is_none() {
            *slot = Some(value.clone());
        }
    }
    spec
}

/// `(before, after)` pairs from every reified ordering node, in document order.
fn orderings(parsed: &ParsedOntology) -> Vec<(Iri, Iri)> {
    let before = Term::Iri(vocab::occurs_before());
    let after = Term::Iri(vocab::occurs_after());
    let mut out = Vec::new();
    for t in parsed.triples.iter().filter(|t| t.predicate == before) {
        let Term::Iri(a) = &t.object else { continue };
        for u in parsed
            .triples
            .iter()
            .filter(|u| u.subject == t.subject && u.predicate == after)
        {
            if let Term::Iri(b) = &u.object {
                let pair = (a.clone(), b.clone());
                if !out.contains(&pair) {
                    out.push(pair);
                }
            }
        }
    }
    out
}
