use std::collections::BTreeSet;

use super::order::asserted_subactions;
use super::ActionRecipe;
use crate::store::{Graph, StoreError};
use crate::term::{Iri, Term, TriplePattern};
use crate::vocab;

/// Remove every triple about `subject`, following blank-node objects so
/// restriction and ordering clusters go too. Returns the number removed.
fn retract_subject(g: &mut Graph, subject: &Term) -> usize {
    let pattern = TriplePattern::new(subject.clone(), Term::var("P"), Term::var("O"));
    let blanks: Vec<Term> = g
        .matching(&pattern)
        .filter(|t| matches!(t.object, Term::Blank(_)))
        .map(|t| t.object)
        .collect();
    let mut removed = g.retract(&pattern);
    for b in blanks {
        removed += retract_subject(g, &b);
    }
    removed
}

/// Roots already in the graph that own any of `classes`, either as the root
/// itself or as one of its subactions.
fn owning_roots(g: &Graph, classes: &BTreeSet<Iri>) -> Result<BTreeSet<Iri>, StoreError> {
    let sub_action = Term::Iri(vocab::sub_action());
    let on_property = Term::Iri(vocab::on_property());
    let sub_class_of = Term::Iri(vocab::sub_class_of());
    let mut roots = BTreeSet::new();
    for r in g.subjects(&on_property, &sub_action) {
        for root in g.subjects(&sub_class_of, r) {
            let Term::Iri(root) = root else { continue };
            if roots.contains(root) {
                continue;
            }
            let owned = classes.contains(root)
                || asserted_subactions(root, g)
                    .unwrap_or_default()
                    .iter()
                    .any(|s| classes.contains(s));
            if owned {
                roots.insert(root.clone());
            }
        }
    }
    Ok(roots)
}

/// Remove an asserted recipe: the root's definition, its ordering nodes and
/// the definitions of its subaction classes. Individuals are left alone.
pub fn retract_recipe(g: &mut Graph, root: &Iri) -> usize {
    let subs = asserted_subactions(root, g).unwrap_or_default();
    let mut removed = retract_subject(g, &root.into());
    for s in subs {
        removed += retract_subject(g, &s.into());
    }
    removed
}

/// Assert a validated recipe. A class can belong to one recipe at a time,
/// so recipes that share the root or a subaction class with this one are
/// retracted first. Blank nodes get fresh graph-wide labels. Returns the
/// number of triples newly added.
pub fn assert_recipe(g: &mut Graph, r: &ActionRecipe) -> Result<usize, StoreError> {
    let classes: BTreeSet<Iri> = std::iter::once(r.root.clone())
        .chain(r.subactions.iter().map(|s| s.class_iri.clone()))
        .collect();
    let mut scratch = g.clone();
    for root in owning_roots(&scratch, &classes)? {
        retract_recipe(&mut scratch, &root);
    }
    for c in &classes {
        retract_subject(&mut scratch, &c.into());
    }
    let before = scratch.len();
    scratch.assert_document(&r.triples)?;
    let added = scratch.len() - before;
    *g = scratch;
    Ok(added)
}
