use std::collections::{BTreeMap, BTreeSet};

use super::ActionRecipe;
use crate::query::{self, Binding, ConjunctiveQuery, Goal, QueryError};
use crate::store::Graph;
use crate::term::{Iri, Term, TriplePattern};
use crate::vocab;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OrderError {
    #[error("ordering constraints form a cycle: {}", join(.0))]
    CyclicOrdering(Vec<Iri>),
    #[error("{current} has several successors: {}", join(.candidates))]
    AmbiguousSuccessor { current: Iri, candidates: Vec<Iri> },
    #[error("several subactions have no predecessor: {}", join(.0))]
    AmbiguousStart(Vec<Iri>),
    #[error(transparent)]
    Query(#[from] QueryError),
}

fn join(iris: &[Iri]) -> String {
    iris.iter().map(|i| i.local_name()).collect::<Vec<_>>().join(", ")
}

/// A total order extending the recipe's partial order. Among subactions
/// that are ready at the same time the lexicographically smallest IRI goes
/// first. Ordering endpoints that are not subactions are ignored here; the
/// validator reports them.
pub fn linearize(r: &ActionRecipe) -> Result<Vec<Iri>, OrderError> {
    let nodes: BTreeSet<&Iri> = r.subactions.iter().map(|s| &s.class_iri).collect();
    let mut succ: BTreeMap<&Iri, BTreeSet<&Iri>> = BTreeMap::new();
    let mut indegree: BTreeMap<&Iri, usize> = nodes.iter().map(|n| (*n, 0)).collect();
    for (a, b) in &r.orderings {
        if nodes.contains(a) && nodes.contains(b) && succ.entry(a).or_default().insert(b) {
            *indegree.get_mut(b).unwrap() += 1;
        }
    }
    let mut ready: BTreeSet<&Iri> = indegree.iter().filter(|(_, d)| **d == 0).map(|(n, _)| *n).collect();
    let mut out = Vec::with_capacity(nodes.len());
    while let Some(n) = ready.pop_first() {
        out.push(n.clone());
        for m in succ.get(n).into_iter().flatten() {
            let d = indegree.get_mut(m).unwrap();
            *d -= 1;
            if *d == 0 {
                ready.insert(m);
            }
        }
    }
    if out.len() < nodes.len() {
        let left: BTreeSet<&Iri> = indegree.iter().filter(|(_, d)| **d > 0).map(|(n, _)| *n).collect();
        return Err(OrderError::CyclicOrdering(find_cycle(&left, &succ)));
    }
    Ok(out)
}

/// Every node left after Kahn's algorithm has a predecessor that is also
/// left, so walking predecessors must revisit a node.
fn find_cycle(left: &BTreeSet<&Iri>, succ: &BTreeMap<&Iri, BTreeSet<&Iri>>) -> Vec<Iri> {
    let pred = |n: &Iri| -> &Iri {
        left.iter()
            .find(|p| succ.get(*p).is_some_and(|s| s.contains(n)))
            .copied()
            .expect("leftover node without leftover predecessor")
    };
    let mut path: Vec<&Iri> = vec![left.first().copied().expect("no leftover nodes")];
    loop {
        let p = pred(path.last().unwrap());
        if let Some(i) = path.iter().position(|x| *x == p) {
            let mut cycle: Vec<Iri> = path[i..].iter().map(|x| (*x).clone()).collect();
            cycle.reverse();
            let min = cycle.iter().enumerate().min_by_key(|(_, x)| *x).map(|(i, _)| i).unwrap();
            cycle.rotate_left(min);
            return cycle;
        }
        path.push(p);
    }
}

fn var(name: &str) -> Term {
    Term::var(name)
}

/// The successor query: `rdf(Order, occursBeforeInOrdering, OldTask),
/// rdf(Order, occursAfterInOrdering, Task)` with `OldTask` bound.
pub fn next_action(current: &Iri, g: &Graph) -> Result<Option<Iri>, OrderError> {
    let q = ConjunctiveQuery::new(vec![
        Goal::Rdf(TriplePattern::new(var("Order"), vocab::occurs_before(), var("OldTask"))),
        Goal::Rdf(TriplePattern::new(var("Order"), vocab::occurs_after(), var("Task"))),
    ]);
    let mut init = Binding::new();
    init.insert("OldTask", current.into());
    let mut found: Vec<Iri> = Vec::new();
    for b in query::solve_with(&q, g, init) {
        if let Some(Term::Iri(t)) = b?.get("Task") {
            if !found.contains(t) {
                found.push(t.clone());
            }
        }
    }
    match found.len() {
        0 => Ok(None),
        1 => Ok(found.pop()),
        _ => {
            found.sort();
            Err(OrderError::AmbiguousSuccessor {
                current: current.clone(),
                candidates: found,
            })
        }
    }
}

/// Subaction classes of an asserted recipe root, in IRI order.
pub(crate) fn asserted_subactions(root: &Iri, g: &Graph) -> Result<Vec<Iri>, QueryError> {
    let q = ConjunctiveQuery::new(vec![
        Goal::Rdf(TriplePattern::new(root, vocab::sub_class_of(), var("R"))),
        Goal::Rdf(TriplePattern::new(var("R"), vocab::on_property(), vocab::sub_action())),
        Goal::Rdf(TriplePattern::new(var("R"), vocab::some_values_from(), var("S"))),
    ]);
    let mut out = BTreeSet::new();
    for b in query::solve(&q, g) {
        if let Some(Term::Iri(s)) = b?.get("S") {
            out.insert(s.clone());
        }
    }
    Ok(out.into_iter().collect())
}

/// The unique subaction of `root` with no incoming ordering constraint, or
/// `None` when the root has no subactions.
pub fn first_action(root: &Iri, g: &Graph) -> Result<Option<Iri>, OrderError> {
    let after = Term::Iri(vocab::occurs_after());
    let subactions = asserted_subactions(root, g)?;
    let mut starts: Vec<Iri> = subactions
        .iter()
        .filter(|s| g.subjects(&after, &Term::Iri((*s).clone())).next().is_none())
        .cloned()
        .collect();
    match starts.len() {
        0 if subactions.is_empty() => Ok(None),
        0 => Err(OrderError::CyclicOrdering(subactions)),
        1 => Ok(starts.pop()),
        _ => Err(OrderError::AmbiguousStart(starts)),
    }
}
