use std::collections::{BTreeSet, HashSet, VecDeque};

use super::{Binding, ConjunctiveQuery, Goal, QueryError};
use crate::store::Graph;
use crate::term::{Term, Triple, TriplePattern};

/// What a query runs against. Read-only graphs reject `rdf_assert`.
pub trait KnowledgeBase {
    fn graph(&self) -> &Graph;
    fn assert(&mut self, t: Triple) -> Result<bool, QueryError>;
}

impl KnowledgeBase for &Graph {
    fn graph(&self) -> &Graph {
        self
    }

    fn assert(&mut self, _: Triple) -> Result<bool, QueryError> {
        Err(QueryError::ReadOnly)
    }
}

impl KnowledgeBase for &mut Graph {
    fn graph(&self) -> &Graph {
        self
    }

    fn assert(&mut self, t: Triple) -> Result<bool, QueryError> {
        Ok(self.assert_triple(t)?)
    }
}

pub fn solve<'g>(q: &ConjunctiveQuery, g: &'g Graph) -> Solutions<&'g Graph> {
    solve_with(q, g, Binding::new())
}

pub fn solve_mut<'g>(q: &ConjunctiveQuery, g: &'g mut Graph) -> Solutions<&'g mut Graph> {
    solve_with(q, g, Binding::new())
}

/// Solve with some variables bound up front.
pub fn solve_with<K: KnowledgeBase>(q: &ConjunctiveQuery, kb: K, initial: Binding) -> Solutions<K> {
    Solutions {
        kb,
        goals: q.goals.clone(),
        stack: Vec::new(),
        initial: Some(initial),
        asserted: 0,
        failed: false,
    }
}

/// Lazy depth-first enumeration of solutions.
///
/// `stack[i]` holds the remaining bindings that satisfy goals `0..=i`.
pub struct Solutions<K> {
    kb: K,
    goals: Vec<Goal>,
    stack: Vec<std::vec::IntoIter<Binding>>,
    initial: Option<Binding>,
    asserted: usize,
    failed: bool,
}

impl<K: KnowledgeBase> Solutions<K> {
    /// Triples newly added by `rdf_assert` goals so far.
    pub fn asserted(&self) -> usize {
        self.asserted
    }

    /// Drop repeated solutions, keeping first-occurrence order.
    pub fn distinct(self) -> impl Iterator<Item = Result<Binding, QueryError>> {
        let mut seen = HashSet::new();
        self.filter(move |r| match r {
            Ok(b) => seen.insert(b.clone()),
            Err(_) => true,
        })
    }

    /// All distinct solutions, or the first error.
    pub fn collect_distinct(self) -> Result<Vec<Binding>, QueryError> {
        self.distinct().collect()
    }

    fn expand(&mut self, depth: usize, b: &Binding) -> Result<Vec<Binding>, QueryError> {
        let goal = &self.goals[depth].clone();
        let pattern = b.apply_pattern(goal.pattern());
        match goal {
            Goal::Rdf(_) => Ok(self
                .kb
                .graph()
                .matching(&pattern)
                .map(|t| unify(&pattern, &t, b))
                .collect()),
            Goal::RdfReachable(_) => reachable_goal(self.kb.graph(), &pattern, b, goal),
            Goal::RdfAssert(_) => {
                let t = pattern
                    .to_triple()
                    .map_err(|_| QueryError::NonGroundAssert(goal.to_string()))?;
                if self.kb.assert(t)? {
                    self.asserted += 1;
                }
                Ok(vec![b.clone()])
            }
        }
    }
}

impl<K: KnowledgeBase> Iterator for Solutions<K> {
    type Item = Result<Binding, QueryError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        if let Some(init) = self.initial.take() {
            if self.goals.is_empty() {
                return Some(Ok(init));
            }
            match self.expand(0, &init) {
                Ok(v) => self.stack.push(v.into_iter()),
                Err(e) => {
                    self.failed = true;
                    return Some(Err(e));
                }
            }
        }
        while let Some(top) = self.stack.last_mut() {
            let Some(b) = top.next() else {
                self.stack.pop();
                continue;
            };
            let depth = self.stack.len();
            if depth == self.goals.len() {
                return Some(Ok(b));
            }
            match self.expand(depth, &b) {
                Ok(v) => self.stack.push(v.into_iter()),
                Err(e) => {
                    self.failed = true;
                    self.stack.clear();
                    return Some(Err(e));
                }
            }
        }
        None
    }
}

fn unify(pattern: &TriplePattern, t: &Triple, b: &Binding) -> Binding {
    let mut out = b.clone();
    for (p, v) in pattern.terms().into_iter().zip(t.terms()) {
        if let Term::Var(name) = p {
            out.insert(name.clone(), v.clone());
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Follow edges subject → object.
    Forward,
    /// Follow edges object → subject.
    Backward,
}

/// Breadth-first closure from `start` over `predicate` edges, including
/// `start` itself at depth 0. Each node appears once, at its minimal depth.
pub fn reachable(g: &Graph, start: &Term, predicate: &Term, dir: Direction) -> Vec<(Term, usize)> {
    let mut seen: BTreeSet<Term> = BTreeSet::new();
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    seen.insert(start.clone());
    queue.push_back((start.clone(), 0));
    while let Some((node, depth)) = queue.pop_front() {
        let next: Vec<Term> = match dir {
            Direction::Forward => g.objects(&node, predicate).cloned().collect(),
            Direction::Backward => g.subjects(predicate, &node).cloned().collect(),
        };
        out.push((node, depth));
        for n in next {
            if seen.insert(n.clone()) {
                queue.push_back((n, depth + 1));
            }
        }
    }
    out
}

fn reachable_goal(
    g: &Graph,
    pattern: &TriplePattern,
    b: &Binding,
    goal: &Goal,
) -> Result<Vec<Binding>, QueryError> {
    if pattern.predicate.is_var() {
        return Err(QueryError::UnboundPredicate(goal.to_string()));
    }
    let (s, p, o) = (&pattern.subject, &pattern.predicate, &pattern.object);
    let bind = |var: &Term, value: Term| {
        let mut out = b.clone();
        if let Term::Var(v) = var {
            out.insert(v.clone(), value);
        }
        out
    };
    Ok(match (s.is_var(), o.is_var()) {
        (true, true) => return Err(QueryError::BothEndsUnbound(goal.to_string())),
        (false, false) => {
            let hit = reachable(g, s, p, Direction::Forward).iter().any(|(n, _)| n == o);
            if hit {
                vec![b.clone()]
            } else {
                Vec::new()
            }
        }
        (false, true) => reachable(g, s, p, Direction::Forward)
            .into_iter()
            .map(|(n, _)| bind(o, n))
            .collect(),
        (true, false) => reachable(g, o, p, Direction::Backward)
            .into_iter()
            .map(|(n, _)| bind(s, n))
            .collect(),
    })
}
