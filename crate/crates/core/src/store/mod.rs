//! Indexed triple store.
//!
//! Triples are kept in three nested permutation indexes (subject-first,
//! predicate-first, object-first). Every lookup picks the index whose leading
//! positions are bound by the pattern, so iteration order is the index order:
//! lexicographic on expanded IRIs within each term kind.
//!
//! Mutation takes `&mut Graph`; readers borrow it shared. That is the whole
//! single-writer contract.

mod ntriples;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

pub use ntriples::{dump_ntriples, parse_ntriples};

use crate::namespace::{NamespaceError, Namespaces};
use crate::term::{Term, Triple, TripleError, TriplePattern};

type Index = BTreeMap<Term, BTreeMap<Term, BTreeSet<Term>>>;

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum StoreError {
    #[error(transparent)]
    Namespace(#[from] NamespaceError),
    #[error("non-ground triple: {0}")]
    NonGroundTriple(String),
    #[error(transparent)]
    Malformed(#[from] TripleError),
    #[error("N-Triples parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Default)]
pub struct Graph {
    spo: Index,
    pos: Index,
    osp: Index,
    len: usize,
    namespaces: Namespaces,
    blank_counter: u64,
}

impl Graph {
    pub fn new() -> Self {
        Graph::default()
    }

    pub fn with_namespaces(namespaces: Namespaces) -> Self {
        Graph {
            namespaces,
            ..Graph::default()
        }
    }

    pub fn namespaces(&self) -> &Namespaces {
        &self.namespaces
    }

    pub fn namespaces_mut(&mut self) -> &mut Namespaces {
        &mut self.namespaces
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Whether `t` could be asserted: ground, well placed, every IRI covered.
    pub fn check_triple(&self, t: &Triple) -> Result<(), StoreError> {
        for term in t.terms() {
            match term {
                Term::Var(v) => return Err(StoreError::NonGroundTriple(format!("variable {v} in {t}"))),
                Term::Iri(i) | Term::Literal { datatype: i, .. } => {
                    if !self.namespaces.covers(i) {
                        return Err(NamespaceError::UncoveredIri(i.as_str().to_string()).into());
                    }
                }
                Term::Blank(_) => {}
            }
        }
        if !matches!(t.predicate, Term::Iri(_)) {
            return Err(TripleError::PredicateNotIri(t.predicate.to_string()).into());
        }
        if matches!(t.subject, Term::Literal { .. }) {
            return Err(TripleError::LiteralSubject(t.subject.to_string()).into());
        }
        Ok(())
    }

    /// Insert `t`; returns whether it was new.
    pub fn assert_triple(&mut self, t: Triple) -> Result<bool, StoreError> {
        self.check_triple(&t)?;
        Ok(self.insert_unchecked(t))
    }

    fn insert_unchecked(&mut self, t: Triple) -> bool {
        let Triple {
            subject: s,
            predicate: p,
            object: o,
        } = t;
        let new = self
            .spo
            .entry(s.clone())
            .or_default()
            .entry(p.clone())
            .or_default()
            .insert(o.clone());
        if new {
            self.pos
                .entry(p.clone())
                .or_default()
                .entry(o.clone())
                .or_default()
                .insert(s.clone());
            self.osp.entry(o).or_default().entry(s).or_default().insert(p);
            self.len += 1;
        }
        new
    }

    /// Assert every triple or none. Returns the number newly added.
    pub fn assert_all(&mut self, triples: impl IntoIterator<Item = Triple>) -> Result<usize, StoreError> {
        let triples: Vec<Triple> = triples.into_iter().collect();
        for t in &triples {
            self.check_triple(t)?;
        }
        Ok(triples.into_iter().filter(|t| self.insert_unchecked(t.clone())).count())
    }

    /// Assert a document's triples, relabelling its blank nodes to fresh graph
    /// blanks. Labels stay consistent within the document.
    pub fn assert_document(&mut self, triples: &[Triple]) -> Result<usize, StoreError> {
        let mut map: HashMap<Arc<str>, Term> = HashMap::new();
        let mut relabelled = Vec::with_capacity(triples.len());
        for t in triples {
            let mut fix = |term: &Term| -> Term {
                match term {
                    Term::Blank(id) => map
                        .entry(id.clone())
                        .or_insert_with(|| self.fresh_blank())
                        .clone(),
                    other => other.clone(),
                }
            };
            let s = fix(&t.subject);
            let o = fix(&t.object);
            relabelled.push(Triple {
                subject: s,
                predicate: t.predicate.clone(),
                object: o,
            });
        }
        self.assert_all(relabelled)
    }

    /// A blank node `_:bN` not yet used in this graph.
    pub fn fresh_blank(&mut self) -> Term {
        loop {
            let t = Term::blank(format!("b{}", self.blank_counter));
            self.blank_counter += 1;
            if !self.spo.contains_key(&t) && !self.osp.contains_key(&t) {
                return t;
            }
        }
    }

    pub fn contains(&self, t: &Triple) -> bool {
        self.spo
            .get(&t.subject)
            .and_then(|m| m.get(&t.predicate))
            .is_some_and(|s| s.contains(&t.object))
    }

    /// Remove every triple matching `pattern`; returns how many were removed.
    pub fn retract(&mut self, pattern: &TriplePattern) -> usize {
        let victims: Vec<Triple> = self.matching(pattern).collect();
        for t in &victims {
            self.remove(t);
        }
        victims.len()
    }

    pub fn remove(&mut self, t: &Triple) -> bool {
        fn drop3(idx: &mut Index, a: &Term, b: &Term, c: &Term) -> bool {
            let Some(m) = idx.get_mut(a) else { return false };
            let Some(s) = m.get_mut(b) else { return false };
            let removed = s.remove(c);
            if s.is_empty() {
                m.remove(b);
            }
            if m.is_empty() {
                idx.remove(a);
            }
            removed
        }
        if drop3(&mut self.spo, &t.subject, &t.predicate, &t.object) {
            drop3(&mut self.pos, &t.predicate, &t.object, &t.subject);
            drop3(&mut self.osp, &t.object, &t.subject, &t.predicate);
            self.len -= 1;
            true
        } else {
            false
        }
    }

    /// All stored triples unifiable with `pattern`, in index order.
    pub fn matching<'a>(&'a self, pattern: &'a TriplePattern) -> Box<dyn Iterator<Item = Triple> + 'a> {
        let ground = |t: &'a Term| if t.is_var() { None } else { Some(t) };
        let (s, p, o) = (
            ground(&pattern.subject),
            ground(&pattern.predicate),
            ground(&pattern.object),
        );
        let spo = |s: Term, p: Term, o: Term| Triple {
            subject: s,
            predicate: p,
            object: o,
        };
        let iter: Box<dyn Iterator<Item = Triple> + 'a> = match (s, p, o) {
            (Some(s), Some(p), Some(o)) => {
                let t = spo(s.clone(), p.clone(), o.clone());
                Box::new(self.contains(&t).then_some(t).into_iter())
            }
            (Some(s), Some(p), None) => Box::new(
                lookup2(&self.spo, s, p).map(move |o| spo(s.clone(), p.clone(), o.clone())),
            ),
            (Some(s), None, Some(o)) => Box::new(
                lookup2(&self.osp, o, s).map(move |p| spo(s.clone(), p.clone(), o.clone())),
            ),
            (None, Some(p), Some(o)) => Box::new(
                lookup2(&self.pos, p, o).map(move |s| spo(s.clone(), p.clone(), o.clone())),
            ),
            (Some(s), None, None) => {
                Box::new(lookup1(&self.spo, s).map(move |(p, o)| spo(s.clone(), p.clone(), o.clone())))
            }
            (None, Some(p), None) => {
                Box::new(lookup1(&self.pos, p).map(move |(o, s)| spo(s.clone(), p.clone(), o.clone())))
            }
            (None, None, Some(o)) => {
                Box::new(lookup1(&self.osp, o).map(move |(s, p)| spo(s.clone(), p.clone(), o.clone())))
            }
            (None, None, None) => Box::new(self.iter()),
        };
        Box::new(iter.filter(move |t| pattern.matches(t)))
    }

    /// All triples in subject-predicate-object order.
    pub fn iter(&self) -> impl Iterator<Item = Triple> + '_ {
        self.spo.iter().flat_map(|(s, m)| {
            m.iter().flat_map(move |(p, os)| {
                os.iter().map(move |o| Triple {
                    subject: s.clone(),
                    predicate: p.clone(),
                    object: o.clone(),
                })
            })
        })
    }

    /// Enumerate via a specific index; used to check the indexes agree.
    #[doc(hidden)]
    pub fn iter_index(&self, which: IndexKind) -> Vec<Triple> {
        type Reorder = fn(&Term, &Term, &Term) -> Triple;
        let (idx, order): (&Index, Reorder) = match which {
            IndexKind::Spo => (&self.spo, |a, b, c| mk(a, b, c)),
            IndexKind::Pos => (&self.pos, |a, b, c| mk(c, a, b)),
            IndexKind::Osp => (&self.osp, |a, b, c| mk(b, c, a)),
        };
        let mut out = Vec::new();
        for (a, m) in idx {
            for (b, cs) in m {
                for c in cs {
                    out.push(order(a, b, c));
                }
            }
        }
        out
    }

    /// Distinct objects of `(s, p, ?)`.
    pub fn objects<'a>(&'a self, s: &'a Term, p: &'a Term) -> impl Iterator<Item = &'a Term> + 'a {
        lookup2(&self.spo, s, p)
    }

    /// Distinct subjects of `(?, p, o)`.
    pub fn subjects<'a>(&'a self, p: &'a Term, o: &'a Term) -> impl Iterator<Item = &'a Term> + 'a {
        lookup2(&self.pos, p, o)
    }

    /// Whether the term occurs anywhere in the graph.
    pub fn mentions(&self, t: &Term) -> bool {
        self.spo.contains_key(t) || self.pos.contains_key(t) || self.osp.contains_key(t)
    }
}

#[doc(hidden)]
#[derive(Debug, Clone, Copy)]
pub enum IndexKind {
    Spo,
    Pos,
    Osp,
}

fn mk(s: &Term, p: &Term, o: &Term) -> Triple {
    Triple {
        subject: s.clone(),
        predicate: p.clone(),
        object: o.clone(),
    }
}

fn lookup1<'a>(idx: &'a Index, a: &Term) -> impl Iterator<Item = (&'a Term, &'a Term)> + 'a {
    idx.get(a)
        .into_iter()
        .flat_map(|m| m.iter().flat_map(|(b, cs)| cs.iter().map(move |c| (b, c))))
}

fn lookup2<'a>(idx: &'a Index, a: &Term, b: &Term) -> impl Iterator<Item = &'a Term> + 'a {
    idx.get(a).and_then(|m| m.get(b)).into_iter().flat_map(|s| s.iter())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::vocab;
    use proptest::prelude::*;

    fn re(l: &str) -> Term {
        Term::Iri(vocab::roboearth(l))
    }

    #[test]
    fn assert_perception_type() {
        let mut g = Graph::new();
        let t = Triple::new(re("p1"), vocab::rdf_type(), vocab::perception()).unwrap();
        assert!(g.assert_triple(t.clone()).unwrap());
        assert_eq!(g.len(), 1);
        assert!(!g.assert_triple(t).unwrap());
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn location_match_after_insert() {
        let mut g = Graph::new();
        let t = Triple::new(re("huawei_mug_1"), vocab::location(), re("table_1")).unwrap();
        g.assert_triple(t.clone()).unwrap();
        let pat = TriplePattern::new(Term::var("S"), vocab::location(), Term::var("O"));
        assert_eq!(g.matching(&pat).collect::<Vec<_>>(), vec![t]);
    }

    #[test]
    fn rejects_unregistered_namespace_and_variables() {
        let mut g = Graph::new();
        let t = Triple::new(Term::iri("http://nowhere.example/x"), vocab::location(), re("a")).unwrap();
        assert!(matches!(g.assert_triple(t), Err(StoreError::Namespace(_))));
        let bad = Triple {
            subject: Term::var("X"),
            predicate: vocab::location().into(),
            object: re("a"),
        };
        assert!(matches!(g.assert_triple(bad), Err(StoreError::NonGroundTriple(_))));
        assert!(g.is_empty());
    }

    #[test]
    fn retract_cases() {
        let mut g = Graph::new();
        assert_eq!(g.retract(&TriplePattern::any()), 0);
        g.assert_triple(Triple::new(re("huawei_mug_1"), vocab::location(), re("table_1")).unwrap())
            .unwrap();
        g.assert_triple(Triple::new(re("huawei_mug_1"), vocab::rdf_type(), re("Mug")).unwrap())
            .unwrap();
        let before = g.len();
        let n = g.retract(&TriplePattern::new(re("huawei_mug_1"), vocab::location(), Term::var("L")));
        assert_eq!(n, 1);
        assert_eq!(g.len(), before - 1);
        assert_eq!(g.retract(&TriplePattern::any()), 1);
        assert!(g.is_empty());
        assert!(g.iter_index(IndexKind::Pos).is_empty());
        assert!(g.iter_index(IndexKind::Osp).is_empty());
    }

    #[test]
    fn ordering_chain_match_count() {
        let mut g = Graph::new();
        let steps = ["A", "B", "C", "D", "E"];
        for (i, w) in steps.windows(2).enumerate() {
            let n = Term::blank(format!("o{i}"));
            g.assert_triple(Triple::new(n.clone(), vocab::occurs_before(), re(w[0])).unwrap())
                .unwrap();
            g.assert_triple(Triple::new(n, vocab::occurs_after(), re(w[1])).unwrap())
                .unwrap();
        }
        let pat = TriplePattern::new(Term::var("Order"), vocab::occurs_before(), Term::var("X"));
        assert_eq!(g.matching(&pat).count(), steps.len() - 1);
        let missing = TriplePattern::new(re("Z"), vocab::occurs_before(), Term::var("X"));
        assert_eq!(g.matching(&missing).count(), 0);
    }

    #[test]
    fn fresh_blanks_skip_existing_labels() {
        let mut g = Graph::new();
        g.assert_triple(Triple::new(Term::blank("b0"), vocab::location(), re("x")).unwrap())
            .unwrap();
        assert_eq!(g.fresh_blank(), Term::blank("b1"));
    }

    #[test]
    fn document_blanks_are_relabelled_consistently() {
        let mut g = Graph::new();
        let doc = vec![
            Triple::new(re("C"), vocab::sub_class_of(), Term::blank("b0")).unwrap(),
            Triple::new(Term::blank("b0"), vocab::on_property(), vocab::sub_action()).unwrap(),
        ];
        assert_eq!(g.assert_document(&doc).unwrap(), 2);
        assert_eq!(g.assert_document(&doc).unwrap(), 2);
        assert_eq!(g.len(), 4);
        let pat = TriplePattern::new(re("C"), vocab::sub_class_of(), Term::var("R"));
        for t in g.matching(&pat) {
            let p = TriplePattern::new(t.object.clone(), vocab::on_property(), Term::var("P"));
            assert_eq!(g.matching(&p).count(), 1);
        }
    }

    fn arb_graph() -> impl Strategy<Value = Vec<(u8, u8, u8)>> {
        prop::collection::vec((0u8..10, 0u8..4, 0u8..10), 0..500)
    }

    fn term(k: u8) -> Term {
        if k < 7 {
            re(&format!("t{k}"))
        } else {
            Term::blank(format!("x{k}"))
        }
    }

    fn obj(k: u8) -> Term {
        if k == 9 {
            Term::string("lit")
        } else {
            term(k)
        }
    }

    fn build(raw: &[(u8, u8, u8)]) -> (Graph, BTreeSet<Triple>) {
        let mut g = Graph::new();
        let mut set = BTreeSet::new();
        for &(s, p, o) in raw {
            let s = if s == 9 { 0 } else { s };
            let t = Triple::new(term(s), vocab::knowrob(&format!("p{p}")), obj(o)).unwrap();
            g.assert_triple(t.clone()).unwrap();
            set.insert(t);
        }
        (g, set)
    }

    fn pat_term(k: Option<u8>, var: &str, f: fn(u8) -> Term) -> Term {
        k.map(f).unwrap_or_else(|| Term::var(var))
    }

    proptest! {
        #[test]
        fn indexes_agree_with_linear_scan(
            raw in arb_graph(),
            s in prop::option::of(0u8..9),
            p in prop::option::of(0u8..4),
            o in prop::option::of(0u8..10),
            same_var in any::<bool>(),
        ) {
            let (g, set) = build(&raw);
            prop_assert_eq!(g.len(), set.len());
            let all: Vec<Triple> = set.iter().cloned().collect();
            for k in [IndexKind::Spo, IndexKind::Pos, IndexKind::Osp] {
                let mut v = g.iter_index(k);
                v.sort();
                prop_assert_eq!(&v, &all);
            }
            let ovar = if same_var { "S" } else { "O" };
            let pat = TriplePattern::new(
                pat_term(s, "S", term),
                pat_term(p, "P", |k| vocab::knowrob(&format!("p{k}")).into()),
                pat_term(o, ovar, obj),
            );
            let via_index: BTreeSet<Triple> = g.matching(&pat).collect();
            let via_scan: BTreeSet<Triple> = set.iter().filter(|t| pat.matches(t)).cloned().collect();
            prop_assert_eq!(via_index, via_scan);
        }

        #[test]
        fn assert_then_retract_restores(raw in arb_graph(), extra in (0u8..9, 0u8..4, 0u8..10)) {
            let (mut g, _) = build(&raw);
            let t = Triple::new(term(extra.0), vocab::knowrob(&format!("p{}", extra.1)), obj(extra.2)).unwrap();
            if g.contains(&t) {
                return Ok(());
            }
            let before: Vec<Triple> = g.iter().collect();
            g.assert_triple(t.clone()).unwrap();
            g.assert_triple(t.clone()).unwrap();
            prop_assert_eq!(g.len(), before.len() + 1);
            prop_assert_eq!(g.retract(&TriplePattern::from(&t)), 1);
            prop_assert_eq!(g.iter().collect::<Vec<_>>(), before);
            for k in [IndexKind::Pos, IndexKind::Osp] {
                prop_assert_eq!(g.iter_index(k).len(), g.len());
            }
        }
    }
}
