//! RDF terms, triples and triple patterns.
//!
//! An [`Iri`] always holds its fully expanded form, so ordering and equality are
//! lexicographic on the expanded IRI. The `prefix:local` view is computed
//! through a [`Namespaces`](crate::namespace::Namespaces) table.

use std::fmt;
use std::sync::Arc;

use crate::vocab;

/// An expanded IRI.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Iri(Arc<str>);

impl Iri {
    pub fn new(expanded: impl AsRef<str>) -> Self {
        Iri(Arc::from(expanded.as_ref()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The part after the last `#` or `/`.
    pub fn local_name(&self) -> &str {
        let s = self.as_str();
        match s.rfind(['#', '/']) {
            Some(i) => &s[i + 1..],
            None => s,
        }
    }

    /// Everything up to and including the last `#` or `/`.
    pub fn namespace(&self) -> &str {
        let s = self.as_str();
        match s.rfind(['#', '/']) {
            Some(i) => &s[..=i],
            None => "",
        }
    }
}

impl fmt::Display for Iri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<{}>", self.0)
    }
}

/// A ground or variable term.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(Iri),
    Literal { lexical: Arc<str>, datatype: Iri },
    Blank(Arc<str>),
    Var(Arc<str>),
}

impl Term {
    pub fn iri(expanded: impl AsRef<str>) -> Self {
        Term::Iri(Iri::new(expanded))
    }

    /// A plain string literal (`xsd:string`).
    pub fn string(lexical: impl AsRef<str>) -> Self {
        Term::Literal {
            lexical: Arc::from(lexical.as_ref()),
            datatype: vocab::xsd("string"),
        }
    }

    pub fn integer(value: i64) -> Self {
        Term::Literal {
            lexical: Arc::from(value.to_string()),
            datatype: vocab::xsd("integer"),
        }
    }

    pub fn typed(lexical: impl AsRef<str>, datatype: Iri) -> Self {
        Term::Literal {
            lexical: Arc::from(lexical.as_ref()),
            datatype,
        }
    }

    /// A blank node; `id` is the label without the `_:` marker.
    pub fn blank(id: impl AsRef<str>) -> Self {
        Term::Blank(Arc::from(id.as_ref()))
    }

    pub fn var(name: impl AsRef<str>) -> Self {
        Term::Var(Arc::from(name.as_ref()))
    }

    pub fn is_var(&self) -> bool {
        matches!(self, Term::Var(_))
    }

    pub fn is_ground(&self) -> bool {
        !self.is_var()
    }

    pub fn as_iri(&self) -> Option<&Iri> {
        match self {
            Term::Iri(i) => Some(i),
            _ => None,
        }
    }

    pub fn as_var(&self) -> Option<&str> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn literal_value(&self) -> Option<&str> {
        match self {
            Term::Literal { lexical, .. } => Some(lexical),
            _ => None,
        }
    }
}

impl From<Iri> for Term {
    fn from(i: Iri) -> Self {
        Term::Iri(i)
    }
}

impl From<&Iri> for Term {
    fn from(i: &Iri) -> Self {
        Term::Iri(i.clone())
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(i) => write!(f, "{i}"),
            Term::Literal { lexical, datatype } => {
                write!(f, "\"{}\"^^{}", escape_literal(lexical), datatype)
            }
            Term::Blank(id) => write!(f, "_:{id}"),
            Term::Var(v) => write!(f, "{v}"),
        }
    }
}

pub(crate) fn escape_literal(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

/// A ground RDF statement.
///
/// Construct through [`Triple::new`], which enforces the positional rules:
/// the predicate is an IRI, the subject is never a literal and no position
/// holds a variable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TripleError {
    #[error("triple contains variable {0}")]
    NonGround(String),
    #[error("predicate must be an IRI, got {0}")]
    PredicateNotIri(String),
    #[error("subject must be an IRI or blank node, got {0}")]
    LiteralSubject(String),
}

impl Triple {
    pub fn new(
        subject: impl Into<Term>,
        predicate: impl Into<Term>,
        object: impl Into<Term>,
    ) -> Result<Self, TripleError> {
        let (subject, predicate, object) = (subject.into(), predicate.into(), object.into());
        for t in [&subject, &predicate, &object] {
            if let Term::Var(v) = t {
                return Err(TripleError::NonGround(v.to_string()));
            }
        }
        if !matches!(predicate, Term::Iri(_)) {
            return Err(TripleError::PredicateNotIri(predicate.to_string()));
        }
        if matches!(subject, Term::Literal { .. }) {
            return Err(TripleError::LiteralSubject(subject.to_string()));
        }
        Ok(Triple {
            subject,
            predicate,
            object,
        })
    }

    /// Shorthand for IRI-only triples, which are always well formed.
    pub fn iris(s: &Iri, p: &Iri, o: &Iri) -> Self {
        Triple {
            subject: s.into(),
            predicate: p.into(),
            object: o.into(),
        }
    }

    pub fn terms(&self) -> [&Term; 3] {
        [&self.subject, &self.predicate, &self.object]
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

/// A triple whose positions may hold variables.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TriplePattern {
    pub subject: Term,
    pub predicate: Term,
    pub object: Term,
}

impl TriplePattern {
    pub fn new(subject: impl Into<Term>, predicate: impl Into<Term>, object: impl Into<Term>) -> Self {
        TriplePattern {
            subject: subject.into(),
            predicate: predicate.into(),
            object: object.into(),
        }
    }

    /// `(?S, ?P, ?O)`.
    pub fn any() -> Self {
        TriplePattern::new(Term::var("S"), Term::var("P"), Term::var("O"))
    }

    pub fn terms(&self) -> [&Term; 3] {
        [&self.subject, &self.predicate, &self.object]
    }

    pub fn is_ground(&self) -> bool {
        self.terms().iter().all(|t| t.is_ground())
    }

    /// Whether `t` unifies with this pattern, respecting repeated variables.
    pub fn matches(&self, t: &Triple) -> bool {
        let pairs = [
            (&self.subject, &t.subject),
            (&self.predicate, &t.predicate),
            (&self.object, &t.object),
        ];
        let mut seen: [Option<(&str, &Term)>; 3] = [None, None, None];
        for (i, (p, v)) in pairs.iter().enumerate() {
            match p {
                Term::Var(name) => {
                    for (n, bound) in seen.iter().flatten() {
                        if *n == &**name && *bound != *v {
                            return false;
                        }
                    }
                    seen[i] = Some((name, v));
                }
                ground => {
                    if *ground != *v {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Convert to a triple if every position is ground and well placed.
    pub fn to_triple(&self) -> Result<Triple, TripleError> {
        Triple::new(self.subject.clone(), self.predicate.clone(), self.object.clone())
    }
}

impl From<&Triple> for TriplePattern {
    fn from(t: &Triple) -> Self {
        TriplePattern::new(t.subject.clone(), t.predicate.clone(), t.object.clone())
    }
}

impl fmt::Display for TriplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.subject, self.predicate, self.object)
    }
}
