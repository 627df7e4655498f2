//! Prefix table mapping short prefixes to namespace URIs.

use std::collections::BTreeMap;

use crate::term::{Iri, Term};
use crate::vocab;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NamespaceError {
    #[error("prefix `{0}` is not registered")]
    UnregisteredPrefix(String),
    #[error("no registered namespace covers <{0}>")]
    UncoveredIri(String),
    #[error("prefix `{prefix}` already maps to <{existing}>")]
    PrefixConflict { prefix: String, existing: String },
    #[error("namespace <{uri}> already registered under `{existing}`")]
    UriConflict { uri: String, existing: String },
    #[error("invalid prefix `{0}`")]
    InvalidPrefix(String),
}

/// A bijective prefix table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Namespaces {
    by_prefix: BTreeMap<String, String>,
    by_uri: BTreeMap<String, String>,
}

impl Default for Namespaces {
    fn default() -> Self {
        let mut ns = Namespaces::empty();
        for (p, u) in vocab::DEFAULT_PREFIXES {
            ns.register(p, u).expect("default prefixes are disjoint");
        }
        ns
    }
}

impl Namespaces {
    pub fn empty() -> Self {
        Namespaces {
            by_prefix: BTreeMap::new(),
            by_uri: BTreeMap::new(),
        }
    }

    /// Register `prefix` for `uri`. Re-registering an identical pair is a no-op;
    /// anything that would break the bijection is an error.
    pub fn register(&mut self, prefix: &str, uri: &str) -> Result<(), NamespaceError> {
        if prefix.is_empty()
            || !prefix.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
            || !prefix.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
        {
            return Err(NamespaceError::InvalidPrefix(prefix.to_string()));
        }
        match (self.by_prefix.get(prefix), self.by_uri.get(uri)) {
            (Some(u), _) if u == uri => Ok(()),
            (Some(u), _) => Err(NamespaceError::PrefixConflict {
                prefix: prefix.to_string(),
                existing: u.clone(),
            }),
            (None, Some(p)) => Err(NamespaceError::UriConflict {
                uri: uri.to_string(),
                existing: p.clone(),
            }),
            (None, None) => {
                self.by_prefix.insert(prefix.to_string(), uri.to_string());
                self.by_uri.insert(uri.to_string(), prefix.to_string());
                Ok(())
            }
        }
    }

    pub fn uri(&self, prefix: &str) -> Option<&str> {
        self.by_prefix.get(prefix).map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.by_prefix.iter().map(|(p, u)| (p.as_str(), u.as_str()))
    }

    /// `prefix` + `local` → expanded IRI.
    pub fn expand(&self, prefix: &str, local: &str) -> Result<Iri, NamespaceError> {
        let uri = self
            .uri(prefix)
            .ok_or_else(|| NamespaceError::UnregisteredPrefix(prefix.to_string()))?;
        Ok(Iri::new(format!("{uri}{local}")))
    }

    /// Expand a `prefix:local` string.
    pub fn expand_curie(&self, curie: &str) -> Result<Iri, NamespaceError> {
        let (prefix, local) = curie
            .split_once(':')
            .ok_or_else(|| NamespaceError::UnregisteredPrefix(curie.to_string()))?;
        self.expand(prefix, local)
    }

    /// Split an expanded IRI into `(prefix, local)` using the longest
    /// registered namespace that is a prefix of it.
    pub fn compact<'a>(&'a self, iri: &'a Iri) -> Option<(&'a str, &'a str)> {
        let s = iri.as_str();
        self.by_uri
            .iter()
            .filter(|(uri, _)| s.starts_with(uri.as_str()))
            .max_by_key(|(uri, _)| uri.len())
            .map(|(uri, prefix)| (prefix.as_str(), &s[uri.len()..]))
    }

    pub fn covers(&self, iri: &Iri) -> bool {
        self.compact(iri).is_some()
    }

    /// `prefix:local`, or `<expanded>` when no namespace covers the IRI.
    pub fn curie(&self, iri: &Iri) -> String {
        match self.compact(iri) {
            Some((p, l)) => format!("{p}:{l}"),
            None => format!("<{}>", iri.as_str()),
        }
    }

    /// Render a term in the query surface syntax: IRIs compacted, local names
    /// quoted when they are not plain identifiers.
    pub fn render(&self, term: &Term) -> String {
        match term {
            Term::Iri(i) => match self.compact(i) {
                Some((p, l)) if is_plain_local(l) => format!("{p}:{l}"),
                Some((p, l)) => format!("{p}:'{}'", l.replace('\'', "\\'")),
                None => format!("<{}>", i.as_str()),
            },
            Term::Literal { lexical, datatype } => {
                let lex = crate::term::escape_literal(lexical);
                if *datatype == vocab::xsd("string") {
                    format!("\"{lex}\"")
                } else if *datatype == vocab::xsd("integer") {
                    lex
                } else {
                    format!("\"{lex}\"^^{}", self.curie(datatype))
                }
            }
            Term::Blank(id) => format!("_:{id}"),
            Term::Var(v) => v.to_string(),
        }
    }
}

fn is_plain_local(l: &str) -> bool {
    let mut chars = l.chars();
    chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}
