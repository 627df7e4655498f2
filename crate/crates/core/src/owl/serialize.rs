//! Triples → RDF/XML in the same closed subset the parser reads.
//!
//! Every blank node must be referenced exactly once so it can be nested under
//! its parent. Graph shapes the dialect cannot express are rejected.

use std::collections::HashMap;
use std::fmt::Write as _;

use crate::namespace::Namespaces;
use crate::term::{Iri, Term, Triple};
use crate::vocab;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SerializeError {
    #[error("blank node _:{0} is referenced {1} times; the dialect needs exactly one")]
    SharedBlank(String, usize),
    #[error("no registered namespace covers <{0}>")]
    Uncovered(String),
    #[error("subject {0} needs exactly one rdf:type")]
    Untyped(String),
    #[error("cannot express {0}")]
    Inexpressible(String),
}

type Props<'a> = Vec<(&'a Iri, &'a Term)>;

struct Writer<'a> {
    ns: &'a Namespaces,
    props: HashMap<&'a Term, Props<'a>>,
    out: String,
}

/// Serialize `triples`, grouping by subject in first-appearance order.
pub fn serialize_rdfxml(triples: &[Triple], ns: &Namespaces) -> Result<String, SerializeError> {
    let mut order: Vec<&Term> = Vec::new();
    let mut props: HashMap<&Term, Props> = HashMap::new();
    let mut refs: HashMap<&Term, usize> = HashMap::new();
    for t in triples {
        let Term::Iri(p) = &t.predicate else {
            return Err(SerializeError::Inexpressible(t.to_string()));
        };
        let entry = props.entry(&t.subject).or_default();
        if entry.is_empty() {
            order.push(&t.subject);
        }
        if !entry.contains(&(p, &t.object)) {
            entry.push((p, &t.object));
            if let Term::Blank(_) = t.object {
                *refs.entry(&t.object).or_default() += 1;
            }
        }
    }
    for s in &order {
        if let Term::Blank(b) = s {
            let n = refs.get(s).copied().unwrap_or(0);
            if n != 1 {
                return Err(SerializeError::SharedBlank(b.to_string(), n));
            }
        }
    }

    let mut w = Writer {
        ns,
        props,
        out: String::new(),
    };
    w.header();
    for s in order {
        if let Term::Iri(_) = s {
            w.node(s, 1)?;
        }
    }
    w.out.push_str("</rdf:RDF>\n");
    Ok(w.out)
}

fn escape_attr(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('"', "&quot;")
}

fn escape_text(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn is_xml_local(l: &str) -> bool {
    let mut chars = l.chars();
    chars.next().is_some_and(|c| c.is_alphabetic() || c == '_')
        && chars.all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

impl<'a> Writer<'a> {
    fn header(&mut self) {
        self.out.push_str("<?xml version=\"1.0\"?>\n<!DOCTYPE rdf:RDF [\n");
        for (p, u) in self.ns.iter() {
            let _ = writeln!(self.out, "  <!ENTITY {p} \"{}\" >", escape_attr(u));
        }
        self.out.push_str("]>\n<rdf:RDF");
        for (p, _) in self.ns.iter() {
            let _ = write!(self.out, "\n    xmlns:{p}=\"&{p};\"");
        }
        let _ = write!(
            self.out,
            "\n    xml:base=\"{}\">\n",
            vocab::ROBOEARTH_NS.trim_end_matches('#')
        );
    }

    fn attr_iri(&self, iri: &Iri) -> Result<String, SerializeError> {
        match self.ns.compact(iri) {
            Some((p, l)) => Ok(format!("&{p};{}", escape_attr(l))),
            None => Err(SerializeError::Uncovered(iri.as_str().to_string())),
        }
    }

    fn qname(&self, iri: &Iri) -> Result<String, SerializeError> {
        match self.ns.compact(iri) {
            Some((p, l)) if is_xml_local(l) => Ok(format!("{p}:{l}")),
            Some(_) => Err(SerializeError::Inexpressible(format!("element name for <{}>", iri.as_str()))),
            None => Err(SerializeError::Uncovered(iri.as_str().to_string())),
        }
    }

    fn indent(&mut self, depth: usize) {
        for _ in 0..depth {
            self.out.push_str("  ");
        }
    }

    fn node(&mut self, subject: &'a Term, depth: usize) -> Result<(), SerializeError> {
        let props = self.props.get(subject).cloned().unwrap_or_default();
        let rdf_type = vocab::rdf_type();
        let types: Vec<&Term> = props.iter().filter(|(p, _)| **p == rdf_type).map(|(_, o)| *o).collect();
        let [Term::Iri(ty)] = types.as_slice() else {
            return Err(SerializeError::Untyped(subject.to_string()));
        };
        let is_class = *ty == vocab::owl_class();
        let element = if is_class {
            "owl:Class".to_string()
        } else {
            self.qname(ty)?
        };
        let about = match subject {
            Term::Iri(i) => format!(" rdf:about=\"{}\"", self.attr_iri(i)?),
            _ if is_class => return Err(SerializeError::Inexpressible(format!("anonymous class {subject}"))),
            _ => String::new(),
        };
        let rest: Vec<_> = props.iter().filter(|(p, _)| **p != rdf_type).collect();
        self.indent(depth);
        if rest.is_empty() {
            let _ = writeln!(self.out, "<{element}{about}/>");
            return Ok(());
        }
        let _ = writeln!(self.out, "<{element}{about}>");
        for (p, o) in rest {
            self.property(p, o, depth + 1, is_class)?;
        }
        self.indent(depth);
        let _ = writeln!(self.out, "</{element}>");
        Ok(())
    }

    fn property(&mut self, p: &Iri, o: &'a Term, depth: usize, in_class: bool) -> Result<(), SerializeError> {
        let in_core = |ns: &str| p.namespace() == ns;
        if *p == vocab::sub_class_of() {
            if !in_class {
                return Err(SerializeError::Inexpressible("rdfs:subClassOf on a non-class".into()));
            }
            match o {
                Term::Iri(sup) => {
                    self.indent(depth);
                    let _ = writeln!(self.out, "<rdfs:subClassOf rdf:resource=\"{}\"/>", self.attr_iri(sup)?);
                }
                Term::Blank(_) => {
                    self.indent(depth);
                    self.out.push_str("<rdfs:subClassOf>\n");
                    self.restriction(o, depth + 1)?;
                    self.indent(depth);
                    self.out.push_str("</rdfs:subClassOf>\n");
                }
                _ => return Err(SerializeError::Inexpressible(format!("rdfs:subClassOf {o}"))),
            }
            return Ok(());
        }
        let name = if *p == vocab::label() {
            "rdfs:label".to_string()
        } else if in_core(vocab::RDF_NS) || in_core(vocab::RDFS_NS) || in_core(vocab::OWL_NS) {
            return Err(SerializeError::Inexpressible(format!("property <{}>", p.as_str())));
        } else {
            self.qname(p)?
        };
        match o {
            Term::Iri(i) if *p != vocab::label() => {
                self.indent(depth);
                let _ = writeln!(self.out, "<{name} rdf:resource=\"{}\"/>", self.attr_iri(i)?);
            }
            Term::Literal { lexical, datatype } => {
                if lexical.trim() != &**lexical {
                    return Err(SerializeError::Inexpressible(format!("literal with surrounding whitespace {o}")));
                }
                self.indent(depth);
                let _ = writeln!(
                    self.out,
                    "<{name} rdf:datatype=\"{}\">{}</{name}>",
                    self.attr_iri(datatype)?,
                    escape_text(lexical)
                );
            }
            Term::Blank(_) if *p != vocab::label() => {
                self.indent(depth);
                let _ = writeln!(self.out, "<{name}>");
                self.node(o, depth + 1)?;
                self.indent(depth);
                let _ = writeln!(self.out, "</{name}>");
            }
            _ => return Err(SerializeError::Inexpressible(format!("{name} {o}"))),
        }
        Ok(())
    }

    fn restriction(&mut self, node: &'a Term, depth: usize) -> Result<(), SerializeError> {
        let props = self.props.get(node).cloned().unwrap_or_default();
        let (on, value): (Vec<_>, Vec<_>) = props.iter().partition(|(p, _)| **p == vocab::on_property());
        let (Some((_, Term::Iri(prop))), [(vp, v)]) = (on.first(), value.as_slice()) else {
            return Err(SerializeError::Inexpressible(format!("restriction {node}")));
        };
        if on.len() != 1 {
            return Err(SerializeError::Inexpressible(format!("restriction {node}")));
        }
        self.indent(depth);
        self.out.push_str("<owl:Restriction>\n");
        self.indent(depth + 1);
        let _ = writeln!(self.out, "<owl:onProperty rdf:resource=\"{}\"/>", self.attr_iri(prop)?);
        self.indent(depth + 1);
        match (vp, v) {
            (p, Term::Iri(i)) if **p == vocab::has_value() => {
                let _ = writeln!(self.out, "<owl:hasValue rdf:resource=\"{}\"/>", self.attr_iri(i)?);
            }
            (p, Term::Literal { lexical, datatype }) if **p == vocab::has_value() => {
                let _ = writeln!(
                    self.out,
                    "<owl:hasValue rdf:datatype=\"{}\">{}</owl:hasValue>",
                    self.attr_iri(datatype)?,
                    escape_text(lexical)
                );
            }
            (p, Term::Iri(i)) if **p == vocab::some_values_from() => {
                let _ = writeln!(self.out, "<owl:someValuesFrom rdf:resource=\"{}\"/>", self.attr_iri(i)?);
            }
            _ => return Err(SerializeError::Inexpressible(format!("restriction {node}"))),
        }
        self.indent(depth);
        self.out.push_str("</owl:Restriction>\n");
        Ok(())
    }
}
