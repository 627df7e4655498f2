//! RDF/XML → triples for the closed recipe subset.
//!
//! The element-to-triple mapping is documented in the guide chapter on the
//! RDF/XML dialect; keep the two in sync.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::xml::{self, Element, XmlError};
use super::{ClassAxiom, Constraint, OwlError, OwlRestriction, ParsedOntology};
use crate::namespace::Namespaces;
use crate::term::{Iri, Term, Triple};
use crate::vocab;

/// Parse a recipe or ontology document.
pub fn parse_rdfxml(text: &str) -> Result<ParsedOntology, OwlError> {
    let doc = xml::parse(text).map_err(|e| match e {
        XmlError::Syntax {
            line,
            column,
            message,
        } => OwlError::XmlSyntax {
            line,
            column,
            message,
        },
        XmlError::UnknownEntity { name, line, column } => {
            OwlError::UnknownEntityReference { name, line, column }
        }
    })?;
    let mut p = Parser {
        text,
        prefixes: Namespaces::default()
            .iter()
            .map(|(p, u)| (p.to_string(), u.to_string()))
            .collect(),
        base: vocab::ROBOEARTH_NS.trim_end_matches('#').to_string(),
        out: ParsedOntology::default(),
        axiom_index: HashMap::new(),
        next_blank: 0,
    };
    p.document(&doc.root)?;
    check_acyclic(&p.out.triples)?;
    Ok(p.out)
}

struct Parser<'a> {
    text: &'a str,
    prefixes: BTreeMap<String, String>,
    base: String,
    out: ParsedOntology,
    axiom_index: HashMap<Iri, usize>,
    next_blank: usize,
}

/// Namespace family of an element or attribute name.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Family {
    Rdf,
    Rdfs,
    Owl,
    Other,
}

impl<'a> Parser<'a> {
    fn unsupported(&self, e: &Element, what: impl Into<String>) -> OwlError {
        let (line, column) = xml::line_col(self.text, e.pos);
        OwlError::UnsupportedConstruct {
            name: what.into(),
            line,
            column,
        }
    }

    fn qname(&self, e: &Element, name: &str) -> Result<(Iri, Family), OwlError> {
        let Some((prefix, local)) = name.split_once(':') else {
            return Err(self.unsupported(e, format!("unprefixed name `{name}`")));
        };
        let uri = self.prefixes.get(prefix).ok_or_else(|| {
            let (line, column) = xml::line_col(self.text, e.pos);
            OwlError::UnknownPrefix {
                prefix: prefix.to_string(),
                line,
                column,
            }
        })?;
        let family = match uri.as_str() {
            vocab::RDF_NS => Family::Rdf,
            vocab::RDFS_NS => Family::Rdfs,
            vocab::OWL_NS => Family::Owl,
            _ => Family::Other,
        };
        Ok((Iri::new(format!("{uri}{local}")), family))
    }

    fn element_name(&self, e: &Element) -> Result<(Iri, Family), OwlError> {
        self.qname(e, &e.name)
    }

    fn is(&self, e: &Element, family: Family, local: &str) -> Result<bool, OwlError> {
        let (iri, f) = self.element_name(e)?;
        Ok(f == family && iri.local_name() == local)
    }

    fn resolve_iri(&self, e: &Element, value: &str) -> Result<Iri, OwlError> {
        if let Some(frag) = value.strip_prefix('#') {
            Ok(Iri::new(format!("{}#{frag}", self.base)))
        } else if value.contains("://") || value.starts_with("urn:") {
            Ok(Iri::new(value))
        } else {
            Err(self.unsupported(e, format!("relative IRI `{value}`")))
        }
    }

    fn fresh_blank(&mut self) -> Term {
        let t = Term::blank(format!("b{}", self.next_blank));
        self.next_blank += 1;
        t
    }

    fn emit(&mut self, s: Term, p: Iri, o: Term) {
        self.out.triples.push(Triple {
            subject: s,
            predicate: p.into(),
            object: o,
        });
    }

    /// Attributes allowed on a node element; returns the subject IRI if named.
    fn node_subject(&self, e: &Element) -> Result<Option<Iri>, OwlError> {
        let mut subject = None;
        for (name, value) in &e.attrs {
            match name.as_str() {
                "rdf:about" => {
                    if subject.is_some() {
                        return Err(self.unsupported(e, "both rdf:about and rdf:ID"));
                    }
                    subject = Some(self.resolve_iri(e, value)?);
                }
                "rdf:ID" => {
                    if subject.is_some() {
                        return Err(self.unsupported(e, "both rdf:about and rdf:ID"));
                    }
                    subject = Some(Iri::new(format!("{}#{value}", self.base)));
                }
                other => return Err(self.unsupported(e, format!("attribute `{other}` on `{}`", e.name))),
            }
        }
        Ok(subject)
    }

    fn document(&mut self, root: &Element) -> Result<(), OwlError> {
        if root.name != "rdf:RDF" {
            return Err(self.unsupported(root, format!("root element `{}`", root.name)));
        }
        for (name, value) in &root.attrs {
            if let Some(prefix) = name.strip_prefix("xmlns:") {
                self.prefixes.insert(prefix.to_string(), value.clone());
            } else if name == "xml:base" {
                self.base = value.trim_end_matches('#').to_string();
            } else if name != "xmlns" {
                return Err(self.unsupported(root, format!("attribute `{name}` on rdf:RDF")));
            }
        }
        for child in root.elements() {
            if self.is(child, Family::Owl, "Ontology")? {
                continue;
            }
            let subject = self.node_subject(child)?;
            if subject.is_none() {
                return Err(self.unsupported(child, format!("anonymous top-level `{}`", child.name)));
            }
            self.node_element(child)?;
        }
        Ok(())
    }

    /// Any node element; returns its subject term.
    fn node_element(&mut self, e: &Element) -> Result<Term, OwlError> {
        let (iri, family) = self.element_name(e)?;
        match (family, iri.local_name()) {
            (Family::Owl, "Class") => {
                let Some(class) = self.node_subject(e)? else {
                    return Err(self.unsupported(e, "anonymous owl:Class outside an intersection"));
                };
                self.class_element(e, class.clone())?;
                Ok(class.into())
            }
            (Family::Owl, "Restriction") => self.restriction(e).map(|(t, _)| t),
            (Family::Other, _) => self.typed_node(e, iri),
            _ => Err(self.unsupported(e, e.name.clone())),
        }
    }

    fn axiom_mut(&mut self, class: &Iri) -> &mut ClassAxiom {
        let idx = *self.axiom_index.entry(class.clone()).or_insert_with(|| {
            self.out.axioms.push(ClassAxiom {
                class_iri: class.clone(),
                super_classes: Vec::new(),
                restrictions: Vec::new(),
                label: None,
            });
            self.out.axioms.len() - 1
        });
        &mut self.out.axioms[idx]
    }

    fn class_element(&mut self, e: &Element, class: Iri) -> Result<(), OwlError> {
        let subject: Term = class.clone().into();
        self.emit(subject.clone(), vocab::rdf_type(), vocab::owl_class().into());
        self.axiom_mut(&class);
        for child in e.elements() {
            let (name, family) = self.element_name(child)?;
            match (family, name.local_name()) {
                (Family::Rdfs, "subClassOf") => self.sub_class_of(child, &class)?,
                (Family::Rdfs, "label") => {
                    let lit = self.literal(child)?;
                    self.axiom_mut(&class).label = lit.literal_value().map(str::to_string);
                    self.emit(subject.clone(), vocab::label(), lit);
                }
                (Family::Owl, "Class") => {
                    if self.node_subject(child)?.is_some() {
                        return Err(self.unsupported(child, "nested named owl:Class (use rdf:resource)"));
                    }
                    self.anonymous_intersection(child, &class)?;
                }
                (Family::Owl, "intersectionOf") => self.intersection(child, &class)?,
                (Family::Other, _) => self.property(child, subject.clone(), name)?,
                _ => return Err(self.unsupported(child, child.name.clone())),
            }
        }
        Ok(())
    }

    fn sub_class_of(&mut self, e: &Element, class: &Iri) -> Result<(), OwlError> {
        let resource = self.resource_attr(e)?;
        let kids: Vec<&Element> = e.elements().collect();
        match (resource, kids.as_slice()) {
            (Some(sup), []) => {
                self.emit(class.into(), vocab::sub_class_of(), sup.clone().into());
                self.axiom_mut(class).super_classes.push(sup);
                Ok(())
            }
            (None, [only]) if self.is(only, Family::Owl, "Restriction")? => {
                self.restriction_edge(only, class)
            }
            (None, [only]) if self.is(only, Family::Owl, "Class")? => {
                if self.node_subject(only)?.is_some() {
                    return Err(self.unsupported(only, "nested named owl:Class (use rdf:resource)"));
                }
                self.anonymous_intersection(only, class)
            }
            _ => Err(self.unsupported(e, "rdfs:subClassOf needs rdf:resource or one restriction")),
        }
    }

    fn anonymous_intersection(&mut self, e: &Element, class: &Iri) -> Result<(), OwlError> {
        let kids: Vec<&Element> = e.elements().collect();
        match kids.as_slice() {
            [only] if self.is(only, Family::Owl, "intersectionOf")? => self.intersection(only, class),
            _ => Err(self.unsupported(e, "anonymous owl:Class must hold exactly one owl:intersectionOf")),
        }
    }

    /// Members of an intersection become one subClassOf edge each.
    fn intersection(&mut self, e: &Element, class: &Iri) -> Result<(), OwlError> {
        let collection = e.attrs.len() == 1 && e.attr("rdf:parseType") == Some("Collection");
        if !collection {
            return Err(self.unsupported(e, "owl:intersectionOf without rdf:parseType=\"Collection\""));
        }
        for member in e.elements() {
            if !self.is(member, Family::Owl, "Restriction")? {
                return Err(self.unsupported(member, format!("intersection member `{}`", member.name)));
            }
            self.restriction_edge(member, class)?;
        }
        Ok(())
    }

    fn restriction_edge(&mut self, e: &Element, class: &Iri) -> Result<(), OwlError> {
        // The edge precedes the restriction body so triples read top-down.
        let at = self.out.triples.len();
        let (node, restriction) = self.restriction(e)?;
        self.out.triples.insert(
            at,
            Triple {
                subject: class.into(),
                predicate: vocab::sub_class_of().into(),
                object: node,
            },
        );
        self.axiom_mut(class).restrictions.push(restriction);
        Ok(())
    }

    fn restriction(&mut self, e: &Element) -> Result<(Term, OwlRestriction), OwlError> {
        if !e.attrs.is_empty() {
            return Err(self.unsupported(e, "attributes on owl:Restriction"));
        }
        let mut on_property = None;
        let mut constraint = None;
        for child in e.elements() {
            let (name, family) = self.element_name(child)?;
            match (family, name.local_name()) {
                (Family::Owl, "onProperty") if on_property.is_none() => {
                    let p = self
                        .resource_attr(child)?
                        .ok_or_else(|| self.unsupported(child, "owl:onProperty without rdf:resource"))?;
                    on_property = Some(p);
                }
                (Family::Owl, "hasValue") if constraint.is_none() => {
                    let v = match self.resource_attr(child)? {
                        Some(iri) => Term::Iri(iri),
                        None => self.literal(child)?,
                    };
                    constraint = Some(Constraint::HasValue(v));
                }
                (Family::Owl, "someValuesFrom") if constraint.is_none() => {
                    let c = self
                        .resource_attr(child)?
                        .ok_or_else(|| self.unsupported(child, "owl:someValuesFrom without rdf:resource"))?;
                    constraint = Some(Constraint::SomeValuesFrom(c));
                }
                _ => return Err(self.unsupported(child, format!("`{}` inside owl:Restriction", child.name))),
            }
        }
        let (Some(on_property), Some(constraint)) = (on_property, constraint) else {
            return Err(self.unsupported(
                e,
                "owl:Restriction needs one owl:onProperty and one value constraint",
            ));
        };
        let node = self.fresh_blank();
        self.emit(node.clone(), vocab::on_property(), on_property.clone().into());
        match &constraint {
            Constraint::HasValue(v) => self.emit(node.clone(), vocab::has_value(), v.clone()),
            Constraint::SomeValuesFrom(c) => {
                self.emit(node.clone(), vocab::some_values_from(), c.clone().into())
            }
        }
        let id = match &node {
            Term::Blank(b) => b.to_string(),
            _ => unreachable!(),
        };
        Ok((
            node,
            OwlRestriction {
                on_property,
                constraint,
                node: id,
            },
        ))
    }

    fn typed_node(&mut self, e: &Element, class: Iri) -> Result<Term, OwlError> {
        let subject: Term = match self.node_subject(e)? {
            Some(iri) => {
                self.out.individuals.push((iri.clone(), class.clone()));
                iri.into()
            }
            None => self.fresh_blank(),
        };
        self.emit(subject.clone(), vocab::rdf_type(), class.into());
        for child in e.elements() {
            let (name, family) = self.element_name(child)?;
            match family {
                Family::Rdfs if name.local_name() == "label" => {
                    let lit = self.literal(child)?;
                    self.emit(subject.clone(), vocab::label(), lit);
                }
                Family::Other => self.property(child, subject.clone(), name)?,
                _ => return Err(self.unsupported(child, child.name.clone())),
            }
        }
        Ok(subject)
    }

    fn property(&mut self, e: &Element, subject: Term, predicate: Iri) -> Result<(), OwlError> {
        let kids: Vec<&Element> = e.elements().collect();
        if let Some(iri) = self.resource_attr(e)? {
            if !kids.is_empty() || !e.text().trim().is_empty() {
                return Err(self.unsupported(e, "rdf:resource property with content"));
            }
            self.emit(subject, predicate, iri.into());
            return Ok(());
        }
        match kids.as_slice() {
            [] => {
                let lit = self.literal(e)?;
                self.emit(subject, predicate, lit);
            }
            [node] => {
                if !e.attrs.is_empty() {
                    return Err(self.unsupported(e, "attributes on a property element with a node"));
                }
                // Reserve the referencing triple's slot ahead of the nested node's.
                let at = self.out.triples.len();
                let object = self.node_element(node)?;
                self.out.triples.insert(
                    at,
                    Triple {
                        subject,
                        predicate: predicate.into(),
                        object,
                    },
                );
            }
            _ => return Err(self.unsupported(e, "property element with several nodes")),
        }
        Ok(())
    }

    fn resource_attr(&self, e: &Element) -> Result<Option<Iri>, OwlError> {
        for (name, _) in &e.attrs {
            if !matches!(name.as_str(), "rdf:resource" | "rdf:datatype") {
                return Err(self.unsupported(e, format!("attribute `{name}` on `{}`", e.name)));
            }
        }
        match e.attr("rdf:resource") {
            Some(v) => {
                if e.attr("rdf:datatype").is_some() {
                    return Err(self.unsupported(e, "rdf:resource with rdf:datatype"));
                }
                self.resolve_iri(e, v).map(Some)
            }
            None => Ok(None),
        }
    }

    fn literal(&self, e: &Element) -> Result<Term, OwlError> {
        if e.elements().next().is_some() {
            return Err(self.unsupported(e, format!("element content in literal `{}`", e.name)));
        }
        for (name, _) in &e.attrs {
            if name != "rdf:datatype" {
                return Err(self.unsupported(e, format!("attribute `{name}` on `{}`", e.name)));
            }
        }
        let text = e.text();
        let lexical = text.trim();
        Ok(match e.attr("rdf:datatype") {
            Some(dt) => Term::typed(lexical, self.resolve_iri(e, dt)?),
            None => Term::string(lexical),
        })
    }
}

fn check_acyclic(triples: &[Triple]) -> Result<(), OwlError> {
    let sub = Term::Iri(vocab::sub_class_of());
    let mut edges: BTreeMap<&Iri, BTreeSet<&Iri>> = BTreeMap::new();
    for t in triples.iter().filter(|t| t.predicate == sub) {
        if let (Term::Iri(s), Term::Iri(o)) = (&t.subject, &t.object) {
            edges.entry(s).or_default().insert(o);
        }
    }
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Open,
        Done,
    }
    fn visit<'a>(
        n: &'a Iri,
        edges: &BTreeMap<&'a Iri, BTreeSet<&'a Iri>>,
        marks: &mut HashMap<&'a Iri, Mark>,
        path: &mut Vec<&'a Iri>,
    ) -> Option<Vec<Iri>> {
        match marks.get(n) {
            Some(Mark::Done) => return None,
            Some(Mark::Open) => {
                let start = path.iter().position(|p| *p == n).unwrap_or(0);
                return Some(path[start..].iter().map(|i| (*i).clone()).collect());
            }
            None => {}
        }
        marks.insert(n, Mark::Open);
        path.push(n);
        for next in edges.get(n).into_iter().flatten() {
            if let Some(cycle) = visit(next, edges, marks, path) {
                return Some(cycle);
            }
        }
        path.pop();
        marks.insert(n, Mark::Done);
        None
    }
    let mut marks = HashMap::new();
    for n in edges.keys() {
        if let Some(cycle) = visit(n, &edges, &mut marks, &mut Vec::new()) {
            return Err(OwlError::SubclassCycle(cycle));
        }
    }
    Ok(())
}
