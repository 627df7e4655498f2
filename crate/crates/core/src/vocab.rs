//! Well-known namespaces and the terms the engine interprets.

use crate::term::Iri;

pub const RDF_NS: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#";
pub const RDFS_NS: &str = "http://www.w3.org/2000/01/rdf-schema#";
pub const OWL_NS: &str = "http://www.w3.org/2002/07/owl#";
pub const XSD_NS: &str = "http://www.w3.org/2001/XMLSchema#";
pub const KNOWROB_NS: &str = "http://knowrob.org/kb/knowrob.owl#";
pub const ROBOEARTH_NS: &str = "http://www.roboearth.org/kb/roboearth.owl#";
pub const SRDL2_NS: &str = "http://knowrob.org/kb/srdl2-cap.owl#";

/// Prefixes registered in every fresh namespace table.
pub const DEFAULT_PREFIXES: [(&str, &str); 7] = [
    ("knowrob", KNOWROB_NS),
    ("owl", OWL_NS),
    ("rdf", RDF_NS),
    ("rdfs", RDFS_NS),
    ("roboearth", ROBOEARTH_NS),
    ("srdl2", SRDL2_NS),
    ("xsd", XSD_NS),
];

pub fn rdf(local: &str) -> Iri {
    Iri::new(format!("{RDF_NS}{local}"))
}

pub fn rdfs(local: &str) -> Iri {
    Iri::new(format!("{RDFS_NS}{local}"))
}

pub fn owl(local: &str) -> Iri {
    Iri::new(format!("{OWL_NS}{local}"))
}

pub fn xsd(local: &str) -> Iri {
    Iri::new(format!("{XSD_NS}{local}"))
}

pub fn knowrob(local: &str) -> Iri {
    Iri::new(format!("{KNOWROB_NS}{local}"))
}

pub fn roboearth(local: &str) -> Iri {
    Iri::new(format!("{ROBOEARTH_NS}{local}"))
}

pub fn srdl2(local: &str) -> Iri {
    Iri::new(format!("{SRDL2_NS}{local}"))
}

// Interpreted predicates and classes.

pub fn rdf_type() -> Iri {
    rdf("type")
}

pub fn sub_class_of() -> Iri {
    rdfs("subClassOf")
}

pub fn label() -> Iri {
    rdfs("label")
}

pub fn owl_class() -> Iri {
    owl("Class")
}

pub fn on_property() -> Iri {
    owl("onProperty")
}

pub fn has_value() -> Iri {
    owl("hasValue")
}

pub fn some_values_from() -> Iri {
    owl("someValuesFrom")
}

pub fn sub_action() -> Iri {
    knowrob("subAction")
}

pub fn performed_by() -> Iri {
    knowrob("performedBy")
}

pub fn object_acted_on() -> Iri {
    knowrob("objectActedOn")
}

pub fn to_location() -> Iri {
    knowrob("toLocation")
}

pub fn location() -> Iri {
    knowrob("location")
}

pub fn occurs_before() -> Iri {
    knowrob("occursBeforeInOrdering")
}

pub fn occurs_after() -> Iri {
    knowrob("occursAfterInOrdering")
}

pub fn ordering_constraints() -> Iri {
    knowrob("orderingConstraints")
}

pub fn partial_ordering() -> Iri {
    knowrob("PartialOrdering-Strict")
}

pub fn occurs_at() -> Iri {
    knowrob("occursAt")
}

pub fn perception() -> Iri {
    knowrob("Perception")
}

pub fn has_capability() -> Iri {
    srdl2("hasCapability")
}

pub fn requires_capability() -> Iri {
    srdl2("requiresCapability")
}

pub fn api_function() -> Iri {
    roboearth("apiFunction")
}

pub fn api_parameter() -> Iri {
    roboearth("apiParameter")
}

/// Core RDF/RDFS/OWL/XSD terms that count as known vocabulary without being
/// declared in the base graph.
pub fn is_core_term(iri: &Iri) -> bool {
    const CORE: &[(&str, &[&str])] = &[
        (RDF_NS, &["type", "Property", "List", "first", "rest", "nil"]),
        (
            RDFS_NS,
            &["subClassOf", "subPropertyOf", "label", "comment", "Class", "Resource", "Literal"],
        ),
        (
            OWL_NS,
            &[
                "Class",
                "Thing",
                "Nothing",
                "Restriction",
                "onProperty",
                "hasValue",
                "someValuesFrom",
                "intersectionOf",
                "ObjectProperty",
                "DatatypeProperty",
                "NamedIndividual",
                "Ontology",
            ],
        ),
        (XSD_NS, &["string", "integer", "boolean", "decimal", "double", "dateTime"]),
    ];
    let (ns, local) = (iri.namespace(), iri.local_name());
    CORE.iter()
        .any(|(n, terms)| *n == ns && terms.contains(&local))
}
