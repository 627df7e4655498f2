use std::collections::BTreeMap;

use proptest::prelude::*;

use super::*;
use crate::fixtures;
use crate::namespace::Namespaces;
use crate::query::{parse_query, solve};
use crate::recipe::linearize;
use crate::store::Graph;
use crate::vocab;

const HEADER: &str = r#"<?xml version="1.0"?>
<!DOCTYPE rdf:RDF [
  <!ENTITY knowrob "http://knowrob.org/kb/knowrob.owl#" >
  <!ENTITY roboearth "http://www.roboearth.org/kb/roboearth.owl#" >
  <!ENTITY xsd "http://www.w3.org/2001/XMLSchema#" >
]>
<rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#"
    xmlns:rdfs="http://www.w3.org/2000/01/rdf-schema#"
    xmlns:owl="http://www.w3.org/2002/07/owl#"
    xmlns:knowrob="&knowrob;"
    xmlns:roboearth="&roboearth;">
"#;

fn doc(body: &str) -> String {
    format!("{HEADER}{body}\n</rdf:RDF>\n")
}

fn re(local: &str) -> Iri {
    vocab::roboearth(local)
}

/// Blank nodes in recipe documents form trees hanging off named subjects, so
/// rendering each blank as the sorted list of its properties gives a
/// canonical form that ignores blank labels.
fn canonical(triples: &[Triple]) -> Vec<String> {
    let mut props: BTreeMap<&Term, Vec<&Triple>> = BTreeMap::new();
    for t in triples {
        props.entry(&t.subject).or_default().push(t);
    }
    fn render(t: &Term, props: &BTreeMap<&Term, Vec<&Triple>>) -> String {
        match t {
            Term::Blank(_) => {
                let mut inner: Vec<String> = props
                    .get(t)
                    .into_iter()
                    .flatten()
                    .map(|u| format!("{} {}", u.predicate, render(&u.object, props)))
                    .collect();
                inner.sort();
                inner.dedup();
                format!("[{}]", inner.join("; "))
            }
            other => other.to_string(),
        }
    }
    let mut out: Vec<String> = triples
        .iter()
        .filter(|t| !matches!(t.subject, Term::Blank(_)))
        .map(|t| format!("{} {} {}", t.subject, t.predicate, render(&t.object, &props)))
        .collect();
    out.sort();
    out.dedup();
    out
}

#[test]
fn golden_listing_individuals_and_subactions() {
    let parsed = parse_rdfxml(fixtures::SERVE_A_DRINK).unwrap();
    assert_eq!(
        parsed.individuals,
        [
            (re("huawei_mug_1"), vocab::knowrob("DrinkingBottle")),
            (re("plate_1"), vocab::knowrob("Plate")),
            (re("table_1"), vocab::knowrob("Bed-PieceOfFurniture")),
        ]
    );
    let root = parsed.axiom(&re("ServeADrink")).unwrap();
    let subs: Vec<&str> = root
        .restrictions
        .iter()
        .filter(|r| r.on_property == vocab::sub_action())
        .map(|r| match &r.constraint {
            Constraint::SomeValuesFrom(c) => c.local_name(),
            c => panic!("{c:?}"),
        })
        .collect();
    assert_eq!(
        subs,
        ["MoveBaseToGraspPose", "GraspObject", "OpenGripper", "MoveBaseToHandoverPose", "HandoverObject"]
    );
    assert_eq!(root.super_classes, [re("ServingFoodOrDrink")]);
    assert_eq!(root.label.as_deref(), Some("serve a drink"));
}

#[test]
fn golden_extracts_chain() {
    let parsed = parse_rdfxml(fixtures::SERVE_A_DRINK).unwrap();
    let root = find_recipe_root(&parsed).unwrap();
    assert_eq!(root, re("ServeADrink"));
    let r = extract_recipe(&parsed, &root, fixtures::SERVE_A_DRINK).unwrap();
    assert_eq!(r.subactions.len(), 5);
    assert_eq!(r.orderings.len(), 4);
    let order = linearize(&r).unwrap();
    let order: Vec<&str> = order.iter().map(|i| i.local_name()).collect();
    assert_eq!(
        order,
        ["MoveBaseToGraspPose", "GraspObject", "OpenGripper", "MoveBaseToHandoverPose", "HandoverObject"]
    );
    let grasp = r.subaction(&re("GraspObject")).unwrap();
    assert_eq!(grasp.object_acted_on, Some(re("huawei_mug_1")));
    assert_eq!(grasp.performed_by, Some(re("robot_1")));
    assert_eq!(grasp.super_classes, [vocab::knowrob("GraspingSomething")]);
    let first = r.subaction(&re("MoveBaseToGraspPose")).unwrap();
    assert_eq!(first.to_location, Some(re("table_1")));
}

#[test]
fn empty_ontology() {
    let parsed = parse_rdfxml(&doc("")).unwrap();
    assert_eq!(parsed, ParsedOntology::default());
    assert_eq!(find_recipe_root(&parsed), None);
}

#[test]
fn one_class_one_superclass_is_two_triples() {
    let parsed = parse_rdfxml(&doc(
        r#"<owl:Class rdf:about="&roboearth;C"><rdfs:subClassOf rdf:resource="&knowrob;Action"/></owl:Class>"#,
    ))
    .unwrap();
    assert_eq!(
        parsed.triples,
        [
            Triple::iris(&re("C"), &vocab::rdf_type(), &vocab::owl_class()),
            Triple::iris(&re("C"), &vocab::sub_class_of(), &vocab::knowrob("Action")),
        ]
    );
    assert!(parsed.individuals.is_empty());
}

#[test]
fn intersection_members_become_separate_edges() {
    let parsed = parse_rdfxml(fixtures::SERVE_A_DRINK).unwrap();
    let root = Term::Iri(re("ServeADrink"));
    let sub = Term::Iri(vocab::sub_class_of());
    let blank_supers = parsed
        .triples
        .iter()
        .filter(|t| t.subject == root && t.predicate == sub && matches!(t.object, Term::Blank(_)))
        .count();
    assert_eq!(blank_supers, 5);
}

#[test]
fn rdf_id_and_xml_base() {
    let text = doc(r#"<owl:Class rdf:ID="Local"/>"#).replace(
        "xmlns:roboearth=\"&roboearth;\">",
        "xmlns:roboearth=\"&roboearth;\" xml:base=\"http://example.org/kb\">",
    );
    let parsed = parse_rdfxml(&text).unwrap();
    assert_eq!(parsed.axioms[0].class_iri, Iri::new("http://example.org/kb#Local"));
}

#[test]
fn ordering_pairs_match_next_action_query() {
    let parsed = parse_rdfxml(fixtures::SERVE_A_DRINK).unwrap();
    let root = find_recipe_root(&parsed).unwrap();
    let r = extract_recipe(&parsed, &root, "").unwrap();
    let mut g = Graph::new();
    g.assert_document(&parsed.triples).unwrap();
    let q = parse_query(
        "rdf(Order, knowrob:'occursBeforeInOrdering', OldTask), rdf(Order, knowrob:'occursAfterInOrdering', Task)",
        g.namespaces(),
    )
    .unwrap();
    let mut from_query: Vec<(Iri, Iri)> = solve(&q, &g)
        .collect_distinct()
        .unwrap()
        .into_iter()
        .map(|b| {
            let iri = |v| b.get(v).and_then(Term::as_iri).unwrap().clone();
            (iri("OldTask"), iri("Task"))
        })
        .collect();
    from_query.sort();
    let mut extracted = r.orderings.clone();
    extracted.sort();
    assert_eq!(from_query, extracted);
}

#[test]
fn golden_round_trip() {
    let parsed = parse_rdfxml(fixtures::SERVE_A_DRINK).unwrap();
    let text = serialize_rdfxml(&parsed.triples, &Namespaces::default()).unwrap();
    let again = parse_rdfxml(&text).unwrap();
    assert_eq!(canonical(&again.triples), canonical(&parsed.triples));
    assert_eq!(again.individuals, parsed.individuals);
    // Serializing twice is stable.
    assert_eq!(serialize_rdfxml(&again.triples, &Namespaces::default()).unwrap(), text);
}

#[test]
fn literal_has_value_round_trips() {
    let text = doc(
        r#"<owl:Class rdf:about="&roboearth;C">
  <rdfs:subClassOf>
    <owl:Restriction>
      <owl:onProperty rdf:resource="&roboearth;apiFunction"/>
      <owl:hasValue rdf:datatype="&xsd;string">grasp</owl:hasValue>
    </owl:Restriction>
  </rdfs:subClassOf>
</owl:Class>"#,
    );
    let parsed = parse_rdfxml(&text).unwrap();
    assert_eq!(
        parsed.axioms[0].restrictions[0].constraint,
        Constraint::HasValue(Term::string("grasp"))
    );
    let back = parse_rdfxml(&serialize_rdfxml(&parsed.triples, &Namespaces::default()).unwrap()).unwrap();
    assert_eq!(canonical(&back.triples), canonical(&parsed.triples));
}

#[test]
fn xml_and_entity_errors() {
    match parse_rdfxml(&doc("<owl:Class rdf:about=\"&nowhere;C\"/>")).unwrap_err() {
        OwlError::UnknownEntityReference { name, .. } => assert_eq!(name, "nowhere"),
        e => panic!("{e:?}"),
    }
    match parse_rdfxml("<rdf:RDF>\n<owl:Class>\n</rdf:RDF>").unwrap_err() {
        OwlError::XmlSyntax { line, .. } => assert_eq!(line, 3),
        e => panic!("{e:?}"),
    }
    match parse_rdfxml(&doc("<zzz:Thing rdf:about=\"&roboearth;x\"/>")).unwrap_err() {
        OwlError::UnknownPrefix { prefix, .. } => assert_eq!(prefix, "zzz"),
        e => panic!("{e:?}"),
    }
}

#[test]
fn unsupported_constructs_are_rejected() {
    let cases = [
        r#"<owl:Class rdf:about="&roboearth;C"><owl:unionOf rdf:parseType="Collection"/></owl:Class>"#,
        r#"<owl:Class rdf:about="&roboearth;C"><rdfs:subClassOf><owl:Restriction><owl:onProperty rdf:resource="&knowrob;subAction"/><owl:allValuesFrom rdf:resource="&roboearth;D"/></owl:Restriction></rdfs:subClassOf></owl:Class>"#,
        r#"<owl:Class rdf:about="&roboearth;C"><owl:equivalentClass rdf:resource="&roboearth;D"/></owl:Class>"#,
        r#"<owl:ObjectProperty rdf:about="&roboearth;p"/>"#,
        r#"<rdf:Description rdf:about="&roboearth;x"/>"#,
        r#"<owl:Class/>"#,
        r#"<knowrob:Cup rdf:about="&roboearth;x" rdf:nodeID="n"/>"#,
        r#"<knowrob:Cup rdf:about="relative"/>"#,
    ];
    for body in cases {
        let err = parse_rdfxml(&doc(body)).unwrap_err();
        assert!(matches!(err, OwlError::UnsupportedConstruct { .. }), "{body}: {err:?}");
    }
}

#[test]
fn subclass_cycle_is_rejected() {
    let err = parse_rdfxml(&doc(
        r#"<owl:Class rdf:about="&roboearth;A"><rdfs:subClassOf rdf:resource="&roboearth;B"/></owl:Class>
<owl:Class rdf:about="&roboearth;B"><rdfs:subClassOf rdf:resource="&roboearth;A"/></owl:Class>"#,
    ))
    .unwrap_err();
    match err {
        OwlError::SubclassCycle(c) => assert_eq!(c.len(), 2),
        e => panic!("{e:?}"),
    }
}

#[test]
fn extract_errors() {
    let parsed = parse_rdfxml(&doc(r#"<owl:Class rdf:about="&roboearth;C"/>"#)).unwrap();
    assert_eq!(
        extract_recipe(&parsed, &re("Missing"), "").unwrap_err(),
        ExtractError::RootNotFound(re("Missing"))
    );
    assert_eq!(
        extract_recipe(&parsed, &re("C"), "").unwrap_err(),
        ExtractError::NoSubactions(re("C"))
    );
}

#[test]
fn single_subaction_recipe() {
    let parsed = parse_rdfxml(&doc(
        r#"<owl:Class rdf:about="&roboearth;Solo">
  <rdfs:subClassOf><owl:Restriction>
    <owl:onProperty rdf:resource="&knowrob;subAction"/>
    <owl:someValuesFrom rdf:resource="&roboearth;Only"/>
  </owl:Restriction></rdfs:subClassOf>
</owl:Class>"#,
    ))
    .unwrap();
    let r = extract_recipe(&parsed, &re("Solo"), "").unwrap();
    assert_eq!(linearize(&r).unwrap(), [re("Only")]);
}

#[test]
fn serializer_rejects_inexpressible_graphs() {
    let ns = Namespaces::default();
    let b = Term::blank("shared");
    let shared = [
        Triple::iris(&re("A"), &vocab::rdf_type(), &vocab::owl_class()),
        Triple::iris(&re("B"), &vocab::rdf_type(), &vocab::owl_class()),
        Triple::new(re("A"), vocab::sub_class_of(), b.clone()).unwrap(),
        Triple::new(re("B"), vocab::sub_class_of(), b.clone()).unwrap(),
        Triple::new(b, vocab::on_property(), vocab::sub_action()).unwrap(),
    ];
    assert!(matches!(serialize_rdfxml(&shared, &ns), Err(SerializeError::SharedBlank(_, 2))));
    let untyped = [Triple::iris(&re("x"), &vocab::location(), &re("y"))];
    assert!(matches!(serialize_rdfxml(&untyped, &ns), Err(SerializeError::Untyped(_))));
    let uncovered = [Triple::iris(&Iri::new("http://elsewhere.org/x"), &vocab::rdf_type(), &vocab::owl_class())];
    assert!(matches!(serialize_rdfxml(&uncovered, &ns), Err(SerializeError::Uncovered(_))));
}

/// Random recipe-shaped documents: named classes with superclasses and
/// restrictions, typed individuals with plain properties.
fn arb_document() -> impl Strategy<Value = Vec<Triple>> {
    let name = prop::sample::select(vec!["A", "B", "C", "D", "E", "F"]);
    let class = (name.clone(), prop::collection::vec(name.clone(), 0..3), prop::collection::vec((0..4usize, name.clone(), any::<bool>()), 0..4));
    let individual = (name.clone(), name.clone(), prop::option::of(name.clone()), prop::option::of("[a-z]{1,6}"));
    (prop::collection::vec(class, 0..4), prop::collection::vec(individual, 0..4)).prop_map(|(classes, inds)| {
        let props = [vocab::sub_action(), vocab::performed_by(), vocab::object_acted_on(), vocab::to_location()];
        let mut out = Vec::new();
        let mut seen = std::collections::BTreeSet::new();
        let mut n = 0;
        for (c, supers, restrictions) in classes {
            let c = re(&format!("Class{c}"));
            if !seen.insert(c.clone()) {
                continue;
            }
            out.push(Triple::iris(&c, &vocab::rdf_type(), &vocab::owl_class()));
            for s in supers {
                out.push(Triple::iris(&c, &vocab::sub_class_of(), &re(&format!("Super{s}"))));
            }
            for (p, v, some) in restrictions {
                let node = Term::blank(format!("r{n}"));
                n += 1;
                out.push(Triple::new(c.clone(), vocab::sub_class_of(), node.clone()).unwrap());
                out.push(Triple::new(node.clone(), vocab::on_property(), props[p].clone()).unwrap());
                let value = if some { vocab::some_values_from() } else { vocab::has_value() };
                out.push(Triple::new(node, value, re(&format!("v{v}"))).unwrap());
            }
        }
        for (i, ty, loc, label) in inds {
            let i = re(&format!("ind{i}"));
            if !seen.insert(i.clone()) {
                continue;
            }
            out.push(Triple::iris(&i, &vocab::rdf_type(), &vocab::knowrob(&format!("Type{ty}"))));
            if let Some(l) = loc {
                out.push(Triple::iris(&i, &vocab::location(), &re(&format!("place{l}"))));
            }
            if let Some(l) = label {
                out.push(Triple::new(i, vocab::label(), Term::string(l)).unwrap());
            }
        }
        out
    })
}

proptest! {
    #[test]
    fn serialize_then_parse_is_isomorphic(triples in arb_document()) {
        let text = serialize_rdfxml(&triples, &Namespaces::default()).unwrap();
        let parsed = parse_rdfxml(&text).unwrap();
        prop_assert_eq!(canonical(&parsed.triples), canonical(&triples));
    }
}
