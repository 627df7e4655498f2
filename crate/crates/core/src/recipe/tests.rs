use std::collections::BTreeSet;

use proptest::prelude::*;

use super::*;
use crate::fixtures;
use crate::owl;
use crate::store::Graph;
use crate::term::{Term, Triple};
use crate::twin::{load_scene, DigitalTwin};
use crate::vocab;

fn re(local: &str) -> Iri {
    vocab::roboearth(local)
}

fn base() -> Graph {
    let mut g = Graph::new();
    g.load_ntriples(fixtures::BASE_ONTOLOGY).unwrap();
    g
}

fn loft() -> DigitalTwin {
    load_scene(fixtures::LOFT_SCENE).unwrap()
}

fn golden() -> ActionRecipe {
    let parsed = owl::parse_rdfxml(fixtures::SERVE_A_DRINK).unwrap();
    owl::extract_recipe(&parsed, &re("ServeADrink"), fixtures::SERVE_A_DRINK).unwrap()
}

/// A recipe with the given subactions and orderings and nothing else.
fn bare(subs: &[&str], orderings: &[(&str, &str)]) -> ActionRecipe {
    ActionRecipe {
        root: re("Root"),
        label: None,
        subactions: subs
            .iter()
            .map(|s| SubactionSpec {
                class_iri: re(s),
                ..SubactionSpec::default()
            })
            .collect(),
        orderings: orderings.iter().map(|(a, b)| (re(a), re(b))).collect(),
        individuals: Vec::new(),
        source_text: String::new(),
        triples: Vec::new(),
    }
}

fn locals(v: &[Iri]) -> Vec<&str> {
    v.iter().map(|i| i.local_name()).collect()
}

const CHAIN: [&str; 5] = ["MoveBaseToGraspPose", "GraspObject", "OpenGripper", "MoveBaseToHandoverPose", "HandoverObject"];

#[test]
fn linearize_examples() {
    assert_eq!(locals(&linearize(&golden()).unwrap()), CHAIN);
    assert_eq!(locals(&linearize(&bare(&["C", "A", "B"], &[])).unwrap()), ["A", "B", "C"]);
    assert_eq!(
        linearize(&bare(&["A", "B"], &[("A", "B"), ("B", "A")])).unwrap_err(),
        OrderError::CyclicOrdering(vec![re("A"), re("B")])
    );
}

#[test]
fn cycle_is_reported_in_order() {
    let r = bare(&["A", "B", "C", "D"], &[("D", "A"), ("A", "C"), ("C", "B"), ("B", "A")]);
    assert_eq!(linearize(&r).unwrap_err(), OrderError::CyclicOrdering(vec![re("A"), re("C"), re("B")]));
}

#[test]
fn next_and_first_action_over_asserted_golden() {
    let mut g = base();
    assert_recipe(&mut g, &golden()).unwrap();
    assert_eq!(next_action(&re("GraspObject"), &g).unwrap(), Some(re("OpenGripper")));
    assert_eq!(next_action(&re("HandoverObject"), &g).unwrap(), None);
    assert_eq!(first_action(&re("ServeADrink"), &g).unwrap(), Some(re("MoveBaseToGraspPose")));

    let mut chain = vec![first_action(&re("ServeADrink"), &g).unwrap().unwrap()];
    while let Some(n) = next_action(chain.last().unwrap(), &g).unwrap() {
        chain.push(n);
    }
    assert_eq!(chain, linearize(&golden()).unwrap());
}

fn ordering_graph(pairs: &[(&str, &str)]) -> Graph {
    let mut g = Graph::new();
    for (i, (a, b)) in pairs.iter().enumerate() {
        let n = Term::blank(format!("o{i}"));
        g.assert_triple(Triple::new(n.clone(), vocab::occurs_before(), re(a)).unwrap()).unwrap();
        g.assert_triple(Triple::new(n, vocab::occurs_after(), re(b)).unwrap()).unwrap();
    }
    g
}

#[test]
fn branching_successor_is_ambiguous() {
    let g = ordering_graph(&[("A", "C"), ("A", "B")]);
    assert_eq!(
        next_action(&re("A"), &g).unwrap_err(),
        OrderError::AmbiguousSuccessor {
            current: re("A"),
            candidates: vec![re("B"), re("C")]
        }
    );
}

#[test]
fn first_action_edge_cases() {
    let g = Graph::new();
    assert_eq!(first_action(&re("Nothing"), &g).unwrap(), None);

    let mut g = base();
    let mut two_starts = golden();
    two_starts.orderings.remove(1);
    two_starts.triples.retain(|t| {
        // Drop the GraspObject -> OpenGripper ordering node entirely.
        !(t.predicate == Term::Iri(vocab::occurs_after()) && t.object == Term::Iri(re("OpenGripper")))
    });
    assert_recipe(&mut g, &two_starts).unwrap();
    assert_eq!(
        first_action(&re("ServeADrink"), &g).unwrap_err(),
        OrderError::AmbiguousStart(vec![re("MoveBaseToGraspPose"), re("OpenGripper")])
    );
}

#[test]
fn golden_validates_usable() {
    let report = validate(&golden(), &base(), &loft());
    assert_eq!(report, ValidationReport { usable: true, ..ValidationReport::default() });
}

#[test]
fn unknown_individual_is_abox() {
    let text = fixtures::SERVE_A_DRINK.replace("huawei_mug_1", "unicorn_1");
    let (report, recipe) = validate_text(&text, &base(), &loft());
    assert!(recipe.is_some());
    assert!(!report.usable);
    assert_eq!(report.abox_violations, [re("unicorn_1")]);
    assert!(report.tbox_violations.is_empty());
    assert!(report.structural_violations.is_empty());
}

#[test]
fn unknown_superclass_is_tbox() {
    let text = fixtures::SERVE_A_DRINK.replace("&roboearth;ServingFoodOrDrink", "&knowrob;TeleportObject");
    let (report, _) = validate_text(&text, &base(), &loft());
    assert!(!report.usable);
    assert_eq!(report.tbox_violations, [vocab::knowrob("TeleportObject")]);
    assert!(report.abox_violations.is_empty());
}

#[test]
fn robot_is_a_valid_individual() {
    let twin = loft();
    assert!(twin.contains(&re("robot_1")));
    let text = fixtures::SERVE_A_DRINK.replace("&roboearth;robot_1", "&roboearth;robot_2");
    let (report, _) = validate_text(&text, &base(), &twin);
    assert_eq!(report.abox_violations, [re("robot_2")]);
}

#[test]
fn structural_problems() {
    let (report, recipe) = validate_text("<rdf:RDF", &base(), &loft());
    assert!(recipe.is_none());
    assert_eq!(report.structural_violations.len(), 1);
    assert!(!report.usable);

    let mut r = golden();
    r.orderings.push((re("HandoverObject"), re("MoveBaseToGraspPose")));
    r.orderings.push((re("GraspObject"), re("Teleport")));
    let report = validate(&r, &base(), &loft());
    let s = report.structural_violations.join("\n");
    assert!(s.contains("Teleport is not a subaction"), "{s}");
    assert!(s.contains("cycle"), "{s}");
    assert!(s.contains("several successors"), "{s}");
}

#[test]
fn report_renders_one_line_per_field() {
    let text = fixtures::SERVE_A_DRINK.replace("huawei_mug_1", "unicorn_1");
    let g = base();
    let (report, _) = validate_text(&text, &g, &loft());
    assert_eq!(
        report.render(g.namespaces()),
        "usable: false\ntbox: []\nabox: [roboearth:unicorn_1]\nstructural: []\n"
    );
}

#[test]
fn asserting_replaces_and_retracting_removes() {
    let mut g = base();
    let before = g.len();
    let added = assert_recipe(&mut g, &golden()).unwrap();
    assert!(added > 0);
    // Same recipe again: replaced, same size, fresh blanks.
    assert_recipe(&mut g, &golden()).unwrap();
    assert_eq!(g.len(), before + added);
    // Individuals' type triples stay behind after retraction.
    let removed = retract_recipe(&mut g, &re("ServeADrink"));
    assert_eq!(g.len() + removed, before + added);
    assert_eq!(first_action(&re("ServeADrink"), &g).unwrap(), None);
    assert!(g.contains(&Triple::iris(&re("plate_1"), &vocab::rdf_type(), &vocab::knowrob("Plate"))));
}

#[test]
fn recipe_sharing_a_subaction_replaces_the_older_one() {
    let mut g = base();
    assert_recipe(&mut g, &golden()).unwrap();
    let text = fixtures::SERVE_A_DRINK.replace("ServeADrink", "ServeAnotherDrink");
    let parsed = owl::parse_rdfxml(&text).unwrap();
    let other = owl::extract_recipe(&parsed, &re("ServeAnotherDrink"), &text).unwrap();
    assert_recipe(&mut g, &other).unwrap();
    assert_eq!(first_action(&re("ServeADrink"), &g).unwrap(), None);
    assert_eq!(first_action(&re("ServeAnotherDrink"), &g).unwrap(), Some(re("MoveBaseToGraspPose")));
    assert_eq!(next_action(&re("GraspObject"), &g).unwrap(), Some(re("OpenGripper")));
}

/// Random DAGs: edges only go from lower to higher node numbers before
/// the names are shuffled.
fn arb_dag() -> impl Strategy<Value = (Vec<String>, Vec<(String, String)>)> {
    (1..20usize)
        .prop_flat_map(|n| {
            let names = Just((0..n).map(|i| format!("N{i:02}")).collect::<Vec<_>>()).prop_shuffle();
            let edges = prop::collection::vec((0..n, 0..n), 0..40);
            (names, edges)
        })
        .prop_map(|(names, edges)| {
            let edges = edges
                .into_iter()
                .filter(|(a, b)| a < b)
                .map(|(a, b)| (names[a].clone(), names[b].clone()))
                .collect();
            (names, edges)
        })
}

proptest! {
    #[test]
    fn linearization_respects_every_ordering((names, edges) in arb_dag()) {
        let subs: Vec<&str> = names.iter().map(String::as_str).collect();
        let pairs: Vec<(&str, &str)> = edges.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let order = linearize(&bare(&subs, &pairs)).unwrap();
        prop_assert_eq!(order.len(), names.len());
        let unique: BTreeSet<&Iri> = order.iter().collect();
        prop_assert_eq!(unique.len(), names.len());
        let index = |n: &str| order.iter().position(|i| i.local_name() == n).unwrap();
        for (a, b) in &pairs {
            prop_assert!(index(a) < index(b));
        }
    }

    #[test]
    fn folding_next_action_rebuilds_a_chain(names in Just((0..8).map(|i| format!("S{i}")).collect::<Vec<_>>()).prop_shuffle(), len in 1usize..8) {
        let chain = &names[..len];
        let pairs: Vec<(&str, &str)> = chain.windows(2).map(|w| (w[0].as_str(), w[1].as_str())).collect();
        let subs: Vec<&str> = chain.iter().map(String::as_str).collect();
        let g = ordering_graph(&pairs);
        let mut walked = vec![re(&chain[0])];
        while let Some(n) = next_action(walked.last().unwrap(), &g).unwrap() {
            walked.push(n);
        }
        prop_assert_eq!(walked, linearize(&bare(&subs, &pairs)).unwrap());
    }
}
