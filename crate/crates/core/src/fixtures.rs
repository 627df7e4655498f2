//! The bundled base ontology, scenes and golden recipe.
//!
//! The loft scene is the apartment the serving and cleaning scenarios run
//! in; the kitchen scene backs the cup-to-sink pick-and-place example.

use crate::store::Graph;
use crate::twin::{load_scene, DigitalTwin};

pub const BASE_ONTOLOGY: &str = include_str!("../data/base_ontology.nt");
pub const LOFT_SCENE: &str = include_str!("../data/loft.toml");
pub const KITCHEN_SCENE: &str = include_str!("../data/kitchen.toml");
pub const SERVE_A_DRINK: &str = include_str!("../data/serve_a_drink.owl");
/// Generator preamble with an `{action}` placeholder.
pub const PROMPT_TEMPLATE: &str = include_str!("../data/prompt_template.txt");
/// `scene | prompt` lines, see [`prompt_corpus`].
pub const PROMPTS: &str = include_str!("../data/prompts.txt");

/// The four prompts of the serving and cleaning scenarios, all over the loft.
pub const PAPER_PROMPTS: [&str; 4] = [
    "Serve me a drink",
    "Serve me the red small fruit",
    "Perceive objects on the dining table",
    "Clean the dining table",
];

/// A graph holding only the base ontology.
pub fn base_graph() -> Graph {
    let mut g = Graph::new();
    g.load_ntriples(BASE_ONTOLOGY).expect("bundled base ontology loads");
    g
}

pub fn loft() -> DigitalTwin {
    load_scene(LOFT_SCENE).expect("bundled loft scene loads")
}

pub fn kitchen() -> DigitalTwin {
    load_scene(KITCHEN_SCENE).expect("bundled kitchen scene loads")
}

/// A bundled scene by name (`loft` or `kitchen`).
pub fn scene(name: &str) -> Option<DigitalTwin> {
    match name {
        "loft" => Some(loft()),
        "kitchen" => Some(kitchen()),
        _ => None,
    }
}

/// `(scene, prompt)` pairs of the shipped prompt corpus.
pub fn prompt_corpus() -> Vec<(&'static str, &'static str)> {
    PROMPTS
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .filter_map(|l| l.split_once('|'))
        .map(|(s, p)| (s.trim(), p.trim()))
        .collect()
}
