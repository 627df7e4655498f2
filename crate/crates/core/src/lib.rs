//! A knowledge-graph engine for robot action recipes.
//!
//! Recipes are OWL classes written in a small RDF/XML dialect. They are
//! parsed into an indexed triple store, checked against a base vocabulary
//! and a digital twin of the scene, and executed step by step by a control
//! loop that answers its questions with Prolog-style graph queries.

pub mod engine;
pub mod fixtures;
pub mod generator;
pub mod namespace;
pub mod owl;
pub mod query;
pub mod rce;
pub mod recipe;
pub mod store;
pub mod term;
pub mod twin;
pub mod vocab;

/// The guide's chapters, compiled as doc-tests so their snippets stay
/// in sync with the code.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/triple-store.md")]
    mod triple_store {}
    #[doc = include_str!("../../../book/src/recipes.md")]
    mod recipes {}
    #[doc = include_str!("../../../book/src/queries.md")]
    mod queries {}
    #[doc = include_str!("../../../book/src/digital-twin.md")]
    mod digital_twin {}
    #[doc = include_str!("../../../book/src/validation.md")]
    mod validation {}
    #[doc = include_str!("../../../book/src/generation.md")]
    mod generation {}
    #[doc = include_str!("../../../book/src/execution.md")]
    mod execution {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
