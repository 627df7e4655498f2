//! Lexical retrieval over scene objects.

use std::collections::BTreeSet;

use super::{DigitalTwin, SceneObject};
use crate::term::Iri;

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalContext {
    /// Descending score, ties by IRI.
    pub ranked: Vec<(Iri, f64)>,
    pub prompt_tokens: Vec<String>,
}

impl RetrievalContext {
    pub fn top(&self) -> Option<&Iri> {
        self.ranked.first().map(|(i, _)| i)
    }
}

/// Scores one object against the tokenized prompt. Zero means irrelevant.
/// An embedding-based scorer can be plugged in here.
pub trait Scorer {
    fn score(&self, prompt_tokens: &[String], object: &SceneObject) -> f64;
}

/// Counts prompt tokens found among the object's descriptors, label words
/// and type-name words.
#[derive(Debug, Clone, Copy, Default)]
pub struct LexicalScorer;

impl Scorer for LexicalScorer {
    fn score(&self, prompt_tokens: &[String], object: &SceneObject) -> f64 {
        let mut vocab: BTreeSet<String> = object.descriptors.iter().cloned().collect();
        vocab.extend(tokenize(&object.label));
        vocab.extend(type_tokens(object.type_iri.local_name()));
        let prompt: BTreeSet<&String> = prompt_tokens.iter().collect();
        prompt.iter().filter(|t| vocab.contains(**t)).count() as f64
    }
}

/// Lowercase and split on anything that is not a letter or digit.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
        .collect()
}

/// `DrinkingBottle` → drinking, bottle; `Bed-PieceOfFurniture` → bed, piece, of, furniture.
pub(crate) fn type_tokens(local: &str) -> Vec<String> {
    let mut out = Vec::new();
    for part in local.split(|c: char| !c.is_alphanumeric()) {
        let mut word = String::new();
        let mut prev_lower = false;
        for c in part.chars() {
            if c.is_uppercase() && prev_lower && !word.is_empty() {
                out.push(std::mem::take(&mut word).to_lowercase());
            }
            prev_lower = c.is_lowercase() || c.is_ascii_digit();
            word.push(c);
        }
        if !word.is_empty() {
            out.push(word.to_lowercase());
        }
    }
    out
}

pub fn retrieve(twin: &DigitalTwin, prompt: &str, k: usize) -> RetrievalContext {
    retrieve_with(&LexicalScorer, twin, prompt, k)
}

pub fn retrieve_with(scorer: &dyn Scorer, twin: &DigitalTwin, prompt: &str, k: usize) -> RetrievalContext {
    assert!(k >= 1, "k must be positive");
    let prompt_tokens = tokenize(prompt);
    let mut ranked: Vec<(Iri, f64)> = twin
        .objects
        .iter()
        .map(|o| (o.iri.clone(), scorer.score(&prompt_tokens, o)))
        .filter(|(_, s)| *s > 0.0)
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked.truncate(k);
    RetrievalContext { ranked, prompt_tokens }
}
