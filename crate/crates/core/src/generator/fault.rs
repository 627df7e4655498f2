//! A decorator backend that plants hallucinations at a fixed rate, so the
//! validate/re-prompt loop and the bench can be exercised under a seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Backend, GenerateError};
use crate::namespace::Namespaces;
use crate::owl::{parse_rdfxml, serialize_rdfxml};
use crate::term::{Iri, Term, Triple};
use crate::twin::{DigitalTwin, RetrievalContext};
use crate::vocab;

pub struct FaultInjector<B> {
    inner: B,
    p: f64,
    rng: ChaCha8Rng,
    fresh: usize,
}

impl<B: Backend> FaultInjector<B> {
    pub fn new(inner: B, p: f64, seed: u64) -> Self {
        assert!((0.0..=1.0).contains(&p), "corruption probability must lie in [0, 1]");
        FaultInjector {
            inner,
            p,
            rng: ChaCha8Rng::seed_from_u64(seed),
            fresh: 0,
        }
    }

    pub fn probability(&self) -> f64 {
        self.p
    }

    fn corrupt(&mut self, text: &str, twin: &DigitalTwin) -> Result<String, GenerateError> {
        let parsed = parse_rdfxml(text).map_err(|e| GenerateError::Serialize(e.to_string()))?;
        let (abox, tbox) = candidates(&parsed.triples, twin);
        if abox.is_empty() && tbox.is_empty() {
            return Ok(text.to_string());
        }
        let want_abox = self.rng.random_bool(0.5);
        let use_abox = !abox.is_empty() && (want_abox || tbox.is_empty());
        let pool = if use_abox { &abox } else { &tbox };
        let victim = pool[self.rng.random_range(0..pool.len())].clone();
        self.fresh += 1;
        let n = self.fresh;
        let fake = if use_abox {
            vocab::roboearth(&format!("hallucinated_object_{n}"))
        } else {
            Iri::new(format!("{}{}Hallucinated{n}", victim.namespace(), victim.local_name()))
        };
        log::debug!("fault injector: {} -> {}", victim.as_str(), fake.as_str());
        let triples = replace_iri(&parsed.triples, &victim, &fake);
        let mut ns = Namespaces::default();
        for (p, u) in &twin.namespaces {
            let _ = ns.register(p, u);
        }
        serialize_rdfxml(&triples, &ns).map_err(|e| GenerateError::Serialize(e.to_string()))
    }
}

impl<B: Backend> Backend for FaultInjector<B> {
    fn name(&self) -> &str {
        "fault"
    }

    fn generate(&mut self, prompt: &str, context: &RetrievalContext, twin: &DigitalTwin) -> Result<String, GenerateError> {
        let text = self.inner.generate(prompt, context, twin)?;
        if self.rng.random::<f64>() < self.p {
            self.corrupt(&text, twin)
        } else {
            Ok(text)
        }
    }
}

/// The IRIs a corruption may target, split into twin individuals (ABOX) and
/// everything else (TBOX), each in order of first appearance. Core terms and
/// classes the document defines itself are left alone: renaming a defined
/// class everywhere yields an equally valid recipe.
pub(crate) fn candidates(triples: &[Triple], twin: &DigitalTwin) -> (Vec<Iri>, Vec<Iri>) {
    let rdf_type = Term::Iri(vocab::rdf_type());
    let class = Term::Iri(vocab::owl_class());
    let defined: Vec<&Term> = triples
        .iter()
        .filter(|t| t.predicate == rdf_type && t.object == class)
        .map(|t| &t.subject)
        .collect();
    let (mut abox, mut tbox) = (Vec::new(), Vec::new());
    for t in triples {
        for term in t.terms() {
            let Term::Iri(i) = term else { continue };
            if vocab::is_core_term(i) || defined.contains(&term) {
                continue;
            }
            let list = if twin.contains(i) { &mut abox } else { &mut tbox };
            if !list.contains(i) {
                list.push(i.clone());
            }
        }
    }
    (abox, tbox)
}

/// Every occurrence of `from`, in any position, becomes `to`.
pub(crate) fn replace_iri(triples: &[Triple], from: &Iri, to: &Iri) -> Vec<Triple> {
    let swap = |t: &Term| match t {
        Term::Iri(i) if i == from => Term::Iri(to.clone()),
        other => other.clone(),
    };
    triples
        .iter()
        .map(|t| Triple {
            subject: swap(&t.subject),
            predicate: swap(&t.predicate),
            object: swap(&t.object),
        })
        .collect()
}
