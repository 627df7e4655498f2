//! Usability check: every term must be grounded in the base vocabulary
//! (TBOX) or the digital twin (ABOX), and the ordering must be executable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use super::{linearize, ActionRecipe};
use crate::namespace::Namespaces;
use crate::owl;
use crate::store::Graph;
use crate::term::{Iri, Term, Triple};
use crate::twin::DigitalTwin;
use crate::vocab;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub usable: bool,
    pub tbox_violations: Vec<Iri>,
    pub abox_violations: Vec<Iri>,
    pub structural_violations: Vec<String>,
}

impl ValidationReport {
    fn finish(mut self) -> Self {
        self.usable = self.tbox_violations.is_empty()
            && self.abox_violations.is_empty()
            && self.structural_violations.is_empty();
        self
    }

    /// The `validate` report format: one `key: value` line per field.
    pub fn render(&self, ns: &Namespaces) -> String {
        let iris = |v: &[Iri]| v.iter().map(|i| ns.curie(i)).collect::<Vec<_>>().join(", ");
        let mut out = String::new();
        let _ = writeln!(out, "usable: {}", self.usable);
        let _ = writeln!(out, "tbox: [{}]", iris(&self.tbox_violations));
        let _ = writeln!(out, "abox: [{}]", iris(&self.abox_violations));
        let _ = writeln!(out, "structural: [{}]", self.structural_violations.join("; "));
        out
    }
}

fn push_once(list: &mut Vec<Iri>, iri: &Iri) {
    if !list.contains(iri) {
        list.push(iri.clone());
    }
}

fn is_declared(base: &Graph, iri: &Iri) -> bool {
    let rdf_type = Term::Iri(vocab::rdf_type());
    let subject = Term::Iri(iri.clone());
    let declared = base.objects(&subject, &rdf_type).any(|t| {
        matches!(t, Term::Iri(c) if *c == vocab::owl_class()
            || *c == vocab::owl("ObjectProperty")
            || *c == vocab::owl("DatatypeProperty"))
    });
    declared
}

/// Vocabulary positions in a document's triples, in order of appearance.
fn vocabulary_terms(triples: &[Triple]) -> Vec<&Iri> {
    let rdf_type = Term::Iri(vocab::rdf_type());
    let class_positions = [
        Term::Iri(vocab::sub_class_of()),
        Term::Iri(vocab::on_property()),
        Term::Iri(vocab::some_values_from()),
    ];
    let mut out = Vec::new();
    for t in triples {
        if let Term::Iri(p) = &t.predicate {
            out.push(p);
        }
        match &t.object {
            Term::Iri(o) if t.predicate == rdf_type || class_positions.contains(&t.predicate) => out.push(o),
            Term::Literal { datatype, .. } => out.push(datatype),
            _ => {}
        }
    }
    out
}

/// Individuals a document mentions: named typed nodes and the values of
/// the parameter restrictions, in order of appearance.
fn individual_terms<'a>(triples: &'a [Triple], individuals: &'a [(Iri, Iri)]) -> Vec<&'a Iri> {
    let params = [vocab::performed_by(), vocab::object_acted_on(), vocab::to_location()];
    let mut out: Vec<&Iri> = individuals.iter().map(|(i, _)| i).collect();
    let on_property = Term::Iri(vocab::on_property());
    let has_value = Term::Iri(vocab::has_value());
    let by_node: BTreeMap<&Term, &Term> = triples
        .iter()
        .filter(|t| t.predicate == on_property)
        .map(|t| (&t.subject, &t.object))
        .collect();
    for t in triples.iter().filter(|t| t.predicate == has_value) {
        let is_param = matches!(by_node.get(&t.subject), Some(Term::Iri(p)) if params.contains(p));
        if let (true, Term::Iri(v)) = (is_param, &t.object) {
            out.push(v);
        }
    }
    out
}

fn check_terms(
    triples: &[Triple],
    individuals: &[(Iri, Iri)],
    base: &Graph,
    twin: &DigitalTwin,
    report: &mut ValidationReport,
) {
    let class = (Term::Iri(vocab::rdf_type()), Term::Iri(vocab::owl_class()));
    let defined: BTreeSet<&Term> = triples
        .iter()
        .filter(|t| t.predicate == class.0 && t.object == class.1)
        .map(|t| &t.subject)
        .collect();
    for iri in vocabulary_terms(triples) {
        if vocab::is_core_term(iri) || defined.contains(&Term::Iri(iri.clone())) || is_declared(base, iri) {
            continue;
        }
        push_once(&mut report.tbox_violations, iri);
    }
    for iri in individual_terms(triples, individuals) {
        if !twin.contains(iri) {
            push_once(&mut report.abox_violations, iri);
        }
    }
}

fn check_structure(r: &ActionRecipe, report: &mut ValidationReport) {
    let s = &mut report.structural_violations;
    for (a, b) in &r.orderings {
        for end in [a, b] {
            if !r.is_subaction(end) {
                s.push(format!("ordering endpoint {} is not a subaction", end.local_name()));
            }
        }
    }
    if let Err(e) = linearize(r) {
        s.push(e.to_string());
    }
    let mut successors: BTreeMap<&Iri, BTreeSet<&Iri>> = BTreeMap::new();
    let mut has_pred: BTreeSet<&Iri> = BTreeSet::new();
    for (a, b) in &r.orderings {
        successors.entry(a).or_default().insert(b);
        has_pred.insert(b);
    }
    let starts: Vec<&str> = r
        .subactions
        .iter()
        .filter(|x| !has_pred.contains(&x.class_iri))
        .map(|x| x.class_iri.local_name())
        .collect();
    if starts.len() > 1 {
        s.push(format!("several subactions have no predecessor: {}", starts.join(", ")));
    }
    for (a, succ) in successors {
        if succ.len() > 1 {
            let names: Vec<&str> = succ.iter().map(|i| i.local_name()).collect();
            s.push(format!("{} has several successors: {}", a.local_name(), names.join(", ")));
        }
    }
}

/// Validate an extracted recipe.
pub fn validate(r: &ActionRecipe, base: &Graph, twin: &DigitalTwin) -> ValidationReport {
    let mut report = ValidationReport::default();
    check_terms(&r.triples, &r.individuals, base, twin, &mut report);
    check_structure(r, &mut report);
    report.finish()
}

/// Parse, extract and validate recipe text. Parse and extraction failures
/// become structural violations; the recipe is returned when extraction
/// succeeded.
pub fn validate_text(text: &str, base: &Graph, twin: &DigitalTwin) -> (ValidationReport, Option<ActionRecipe>) {
    let mut report = ValidationReport::default();
    let parsed = match owl::parse_rdfxml(text) {
        Ok(p) => p,
        Err(e) => {
            report.structural_violations.push(e.to_string());
            return (report.finish(), None);
        }
    };
    check_terms(&parsed.triples, &parsed.individuals, base, twin, &mut report);
    let Some(root) = owl::find_recipe_root(&parsed) else {
        report.structural_violations.push("no recipe root with subAction restrictions".into());
        return (report.finish(), None);
    };
    match owl::extract_recipe(&parsed, &root, text) {
        Ok(r) => {
            check_structure(&r, &mut report);
            (report.finish(), Some(r))
        }
        Err(e) => {
            report.structural_violations.push(e.to_string());
            (report.finish(), None)
        }
    }
}
