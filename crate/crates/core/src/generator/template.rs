//! Deterministic keyword planner. Valid by construction over the twin it is
//! given, which makes it the reference backend for tests and the bench.

use serde::Deserialize;

use super::{Backend, GenerateError};
use crate::namespace::Namespaces;
use crate::owl::serialize_rdfxml;
use crate::term::{Iri, Term, Triple};
use crate::twin::{tokenize, DigitalTwin, RetrievalContext};
use crate::vocab::{self, knowrob, roboearth};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Intent {
    PickPlace,
    Serve,
    Perceive,
    Clean,
}

/// Keyword tables. Every field can be overridden from the config file.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntentRules {
    pub pick: Vec<String>,
    pub place: Vec<String>,
    pub serve: Vec<String>,
    pub perceive: Vec<String>,
    pub clean: Vec<String>,
    /// Words that mark the disposal furniture for CLEAN.
    pub trash: Vec<String>,
    /// Prompt words left out of the root class name.
    pub filler: Vec<String>,
}

fn words(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

impl Default for IntentRules {
    fn default() -> Self {
        IntentRules {
            pick: words(&["pick"]),
            place: words(&["place", "put"]),
            serve: words(&["serve", "bring", "give", "fetch"]),
            perceive: words(&["perceive", "look", "scan"]),
            clean: words(&["clean", "clear", "remove"]),
            trash: words(&["trash"]),
            filler: words(&["me", "please"]),
        }
    }
}

impl IntentRules {
    /// First matching rule wins, in the order pick-and-place, serve,
    /// perceive, clean.
    pub fn classify(&self, tokens: &[String]) -> Option<Intent> {
        let any = |list: &[String]| tokens.iter().any(|t| list.contains(t));
        if any(&self.pick) && any(&self.place) {
            Some(Intent::PickPlace)
        } else if any(&self.serve) {
            Some(Intent::Serve)
        } else if any(&self.perceive) {
            Some(Intent::Perceive)
        } else if any(&self.clean) {
            Some(Intent::Clean)
        } else {
            None
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct TemplatePlanner {
    pub rules: IntentRules,
}

impl TemplatePlanner {
    pub fn new(rules: IntentRules) -> Self {
        TemplatePlanner { rules }
    }

    pub fn plan(&self, prompt: &str, context: &RetrievalContext, twin: &DigitalTwin) -> Result<String, GenerateError> {
        let tokens = tokenize(prompt);
        let intent = self
            .rules
            .classify(&tokens)
            .ok_or_else(|| GenerateError::UnknownIntent(prompt.to_string()))?;
        let mut b = Builder::new(self.root_name(&tokens), self.label(&tokens), twin);
        match intent {
            Intent::Serve => {
                let obj = top_object(prompt, context)?;
                let from = object_location(twin, &obj, prompt)?;
                b.root_super = roboearth("ServingFoodOrDrink");
                b.object(&obj);
                b.place(&from);
                b.step("MoveBaseToGraspPose", knowrob("BaseMovement"), &[(vocab::to_location(), &from)]);
                b.step("GraspObject", knowrob("GraspingSomething"), &[(vocab::object_acted_on(), &obj)]);
                b.step("OpenGripper", knowrob("OpeningAGripper"), &[(vocab::object_acted_on(), &obj)]);
                b.step("MoveBaseToHandoverPose", roboearth("MovingToHandoverPose"), &[]);
                b.step("HandoverObject", roboearth("HandingOverObject"), &[(vocab::object_acted_on(), &obj)]);
            }
            Intent::Perceive => {
                let at = self.furniture(&tokens, twin, prompt)?;
                b.root_super = roboearth("PerceivingObjects");
                b.place(&at);
                b.step("MoveBaseToLocation", knowrob("BaseMovement"), &[(vocab::to_location(), &at)]);
                b.step("PerceiveObjects", knowrob("VisualPerception"), &[(vocab::to_location(), &at)]);
            }
            Intent::Clean => {
                let at = self.furniture(&tokens, twin, prompt)?;
                let trash = self.trash(twin, prompt)?;
                let objects = perceived_at(twin, &at);
                if objects.is_empty() {
                    return Err(GenerateError::UnresolvedObject(prompt.to_string()));
                }
                b.root_super = roboearth("ClearingASurface");
                for o in &objects {
                    b.object(o);
                }
                b.place(&at);
                b.place(&trash);
                b.step("MoveBaseToLocation", knowrob("BaseMovement"), &[(vocab::to_location(), &at)]);
                for (i, o) in objects.iter().enumerate() {
                    let n = i + 1;
                    b.step(
                        &format!("PickObject{n}"),
                        knowrob("PickingUpAnObject"),
                        &[(vocab::object_acted_on(), o)],
                    );
                    b.step(
                        &format!("PlaceObject{n}"),
                        knowrob("PuttingSomethingSomewhere"),
                        &[(vocab::object_acted_on(), o), (vocab::to_location(), &trash)],
                    );
                }
            }
            Intent::PickPlace => {
                let obj = top_object(prompt, context)?;
                let from = object_location(twin, &obj, prompt)?;
                // The destination is named after the last place word.
                let cut = tokens
                    .iter()
                    .rposition(|t| self.rules.place.contains(t))
                    .map_or(0, |i| i + 1);
                let to = self.furniture(&tokens[cut..], twin, prompt)?;
                b.root_super = roboearth("PickAndPlace");
                b.object(&obj);
                b.place(&from);
                b.place(&to);
                b.step("MoveBaseToGraspPose", knowrob("BaseMovement"), &[(vocab::to_location(), &from)]);
                b.step("GraspObject", knowrob("GraspingSomething"), &[(vocab::object_acted_on(), &obj)]);
                b.step("MoveBaseToPlacePose", knowrob("BaseMovement"), &[(vocab::to_location(), &to)]);
                b.step(
                    "PlaceObject",
                    knowrob("PuttingSomethingSomewhere"),
                    &[(vocab::object_acted_on(), &obj), (vocab::to_location(), &to)],
                );
            }
        }
        b.finish()
    }

    fn kept<'a>(&self, tokens: &'a [String]) -> impl Iterator<Item = &'a String> + 'a {
        let filler = self.rules.filler.clone();
        tokens.iter().filter(move |t| !filler.contains(t))
    }

    /// "Serve me a drink" → `ServeADrink`.
    fn root_name(&self, tokens: &[String]) -> String {
        let mut name: String = self
            .kept(tokens)
            .map(|t| {
                let mut cs = t.chars();
                match cs.next() {
                    Some(c) => c.to_uppercase().chain(cs).collect::<String>(),
                    None => String::new(),
                }
            })
            .collect();
        if !name.starts_with(|c: char| c.is_alphabetic()) {
            name.insert_str(0, "Task");
        }
        name
    }

    fn label(&self, tokens: &[String]) -> String {
        self.kept(tokens).cloned().collect::<Vec<_>>().join(" ")
    }

    /// The furniture whose label and name share the most words with `tokens`.
    fn furniture(&self, tokens: &[String], twin: &DigitalTwin, prompt: &str) -> Result<Iri, GenerateError> {
        let mut best: Option<(usize, &Iri)> = None;
        for f in &twin.furniture {
            let mut vocab = tokenize(&f.label);
            vocab.extend(tokenize(f.iri.local_name()));
            let score = tokens.iter().filter(|t| vocab.contains(t)).count();
            if score > 0 && best.is_none_or(|(s, i)| score > s || (score == s && &f.iri < i)) {
                best = Some((score, &f.iri));
            }
        }
        best.map(|(_, i)| i.clone())
            .ok_or_else(|| GenerateError::UnresolvedLocation(prompt.to_string()))
    }

    fn trash(&self, twin: &DigitalTwin, prompt: &str) -> Result<Iri, GenerateError> {
        twin.furniture
            .iter()
            .find(|f| {
                let mut words = tokenize(&f.label);
                words.extend(tokenize(f.iri.local_name()));
                words.iter().any(|w| self.rules.trash.contains(w))
            })
            .map(|f| f.iri.clone())
            .ok_or_else(|| GenerateError::UnresolvedLocation(format!("{prompt} (no disposal furniture)")))
    }
}

impl Backend for TemplatePlanner {
    fn name(&self) -> &str {
        "template"
    }

    fn generate(&mut self, prompt: &str, context: &RetrievalContext, twin: &DigitalTwin) -> Result<String, GenerateError> {
        self.plan(prompt, context, twin)
    }
}

/// Plan with the default keyword tables.
pub fn plan_template(prompt: &str, context: &RetrievalContext, twin: &DigitalTwin) -> Result<String, GenerateError> {
    TemplatePlanner::default().plan(prompt, context, twin)
}

fn top_object(prompt: &str, context: &RetrievalContext) -> Result<Iri, GenerateError> {
    context
        .top()
        .cloned()
        .ok_or_else(|| GenerateError::UnresolvedObject(prompt.to_string()))
}

fn object_location(twin: &DigitalTwin, obj: &Iri, prompt: &str) -> Result<Iri, GenerateError> {
    twin.location_of(obj)
        .cloned()
        .ok_or_else(|| GenerateError::UnresolvedObject(prompt.to_string()))
}

/// Objects the latest perception at `at` saw that are still there, or,
/// without any perception there, everything the twin places at `at`.
fn perceived_at(twin: &DigitalTwin, at: &Iri) -> Vec<Iri> {
    match twin.perceptions.iter().rev().find(|p| &p.location == at) {
        Some(p) => p
            .objects
            .iter()
            .filter(|o| twin.location_of(o) == Some(at))
            .cloned()
            .collect(),
        None => twin.objects_at(at).map(|o| o.iri.clone()).collect(),
    }
}

/// Accumulates the recipe's triples in document order: individuals, the
/// root with its restrictions and ordering nodes, then the subaction classes.
struct Builder<'t> {
    twin: &'t DigitalTwin,
    root: Iri,
    root_super: Iri,
    label: String,
    individuals: Vec<Triple>,
    steps: Vec<(Iri, Vec<Triple>)>,
    blanks: usize,
}

impl<'t> Builder<'t> {
    fn new(root_name: String, label: String, twin: &'t DigitalTwin) -> Self {
        Builder {
            twin,
            root: roboearth(&root_name),
            root_super: knowrob("Action"),
            label,
            individuals: Vec::new(),
            steps: Vec::new(),
            blanks: 0,
        }
    }

    fn blank(&mut self) -> Term {
        self.blanks += 1;
        Term::blank(format!("g{}", self.blanks))
    }

    fn declare(&mut self, iri: &Iri, ty: &Iri) {
        let t = Triple::iris(iri, &vocab::rdf_type(), ty);
        if !self.individuals.contains(&t) {
            self.individuals.push(t);
        }
    }

    fn object(&mut self, iri: &Iri) {
        let twin = self.twin;
        if let Some(o) = twin.object(iri) {
            self.declare(iri, &o.type_iri);
        }
    }

    /// Declare a place. The gripper and handover pseudo-locations have no type.
    fn place(&mut self, iri: &Iri) {
        let twin = self.twin;
        if let Some(p) = twin.furniture.iter().chain(&twin.regions).find(|p| &p.iri == iri) {
            self.declare(iri, &p.type_iri);
        }
    }

    fn restriction(&mut self, out: &mut Vec<Triple>, subject: &Iri, prop: Iri, constraint: Iri, value: Term) {
        let node = self.blank();
        out.push(Triple {
            subject: subject.into(),
            predicate: vocab::sub_class_of().into(),
            object: node.clone(),
        });
        out.push(Triple {
            subject: node.clone(),
            predicate: vocab::on_property().into(),
            object: prop.into(),
        });
        out.push(Triple {
            subject: node,
            predicate: constraint.into(),
            object: value,
        });
    }

    fn step(&mut self, name: &str, super_class: Iri, params: &[(Iri, &Iri)]) {
        let class = roboearth(name);
        let mut out = vec![
            Triple::iris(&class, &vocab::rdf_type(), &vocab::owl_class()),
            Triple::iris(&class, &vocab::sub_class_of(), &super_class),
        ];
        let robot = self.twin.robot.iri.clone();
        self.restriction(&mut out, &class, vocab::performed_by(), vocab::has_value(), robot.into());
        for (prop, value) in params {
            self.restriction(&mut out, &class, prop.clone(), vocab::has_value(), (*value).into());
        }
        self.steps.push((class, out));
    }

    fn finish(mut self) -> Result<String, GenerateError> {
        // A root named like one of its steps would make it its own subaction.
        if self.steps.iter().any(|(c, _)| *c == self.root) {
            self.root = roboearth(&format!("{}Task", self.root.local_name()));
        }
        let root = self.root.clone();
        let mut out = std::mem::take(&mut self.individuals);
        out.push(Triple::iris(&root, &vocab::rdf_type(), &vocab::owl_class()));
        out.push(Triple::iris(&root, &vocab::sub_class_of(), &self.root_super));
        if !self.label.is_empty() {
            out.push(Triple {
                subject: root.clone().into(),
                predicate: vocab::label().into(),
                object: Term::string(&self.label),
            });
        }
        let classes: Vec<Iri> = self.steps.iter().map(|(c, _)| c.clone()).collect();
        for c in &classes {
            self.restriction(&mut out, &root, vocab::sub_action(), vocab::some_values_from(), c.into());
        }
        for pair in classes.windows(2) {
            let node = self.blank();
            out.push(Triple {
                subject: root.clone().into(),
                predicate: vocab::ordering_constraints().into(),
                object: node.clone(),
            });
            for (p, o) in [
                (vocab::rdf_type(), vocab::partial_ordering()),
                (vocab::occurs_before(), pair[0].clone()),
                (vocab::occurs_after(), pair[1].clone()),
            ] {
                out.push(Triple {
                    subject: node.clone(),
                    predicate: p.into(),
                    object: o.into(),
                });
            }
        }
        for (_, defs) in std::mem::take(&mut self.steps) {
            out.extend(defs);
        }
        let mut ns = Namespaces::default();
        for (p, u) in &self.twin.namespaces {
            ns.register(p, u).map_err(|e| GenerateError::Serialize(e.to_string()))?;
        }
        serialize_rdfxml(&out, &ns).map_err(|e| GenerateError::Serialize(e.to_string()))
    }
}
