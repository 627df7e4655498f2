//! A loaded session: the base ontology, the shared graph and the digital
//! twin, with the prompt → generate → assert → execute pipeline on top.

use std::fmt;
use std::sync::Arc;

use crate::generator::{self, Backend, BenchRow, GenerationOutcome, GenerationRequest};
use crate::namespace::Namespaces;
use crate::query::{self, parse_query, Binding, QueryError};
use crate::rce::{self, ExecutionTrace, Executor};
use crate::recipe::{assert_recipe, validate_text, ActionRecipe, ValidationReport};
use crate::store::{Graph, StoreError};
use crate::term::Iri;
use crate::twin::{load_scene, retrieve, DigitalTwin, RetrievalContext, TwinError};

/// How many ranked objects the generator sees.
pub const DEFAULT_RETRIEVAL_K: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("base ontology: {0}")]
    Base(StoreError),
    #[error("scene: {0}")]
    Scene(TwinError),
}

#[derive(Debug, Clone)]
pub struct Engine {
    /// The base ontology alone; the validator's TBOX.
    pub base: Graph,
    /// Base ontology, twin, asserted recipes and everything execution adds.
    pub graph: Graph,
    pub twin: DigitalTwin,
    pub retrieval_k: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoadSummary {
    pub triples: usize,
    pub base_triples: usize,
    pub objects: usize,
    pub furniture: usize,
    pub regions: usize,
    pub robot: Iri,
    pub capabilities: Vec<Iri>,
}

impl LoadSummary {
    pub fn render(&self, ns: &Namespaces) -> String {
        let caps: Vec<String> = self.capabilities.iter().map(|c| ns.curie(c)).collect();
        format!(
            "triples: {} ({} base)\nobjects: {}\nfurniture: {}\nregions: {}\nrobot: {}\ncapabilities: {} [{}]\n",
            self.triples,
            self.base_triples,
            self.objects,
            self.furniture,
            self.regions,
            ns.curie(&self.robot),
            caps.len(),
            caps.join(", ")
        )
    }
}

/// Everything one prompt produced. `trace` is present when a recipe was
/// asserted and handed to the executive.
#[derive(Debug, Clone)]
pub struct PromptRun {
    pub outcome: GenerationOutcome,
    pub trace: Option<ExecutionTrace>,
}

/// Distinct query solutions, columns in first-occurrence order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryAnswer {
    pub variables: Vec<Arc<str>>,
    pub rows: Vec<Binding>,
    pub asserted: usize,
}

impl QueryAnswer {
    pub fn render(&self, ns: &Namespaces) -> String {
        let mut out = String::new();
        if !self.variables.is_empty() {
            let header: Vec<&str> = self.variables.iter().map(|v| &**v).collect();
            out.push_str(&header.join(" | "));
            out.push('\n');
            for row in &self.rows {
                let cells: Vec<String> = self
                    .variables
                    .iter()
                    .map(|v| row.get(v).map_or_else(|| "_".to_string(), |t| ns.render(t)))
                    .collect();
                out.push_str(&cells.join(" | "));
                out.push('\n');
            }
        }
        match self.rows.len() {
            1 => out.push_str("1 solution\n"),
            n => out.push_str(&format!("{n} solutions\n")),
        }
        match self.asserted {
            0 => {}
            1 => out.push_str("asserted 1 triple\n"),
            n => out.push_str(&format!("asserted {n} triples\n")),
        }
        out
    }
}

impl fmt::Display for QueryAnswer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&Namespaces::default()))
    }
}

impl Engine {
    /// Parse the base ontology (N-Triples) and the scene (TOML) and merge
    /// them into one graph. Nothing is kept on failure.
    pub fn load(base_ntriples: &str, scene_toml: &str) -> Result<Self, EngineError> {
        let mut base = Graph::new();
        base.load_ntriples(base_ntriples).map_err(EngineError::Base)?;
        let twin = load_scene(scene_toml).map_err(EngineError::Scene)?;
        Self::from_parts(base, twin)
    }

    pub fn from_parts(base: Graph, twin: DigitalTwin) -> Result<Self, EngineError> {
        let mut graph = base.clone();
        twin.assert_into(&mut graph).map_err(EngineError::Scene)?;
        Ok(Engine {
            base,
            graph,
            twin,
            retrieval_k: DEFAULT_RETRIEVAL_K,
        })
    }

    pub fn namespaces(&self) -> &Namespaces {
        self.graph.namespaces()
    }

    pub fn summary(&self) -> LoadSummary {
        LoadSummary {
            triples: self.graph.len(),
            base_triples: self.base.len(),
            objects: self.twin.objects.len(),
            furniture: self.twin.furniture.len(),
            regions: self.twin.regions.len(),
            robot: self.twin.robot.iri.clone(),
            capabilities: self.twin.robot.capabilities.iter().cloned().collect(),
        }
    }

    pub fn context(&self, prompt: &str) -> RetrievalContext {
        retrieve(&self.twin, prompt, self.retrieval_k)
    }

    pub fn validate(&self, text: &str) -> (ValidationReport, Option<ActionRecipe>) {
        validate_text(text, &self.base, &self.twin)
    }

    /// Validate recipe text and assert it when usable. Returns the report and
    /// the asserted recipe.
    pub fn assert_text(&mut self, text: &str) -> (ValidationReport, Option<ActionRecipe>) {
        let (mut report, recipe) = self.validate(text);
        match recipe {
            Some(r) if report.usable => match assert_recipe(&mut self.graph, &r) {
                Ok(_) => (report, Some(r)),
                Err(e) => {
                    report.usable = false;
                    report.structural_violations.push(format!("cannot assert: {e}"));
                    (report, None)
                }
            },
            _ => (report, None),
        }
    }

    pub fn generate(&mut self, prompt: &str, backend: &mut dyn Backend, max_attempts: usize) -> GenerationOutcome {
        let req = GenerationRequest {
            prompt: prompt.to_string(),
            context: self.context(prompt),
            max_attempts,
        };
        generator::generate_validated(&req, backend, &self.base, &self.twin, &mut self.graph)
    }

    pub fn execute(&mut self, root: &Iri, executor: &mut dyn Executor) -> ExecutionTrace {
        rce::run(root, &mut self.graph, &mut self.twin, executor)
    }

    /// Generate, and on success run the recipe.
    pub fn prompt(
        &mut self,
        prompt: &str,
        backend: &mut dyn Backend,
        max_attempts: usize,
        executor: &mut dyn Executor,
    ) -> PromptRun {
        let outcome = self.generate(prompt, backend, max_attempts);
        let trace = outcome
            .recipe
            .as_ref()
            .filter(|_| outcome.succeeded)
            .map(|r| r.root.clone())
            .map(|root| self.execute(&root, executor));
        PromptRun { outcome, trace }
    }

    /// Run REPL query text. `bindings` pre-binds variables, which is how the
    /// perception routine supplies `Loc` and `T`. Assertions are kept only
    /// if the whole query succeeds.
    pub fn query(&mut self, text: &str, bindings: &Binding) -> Result<QueryAnswer, QueryError> {
        let q = parse_query(text, self.graph.namespaces())?;
        let variables: Vec<Arc<str>> = q.variables().into_iter().filter(|v| !v.starts_with('_')).collect();
        let mut scratch = self.graph.clone();
        let mut solutions = query::solve_with(&q, &mut scratch, bindings.clone());
        let mut rows: Vec<Binding> = Vec::new();
        for b in solutions.by_ref() {
            let row = b?.project(&variables);
            if !rows.contains(&row) {
                rows.push(row);
            }
        }
        let asserted = solutions.asserted();
        drop(solutions);
        self.graph = scratch;
        Ok(QueryAnswer {
            variables,
            rows,
            asserted,
        })
    }

    /// Single-attempt usability over `trials` runs, each on a copy of the graph.
    pub fn bench(&self, prompt: &str, trials: usize, backend: &mut dyn Backend) -> BenchRow {
        generator::bench(
            prompt,
            &self.context(prompt),
            trials,
            backend,
            &self.base,
            &self.twin,
            &self.graph,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::generator::TemplatePlanner;
    use crate::rce::SimulatedExecutor;
    use crate::term::Term;
    use crate::vocab::roboearth;

    fn loft() -> Engine {
        Engine::load(fixtures::BASE_ONTOLOGY, fixtures::LOFT_SCENE).unwrap()
    }

    #[test]
    fn load_summary() {
        let e = loft();
        let s = e.summary();
        assert_eq!(s.objects, 6);
        assert_eq!(s.capabilities.len(), 2);
        assert_eq!(s.base_triples, fixtures::base_graph().len());
        assert_eq!(s.triples, e.base.len() + e.twin.triples().len());
        assert_eq!(loft().summary(), s);
        assert!(s.render(e.namespaces()).contains("capabilities: 2 [srdl2:Grasping, srdl2:Navigate]"));
    }

    #[test]
    fn load_errors_name_the_source() {
        assert!(matches!(
            Engine::load("garbage", fixtures::LOFT_SCENE),
            Err(EngineError::Base(_))
        ));
        assert!(matches!(
            Engine::load(fixtures::BASE_ONTOLOGY, "[robot]\n"),
            Err(EngineError::Scene(_))
        ));
    }

    #[test]
    fn prompt_runs_the_pipeline() {
        let mut e = loft();
        let run = e.prompt("Serve me a drink", &mut TemplatePlanner::default(), 5, &mut SimulatedExecutor);
        assert!(run.outcome.succeeded);
        let trace = run.trace.unwrap();
        assert!(trace.completed());
        assert_eq!(trace.steps.len(), 5);

        let run = e.prompt("Fold spacetime", &mut TemplatePlanner::default(), 5, &mut SimulatedExecutor);
        assert!(!run.outcome.succeeded);
        assert!(run.trace.is_none());
    }

    #[test]
    fn query_table_and_assertions() {
        let mut e = loft();
        let answer = e
            .query("rdf(roboearth:huawei_mug_1, knowrob:location, Loc)", &Binding::new())
            .unwrap();
        assert_eq!(answer.render(e.namespaces()), "Loc\nroboearth:table_1\n1 solution\n");

        let before = e.graph.len();
        let text = "?-rdf_assert(P, rdf:type, knowrob:'Perception'),
 rdf_assert(P, knowrob:'location', Loc),
 rdf_assert(P, knowrob:'occursAt', T),
 rdf_assert(P, knowrob:'objectActedOn', roboearth:'huawei_mug_1').";
        let bindings: Binding = [
            ("P", Term::from(roboearth("perception_9"))),
            ("Loc", Term::from(roboearth("table_1"))),
            ("T", Term::integer(10)),
        ]
        .into_iter()
        .collect();
        let answer = e.query(text, &bindings).unwrap();
        assert_eq!(answer.asserted, 4);
        assert!(answer.render(e.namespaces()).ends_with("1 solution\nasserted 4 triples\n"));
        assert_eq!(e.graph.len(), before + 4);

        // A failing assert query leaves nothing behind.
        assert!(e.query(text, &Binding::new()).is_err());
        assert_eq!(e.graph.len(), before + 4);
    }

    #[test]
    fn empty_graph_has_no_solutions() {
        let mut e = Engine::from_parts(Graph::new(), DigitalTwin::with_robot(crate::twin::RobotProfile {
            iri: roboearth("robot_1"),
            capabilities: Default::default(),
            location: None,
        }))
        .unwrap();
        e.graph = Graph::new();
        let answer = e.query("rdf(S, P, O)", &Binding::new()).unwrap();
        assert!(answer.render(e.namespaces()).ends_with("0 solutions\n"));
    }
}
