//! Recipe generation: backends that turn a prompt into recipe XML, and the
//! validate/re-prompt loop that keeps only grounded recipes.

mod fault;
mod llm;
mod template;

pub use fault::FaultInjector;
pub use llm::{LlmBackend, LlmConfig, ENDPOINT_ENV};
pub use template::{plan_template, Intent, IntentRules, TemplatePlanner};

use std::fmt;

use crate::recipe::{assert_recipe, validate_text, ActionRecipe, ValidationReport};
use crate::store::Graph;
use crate::twin::{DigitalTwin, RetrievalContext};

pub const DEFAULT_MAX_ATTEMPTS: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GenerateError {
    #[error("no intent rule matches prompt `{0}`")]
    UnknownIntent(String),
    #[error("cannot resolve an object for `{0}`")]
    UnresolvedObject(String),
    #[error("cannot resolve a location for `{0}`")]
    UnresolvedLocation(String),
    #[error("LLM backend unreachable: {0}")]
    BackendUnreachable(String),
    #[error("LLM backend timed out after {0:?}")]
    BackendTimeout(std::time::Duration),
    #[error("malformed backend response: {0}")]
    MalformedResponse(String),
    #[error("cannot serialize recipe: {0}")]
    Serialize(String),
}

impl GenerateError {
    /// Whether asking the same backend again can help. Planner failures are
    /// deterministic; transport failures are not.
    pub fn is_retryable(&self) -> bool {
        matches!(
            self,
            GenerateError::BackendUnreachable(_)
                | GenerateError::BackendTimeout(_)
                | GenerateError::MalformedResponse(_)
        )
    }
}

/// Something that writes recipe XML for a prompt.
pub trait Backend {
    fn name(&self) -> &str;

    fn generate(
        &mut self,
        prompt: &str,
        context: &RetrievalContext,
        twin: &DigitalTwin,
    ) -> Result<String, GenerateError>;
}

impl<B: Backend + ?Sized> Backend for Box<B> {
    fn name(&self) -> &str {
        (**self).name()
    }

    fn generate(
        &mut self,
        prompt: &str,
        context: &RetrievalContext,
        twin: &DigitalTwin,
    ) -> Result<String, GenerateError> {
        (**self).generate(prompt, context, twin)
    }
}

#[derive(Debug, Clone)]
pub struct GenerationRequest {
    pub prompt: String,
    pub context: RetrievalContext,
    pub max_attempts: usize,
}

impl GenerationRequest {
    pub fn new(prompt: impl Into<String>, context: RetrievalContext) -> Self {
        GenerationRequest {
            prompt: prompt.into(),
            context,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }
}

/// One round of the loop. `text` is empty when the backend produced nothing.
#[derive(Debug, Clone, PartialEq)]
pub struct Attempt {
    pub text: String,
    pub report: ValidationReport,
    pub error: Option<GenerateError>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationOutcome {
    pub recipe: Option<ActionRecipe>,
    pub attempts: Vec<Attempt>,
    pub succeeded: bool,
}

impl GenerationOutcome {
    pub fn last(&self) -> Option<&Attempt> {
        self.attempts.last()
    }

    /// The error that ended the loop, if the last attempt failed in the backend.
    pub fn final_error(&self) -> Option<&GenerateError> {
        self.last().and_then(|a| a.error.as_ref())
    }
}

/// Generate, validate and retry. The first usable recipe is asserted into
/// `g` and ends the loop. The identical prompt is re-sent on every retry.
pub fn generate_validated(
    req: &GenerationRequest,
    backend: &mut dyn Backend,
    base: &Graph,
    twin: &DigitalTwin,
    g: &mut Graph,
) -> GenerationOutcome {
    assert!(req.max_attempts >= 1, "max_attempts must be positive");
    let mut attempts = Vec::new();
    for n in 1..=req.max_attempts {
        let text = match backend.generate(&req.prompt, &req.context, twin) {
            Ok(t) => t,
            Err(e) => {
                log::warn!("attempt {n} via {}: {e}", backend.name());
                let report = ValidationReport {
                    structural_violations: vec![e.to_string()],
                    ..ValidationReport::default()
                };
                let stop = !e.is_retryable();
                attempts.push(Attempt {
                    text: String::new(),
                    report,
                    error: Some(e),
                });
                if stop {
                    break;
                }
                continue;
            }
        };
        let (mut report, recipe) = validate_text(&text, base, twin);
        if let (true, Some(r)) = (report.usable, &recipe) {
            match assert_recipe(g, r) {
                Ok(added) => {
                    log::info!("attempt {n}: asserted {} ({added} triples)", r.root.local_name());
                    attempts.push(Attempt {
                        text,
                        report,
                        error: None,
                    });
                    return GenerationOutcome {
                        recipe,
                        attempts,
                        succeeded: true,
                    };
                }
                Err(e) => {
                    report.usable = false;
                    report.structural_violations.push(format!("cannot assert: {e}"));
                }
            }
        }
        log::info!("attempt {n}: recipe not usable");
        attempts.push(Attempt {
            text,
            report,
            error: None,
        });
    }
    GenerationOutcome {
        recipe: None,
        attempts,
        succeeded: false,
    }
}

/// One row of the usability table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchRow {
    pub prompt: String,
    pub trials: usize,
    pub usable: usize,
    /// Failure reasons with their counts, sorted by reason.
    pub failures: Vec<(String, usize)>,
}

impl fmt::Display for BenchRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} | {} | {}", self.prompt, self.trials, self.usable)
    }
}

/// Run `trials` independent single-attempt generations, each against its own
/// copy of `g`.
pub fn bench(
    prompt: &str,
    context: &RetrievalContext,
    trials: usize,
    backend: &mut dyn Backend,
    base: &Graph,
    twin: &DigitalTwin,
    g: &Graph,
) -> BenchRow {
    let req = GenerationRequest {
        prompt: prompt.to_string(),
        context: context.clone(),
        max_attempts: 1,
    };
    let mut usable = 0;
    let mut failures = std::collections::BTreeMap::<String, usize>::new();
    for _ in 0..trials {
        let mut scratch = g.clone();
        let out = generate_validated(&req, backend, base, twin, &mut scratch);
        if out.succeeded {
            usable += 1;
            continue;
        }
        let reason = match out.last() {
            Some(Attempt { error: Some(e), .. }) => error_kind(e).to_string(),
            Some(a) if !a.report.abox_violations.is_empty() => "abox".into(),
            Some(a) if !a.report.tbox_violations.is_empty() => "tbox".into(),
            _ => "structural".into(),
        };
        *failures.entry(reason).or_default() += 1;
    }
    BenchRow {
        prompt: prompt.to_string(),
        trials,
        usable,
        failures: failures.into_iter().collect(),
    }
}

fn error_kind(e: &GenerateError) -> &'static str {
    match e {
        GenerateError::UnknownIntent(_) => "UnknownIntent",
        GenerateError::UnresolvedObject(_) => "UnresolvedObject",
        GenerateError::UnresolvedLocation(_) => "UnresolvedLocation",
        GenerateError::BackendUnreachable(_) => "BackendUnreachable",
        GenerateError::BackendTimeout(_) => "BackendTimeout",
        GenerateError::MalformedResponse(_) => "MalformedResponse",
        GenerateError::Serialize(_) => "Serialize",
    }
}
