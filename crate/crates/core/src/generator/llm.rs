//! HTTP backend for an external recipe-writing model.
//!
//! Request, POSTed as JSON to the endpoint:
//!
//! ```json
//! {
//!   "model": "<model name>",
//!   "prompt": "<prompt template with {action} replaced by the user prompt>",
//!   "context_entities": [
//!     {"iri": "roboearth:huawei_mug_1", "type": "knowrob:DrinkingBottle",
//!      "location": "roboearth:table_1", "label": "huawei mug", "score": 1.0}
//!   ]
//! }
//! ```
//!
//! Ranked objects come first in retrieval order, followed by every piece of
//! furniture and region with score 0. The response must be a JSON object with
//! a string field `recipe_xml`; its value is handed to the validator verbatim.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Backend, GenerateError};
use crate::fixtures;
use crate::namespace::Namespaces;
use crate::twin::{DigitalTwin, RetrievalContext};

/// Overrides [`LlmConfig::endpoint`] when set.
pub const ENDPOINT_ENV: &str = "RECIPEKG_LLM_ENDPOINT";

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmConfig {
    pub endpoint: String,
    pub timeout_secs: f64,
    pub model: String,
    /// Prompt template with an `{action}` placeholder.
    #[serde(skip)]
    pub template: String,
}

impl Default for LlmConfig {
    fn default() -> Self {
        LlmConfig {
            endpoint: "http://127.0.0.1:8080/generate".into(),
            timeout_secs: 60.0,
            model: "codellama-13b-recipes".into(),
            template: fixtures::PROMPT_TEMPLATE.into(),
        }
    }
}

impl LlmConfig {
    pub fn with_env_override(mut self) -> Self {
        if let Ok(url) = std::env::var(ENDPOINT_ENV) {
            if !url.is_empty() {
                self.endpoint = url;
            }
        }
        self
    }
}

#[derive(Debug, Serialize)]
struct Entity {
    iri: String,
    #[serde(rename = "type")]
    type_iri: String,
    location: Option<String>,
    label: String,
    score: f64,
}

#[derive(Debug, Serialize)]
struct Request<'a> {
    model: &'a str,
    prompt: String,
    context_entities: Vec<Entity>,
}

#[derive(Debug, Deserialize)]
struct Response {
    recipe_xml: String,
}

pub struct LlmBackend {
    config: LlmConfig,
    client: reqwest::blocking::Client,
}

impl LlmBackend {
    pub fn new(config: LlmConfig) -> Result<Self, GenerateError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(config.timeout_secs))
            .build()
            .map_err(|e| GenerateError::BackendUnreachable(e.to_string()))?;
        Ok(LlmBackend { config, client })
    }

    pub fn config(&self) -> &LlmConfig {
        &self.config
    }

    fn request_body(&self, prompt: &str, context: &RetrievalContext, twin: &DigitalTwin) -> Request<'_> {
        let mut ns = Namespaces::default();
        for (p, u) in &twin.namespaces {
            let _ = ns.register(p, u);
        }
        let mut entities = Vec::new();
        for (iri, score) in &context.ranked {
            if let Some(o) = twin.object(iri) {
                entities.push(Entity {
                    iri: ns.curie(&o.iri),
                    type_iri: ns.curie(&o.type_iri),
                    location: Some(ns.curie(&o.location)),
                    label: o.label.clone(),
                    score: *score,
                });
            }
        }
        for p in twin.furniture.iter().chain(&twin.regions) {
            entities.push(Entity {
                iri: ns.curie(&p.iri),
                type_iri: ns.curie(&p.type_iri),
                location: p.location.as_ref().map(|l| ns.curie(l)),
                label: p.label.clone(),
                score: 0.0,
            });
        }
        Request {
            model: &self.config.model,
            prompt: self.config.template.replace("{action}", prompt),
            context_entities: entities,
        }
    }
}

impl Backend for LlmBackend {
    fn name(&self) -> &str {
        "llm"
    }

    fn generate(&mut self, prompt: &str, context: &RetrievalContext, twin: &DigitalTwin) -> Result<String, GenerateError> {
        let body = self.request_body(prompt, context, twin);
        let timeout = self.config.timeout_secs;
        let transport = |e: reqwest::Error| {
            if e.is_timeout() {
                GenerateError::BackendTimeout(Duration::from_secs_f64(timeout))
            } else {
                GenerateError::BackendUnreachable(e.to_string())
            }
        };
        let resp = self
            .client
            .post(&self.config.endpoint)
            .json(&body)
            .send()
            .map_err(transport)?;
        let status = resp.status();
        let bytes = resp.bytes().map_err(transport)?;
        if !status.is_success() {
            return Err(GenerateError::MalformedResponse(format!("HTTP {status}")));
        }
        let parsed: Response =
            serde_json::from_slice(&bytes).map_err(|e| GenerateError::MalformedResponse(e.to_string()))?;
        Ok(parsed.recipe_xml)
    }
}
