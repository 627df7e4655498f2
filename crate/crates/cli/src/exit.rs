//! Exit codes. Every failure path maps to exactly one of these.

use recipekg::generator::{GenerateError, GenerationOutcome};
use recipekg::query::QueryError;
use recipekg::rce::RceError;

use crate::config::ConfigError;

pub const GENERIC: u8 = 1;
/// Also what clap uses for bad arguments.
pub const USAGE: u8 = 2;
pub const LOAD: u8 = 3;
pub const UNKNOWN_INTENT: u8 = 10;
pub const UNRESOLVED: u8 = 11;
/// Every attempt ended in a backend failure.
pub const EXHAUSTED: u8 = 12;
/// The last attempt produced a recipe that did not validate.
pub const VALIDATION_FAILED: u8 = 13;
pub const CAPABILITY_MISMATCH: u8 = 20;
pub const UNRESOLVED_API: u8 = 21;
pub const PARAMETRIZATION: u8 = 22;
pub const EXECUTOR: u8 = 23;
pub const ORDERING: u8 = 24;
pub const RCE_QUERY: u8 = 25;
pub const QUERY_SYNTAX: u8 = 30;
pub const QUERY_EVAL: u8 = 31;

#[derive(Debug, Clone)]
pub struct Exit {
    pub code: u8,
    pub message: String,
}

impl Exit {
    pub fn new(code: u8, message: String) -> Self {
        Exit { code, message }
    }

    pub fn io(e: std::io::Error) -> Self {
        Exit::new(GENERIC, e.to_string())
    }

    pub fn config(e: ConfigError) -> Self {
        Exit::new(if e.is_usage() { USAGE } else { LOAD }, e.to_string())
    }

    pub fn rce(e: &RceError) -> Self {
        let code = match e {
            RceError::CapabilityMismatch { .. } => CAPABILITY_MISMATCH,
            RceError::UnresolvedApi(_) => UNRESOLVED_API,
            RceError::ParametrizationFailure { .. } => PARAMETRIZATION,
            RceError::ExecutorFailure { .. } => EXECUTOR,
            RceError::Ordering(_) => ORDERING,
            RceError::Query(_) => RCE_QUERY,
        };
        Exit::new(code, e.to_string())
    }

    /// Why a generation run produced nothing to execute.
    pub fn generation(outcome: &GenerationOutcome) -> Self {
        match outcome.final_error() {
            Some(e @ GenerateError::UnknownIntent(_)) => Exit::new(UNKNOWN_INTENT, e.to_string()),
            Some(e @ (GenerateError::UnresolvedObject(_) | GenerateError::UnresolvedLocation(_))) => {
                Exit::new(UNRESOLVED, e.to_string())
            }
            Some(e) if e.is_retryable() => Exit::new(
                EXHAUSTED,
                format!("gave up after {} attempts: {e}", outcome.attempts.len()),
            ),
            Some(e) => Exit::new(GENERIC, e.to_string()),
            None => Exit::new(
                VALIDATION_FAILED,
                format!("no usable recipe after {} attempts", outcome.attempts.len()),
            ),
        }
    }

    /// Syntax errors carry a caret line.
    pub fn query(e: &QueryError, text: &str) -> Self {
        match e.caret(text) {
            Some(caret) => Exit::new(QUERY_SYNTAX, format!("{e}\n{caret}")),
            None => Exit::new(QUERY_EVAL, e.to_string()),
        }
    }
}

impl From<anyhow::Error> for Exit {
    fn from(e: anyhow::Error) -> Self {
        Exit::new(GENERIC, format!("{e:#}"))
    }
}
