//! `recipekg.toml` and how it combines with command-line flags.
//!
//! ```toml
//! base_ontology = "ontology/base.nt"   # bundled ontology when omitted
//! scene = "loft"                       # bundled name or a path
//! max_attempts = 5
//! out = "out"
//!
//! [namespaces]
//! ex = "http://example.org/"
//!
//! [backend]
//! kind = "fault"
//! p = 0.12
//! seed = 7
//!
//! [backend.llm]
//! endpoint = "http://127.0.0.1:8080/generate"
//! ```
//!
//! Relative paths resolve against the config file's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use recipekg::generator::{IntentRules, LlmConfig, DEFAULT_MAX_ATTEMPTS};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Template,
    Llm,
    Fault,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendSection {
    pub kind: Option<BackendKind>,
    pub p: Option<f64>,
    pub seed: Option<u64>,
    pub llm: LlmConfig,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub base_ontology: Option<PathBuf>,
    pub scene: Option<String>,
    pub namespaces: BTreeMap<String, String>,
    pub max_attempts: Option<usize>,
    pub retrieval_k: Option<usize>,
    pub out: Option<PathBuf>,
    pub backend: BackendSection,
    pub intents: Option<IntentRules>,
}

/// Where the scene comes from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SceneSource {
    Bundled(String),
    File(PathBuf),
}

/// Flags that override the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub base_ontology: Option<PathBuf>,
    pub scene: Option<String>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub backend: Option<BackendKind>,
    pub p: Option<f64>,
    pub max_attempts: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    /// `None` means the bundled ontology.
    pub base_ontology: Option<PathBuf>,
    pub scene: SceneSource,
    pub namespaces: BTreeMap<String, String>,
    pub backend: BackendKind,
    pub p: f64,
    pub seed: u64,
    pub llm: LlmConfig,
    pub intents: IntentRules,
    pub max_attempts: usize,
    pub retrieval_k: usize,
    pub out: PathBuf,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{what} not found: {path}")]
    Missing { what: &'static str, path: PathBuf },
    #[error("fault probability must lie in [0, 1], got {0}")]
    Probability(f64),
    #[error("max_attempts must be at least 1")]
    Attempts,
}

impl ConfigError {
    /// Bad values are usage errors; unreadable inputs are load errors.
    pub fn is_usage(&self) -> bool {
        matches!(self, ConfigError::Probability(_) | ConfigError::Attempts)
    }
}

impl EngineConfig {
    pub fn resolve(file: Option<&Path>, flags: Overrides) -> Result<Self, ConfigError> {
        let (fc, dir) = match file {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
                    path: path.to_path_buf(),
                    source,
                })?;
                let fc: FileConfig = toml::from_str(&text).map_err(|e| ConfigError::Parse {
                    path: path.to_path_buf(),
                    message: e.to_string(),
                })?;
                (fc, path.parent().map(Path::to_path_buf).unwrap_or_default())
            }
            None => (FileConfig::default(), PathBuf::new()),
        };
        let rel = |p: PathBuf| if p.is_absolute() { p } else { dir.join(p) };

        let base_ontology = match flags.base_ontology.or_else(|| fc.base_ontology.map(&rel)) {
            Some(p) if !p.is_file() => {
                return Err(ConfigError::Missing {
                    what: "base ontology",
                    path: p,
                })
            }
            other => other,
        };
        let scene = match (flags.scene, fc.scene) {
            (Some(s), _) => scene_source(&s, PathBuf::from(&s))?,
            (None, Some(s)) => scene_source(&s, rel(PathBuf::from(&s)))?,
            (None, None) => SceneSource::Bundled("loft".into()),
        };
        let p = flags.p.or(fc.backend.p).unwrap_or(0.0);
        if !(0.0..=1.0).contains(&p) {
            return Err(ConfigError::Probability(p));
        }
        let max_attempts = flags.max_attempts.or(fc.max_attempts).unwrap_or(DEFAULT_MAX_ATTEMPTS);
        if max_attempts == 0 {
            return Err(ConfigError::Attempts);
        }
        Ok(EngineConfig {
            base_ontology,
            scene,
            namespaces: fc.namespaces,
            backend: flags.backend.or(fc.backend.kind).unwrap_or(BackendKind::Template),
            p,
            seed: flags.seed.or(fc.backend.seed).unwrap_or(0),
            llm: fc.backend.llm.with_env_override(),
            intents: fc.intents.unwrap_or_default(),
            max_attempts,
            retrieval_k: fc.retrieval_k.unwrap_or(recipekg::engine::DEFAULT_RETRIEVAL_K),
            out: flags.out.or_else(|| fc.out.map(&rel)).unwrap_or_else(|| PathBuf::from("out")),
        })
    }
}

/// An existing file wins; otherwise a bundled scene name; otherwise an error
/// naming the path.
fn scene_source(raw: &str, path: PathBuf) -> Result<SceneSource, ConfigError> {
    if path.is_file() {
        Ok(SceneSource::File(path))
    } else if recipekg::fixtures::scene(raw).is_some() {
        Ok(SceneSource::Bundled(raw.to_string()))
    } else {
        Err(ConfigError::Missing { what: "scene", path })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn defaults_without_a_file() {
        let c = EngineConfig::resolve(None, Overrides::default()).unwrap();
        assert_eq!(c.scene, SceneSource::Bundled("loft".into()));
        assert_eq!(c.backend, BackendKind::Template);
        assert_eq!(c.max_attempts, DEFAULT_MAX_ATTEMPTS);
        assert_eq!(c.p, 0.0);
        assert!(c.base_ontology.is_none());
    }

    #[test]
    fn flags_beat_the_file_and_paths_are_relative_to_it() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), "scene.toml", recipekg::fixtures::KITCHEN_SCENE);
        let cfg = write(
            dir.path(),
            "recipekg.toml",
            "scene = \"scene.toml\"\nmax_attempts = 3\n[backend]\nkind = \"fault\"\np = 0.2\nseed = 4\n[namespaces]\nex = \"http://example.org/\"\n",
        );
        let c = EngineConfig::resolve(Some(&cfg), Overrides::default()).unwrap();
        assert_eq!(c.scene, SceneSource::File(dir.path().join("scene.toml")));
        assert_eq!((c.backend, c.p, c.seed, c.max_attempts), (BackendKind::Fault, 0.2, 4, 3));
        assert_eq!(c.namespaces["ex"], "http://example.org/");

        let flags = Overrides {
            seed: Some(9),
            p: Some(0.5),
            scene: Some("kitchen".into()),
            ..Overrides::default()
        };
        let c = EngineConfig::resolve(Some(&cfg), flags).unwrap();
        assert_eq!((c.p, c.seed), (0.5, 9));
        assert_eq!(c.scene, SceneSource::Bundled("kitchen".into()));
    }

    #[test]
    fn bad_values_are_rejected() {
        let missing = Overrides {
            scene: Some("nowhere/scene.toml".into()),
            ..Overrides::default()
        };
        let err = EngineConfig::resolve(None, missing).unwrap_err();
        assert!(err.to_string().contains("nowhere/scene.toml"), "{err}");
        assert!(!err.is_usage());

        let p = Overrides {
            p: Some(1.5),
            ..Overrides::default()
        };
        assert!(EngineConfig::resolve(None, p).unwrap_err().is_usage());

        let dir = tempfile::tempdir().unwrap();
        let cfg = write(dir.path(), "c.toml", "sceen = \"loft\"\n");
        assert!(matches!(
            EngineConfig::resolve(Some(&cfg), Overrides::default()),
            Err(ConfigError::Parse { .. })
        ));
    }
}
