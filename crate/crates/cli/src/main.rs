//! `recipekg`: load a scene, turn prompts into recipes, run them, query the
//! graph, and measure usability.

mod config;
mod exit;

use std::io::{BufRead, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Parser, Subcommand};
use recipekg::engine::Engine;
use recipekg::generator::{Backend, FaultInjector, GenerationOutcome, LlmBackend, TemplatePlanner};
use recipekg::query::{parse_term, Binding};
use recipekg::rce::SimulatedExecutor;
use recipekg::term::{Iri, Term};

use config::{BackendKind, EngineConfig, Overrides, SceneSource};
use exit::Exit;

#[derive(Debug, Parser)]
#[command(name = "recipekg", version, about = "Prompt-to-recipe pipeline over a robot knowledge graph")]
struct Cli {
    /// TOML config file.
    #[arg(long, global = true, env = "RECIPEKG_CONFIG")]
    config: Option<PathBuf>,
    /// Directory for prompt artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed for the fault injector.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    backend: Option<BackendKind>,
    /// Corruption probability for `--backend fault`.
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Bundled scene name (`loft`, `kitchen`) or a scene TOML path.
    #[arg(long, global = true)]
    scene: Option<String>,
    /// Base ontology in N-Triples; the bundled one when omitted.
    #[arg(long, global = true)]
    base: Option<PathBuf>,
    #[arg(long, global = true)]
    max_attempts: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Load the ontology and scene and print a summary.
    Load,
    /// Generate, validate, assert and execute; several prompts share one session.
    Prompt {
        #[arg(required = true)]
        prompts: Vec<String>,
    },
    /// Validate a recipe document against the scene.
    Validate { recipe: PathBuf },
    /// Execute an asserted recipe by its root class.
    Execute {
        root: String,
        /// Assert this recipe document first.
        #[arg(long)]
        recipe: Option<PathBuf>,
    },
    /// Run one query, or read one query per line from stdin.
    Query {
        text: Option<String>,
        /// Pre-bind a variable, e.g. `--bind Loc=roboearth:table_1`.
        #[arg(long = "bind", value_name = "VAR=TERM")]
        bindings: Vec<String>,
        /// Assert this recipe document first.
        #[arg(long)]
        recipe: Option<PathBuf>,
    },
    /// Single-attempt usability over N trials.
    Bench {
        prompt: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Exit> {
    let flags = Overrides {
        base_ontology: cli.base,
        scene: cli.scene,
        out: cli.out,
        seed: cli.seed,
        backend: cli.backend,
        p: cli.p,
        max_attempts: cli.max_attempts,
    };
    let cfg = EngineConfig::resolve(cli.config.as_deref(), flags).map_err(Exit::config)?;
    let mut engine = load(&cfg)?;
    let mut stdout = std::io::stdout().lock();

    match cli.command {
        Command::Load => {
            write!(stdout, "{}", engine.summary().render(engine.namespaces())).map_err(Exit::io)?;
            Ok(())
        }
        Command::Prompt { prompts } => {
            let mut backend = backend(&cfg)?;
            let several = prompts.len() > 1;
            for (i, prompt) in prompts.iter().enumerate() {
                let dir = if several { cfg.out.join((i + 1).to_string()) } else { cfg.out.clone() };
                let outcome = run_prompt(&mut engine, prompt, &mut *backend, &cfg, &dir)?;
                writeln!(stdout, "{prompt}: {}", outcome.summary).map_err(Exit::io)?;
                if let Some(e) = outcome.failure {
                    return Err(e);
                }
            }
            Ok(())
        }
        Command::Validate { recipe } => {
            let text = read(&recipe)?;
            let (report, _) = engine.validate(&text);
            write!(stdout, "{}", report.render(engine.namespaces())).map_err(Exit::io)?;
            if report.usable {
                Ok(())
            } else {
                Err(Exit::new(exit::VALIDATION_FAILED, format!("{} is not usable", recipe.display())))
            }
        }
        Command::Execute { root, recipe } => {
            if let Some(path) = recipe {
                assert_file(&mut engine, &path, &mut stdout)?;
            }
            let root = parse_iri(&root, &engine)?;
            let trace = engine.execute(&root, &mut SimulatedExecutor);
            write!(stdout, "{}", trace.render(engine.namespaces())).map_err(Exit::io)?;
            match trace.error() {
                None => Ok(()),
                Some(e) => Err(Exit::rce(e)),
            }
        }
        Command::Query { text, bindings, recipe } => {
            if let Some(path) = recipe {
                assert_file(&mut engine, &path, &mut stdout)?;
            }
            let mut initial = Binding::new();
            for b in &bindings {
                let (var, value) = parse_binding(b, &engine)?;
                initial.insert(var, value);
            }
            match text {
                Some(text) => {
                    let answer = engine.query(&text, &initial).map_err(|e| Exit::query(&e, &text))?;
                    write!(stdout, "{}", answer.render(engine.namespaces())).map_err(Exit::io)?;
                    Ok(())
                }
                None => repl(&mut engine, &initial, &mut stdout),
            }
        }
        Command::Bench { prompt, trials } => {
            let mut backend = backend(&cfg)?;
            let row = engine.bench(&prompt, trials, &mut *backend);
            writeln!(stdout, "prompt | trials | usable").map_err(Exit::io)?;
            writeln!(stdout, "{row}").map_err(Exit::io)?;
            for (reason, n) in &row.failures {
                writeln!(stdout, "  {reason}: {n}").map_err(Exit::io)?;
            }
            Ok(())
        }
    }
}

fn read(path: &Path) -> Result<String, Exit> {
    std::fs::read_to_string(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .map_err(|e| Exit::new(exit::LOAD, format!("{e:#}")))
}

/// Validate and assert a recipe document; an unusable one prints its report.
fn assert_file(engine: &mut Engine, path: &Path, out: &mut impl std::io::Write) -> Result<(), Exit> {
    let (report, asserted) = engine.assert_text(&read(path)?);
    if asserted.is_some() {
        return Ok(());
    }
    write!(out, "{}", report.render(engine.namespaces())).map_err(Exit::io)?;
    Err(Exit::new(exit::VALIDATION_FAILED, format!("{} is not usable", path.display())))
}

fn load(cfg: &EngineConfig) -> Result<Engine, Exit> {
    let base = match &cfg.base_ontology {
        Some(p) => read(p)?,
        None => recipekg::fixtures::BASE_ONTOLOGY.to_string(),
    };
    let scene = match &cfg.scene {
        SceneSource::File(p) => read(p)?,
        SceneSource::Bundled(name) => match name.as_str() {
            "kitchen" => recipekg::fixtures::KITCHEN_SCENE.to_string(),
            _ => recipekg::fixtures::LOFT_SCENE.to_string(),
        },
    };
    let mut engine = Engine::load(&base, &scene).map_err(|e| Exit::new(exit::LOAD, e.to_string()))?;
    for (prefix, uri) in &cfg.namespaces {
        for g in [&mut engine.graph, &mut engine.base] {
            g.namespaces_mut()
                .register(prefix, uri)
                .map_err(|e| Exit::new(exit::LOAD, format!("namespace {prefix}: {e}")))?;
        }
    }
    engine.retrieval_k = cfg.retrieval_k;
    log::info!("loaded {} triples", engine.graph.len());
    Ok(engine)
}

fn backend(cfg: &EngineConfig) -> Result<Box<dyn Backend>, Exit> {
    let template = TemplatePlanner::new(cfg.intents.clone());
    Ok(match cfg.backend {
        BackendKind::Template => Box::new(template),
        BackendKind::Fault => Box::new(FaultInjector::new(template, cfg.p, cfg.seed)),
        BackendKind::Llm => Box::new(LlmBackend::new(cfg.llm.clone()).map_err(|e| Exit::new(exit::GENERIC, e.to_string()))?),
    })
}

struct PromptResult {
    summary: String,
    failure: Option<Exit>,
}

/// Generate and execute one prompt, writing recipe.xml, report.txt and
/// trace.log into `dir`.
fn run_prompt(
    engine: &mut Engine,
    prompt: &str,
    backend: &mut dyn Backend,
    cfg: &EngineConfig,
    dir: &Path,
) -> Result<PromptResult, Exit> {
    let run = engine.prompt(prompt, backend, cfg.max_attempts, &mut SimulatedExecutor);
    let ns = engine.namespaces().clone();
    let recipe_text = run.outcome.last().map(|a| a.text.clone()).unwrap_or_default();
    let report = render_report(prompt, backend.name(), &run.outcome, &ns);

    let (summary, failure, trace_log) = match &run.trace {
        Some(trace) => {
            let text = trace.render(&ns);
            match trace.error() {
                None => (format!("completed {} steps", trace.steps.len()), None, text),
                Some(e) => (format!("aborted: {e}"), Some(Exit::rce(e)), text),
            }
        }
        None => {
            let e = Exit::generation(&run.outcome);
            (format!("not executed: {}", e.message), Some(e.clone()), format!("not executed: {}\n", e.message))
        }
    };

    std::fs::create_dir_all(dir)
        .with_context(|| format!("cannot create {}", dir.display()))
        .map_err(Exit::from)?;
    for (name, body) in [("recipe.xml", &recipe_text), ("report.txt", &report), ("trace.log", &trace_log)] {
        let path = dir.join(name);
        std::fs::write(&path, body)
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(Exit::from)?;
    }
    Ok(PromptResult { summary, failure })
}

fn render_report(prompt: &str, backend: &str, outcome: &GenerationOutcome, ns: &recipekg::namespace::Namespaces) -> String {
    let mut out = format!("prompt: {prompt}\nbackend: {backend}\nattempts: {}\n", outcome.attempts.len());
    for (i, a) in outcome.attempts.iter().enumerate() {
        out.push_str(&format!("\nattempt {}\n", i + 1));
        if let Some(e) = &a.error {
            out.push_str(&format!("error: {e}\n"));
        }
        out.push_str(&a.report.render(ns));
    }
    out.push_str(&format!("\nresult: {}\n", if outcome.succeeded { "usable" } else { "unusable" }));
    out
}

fn parse_iri(text: &str, engine: &Engine) -> Result<Iri, Exit> {
    match parse_term(text, engine.namespaces()) {
        Ok(Term::Iri(iri)) => Ok(iri),
        Ok(other) => Err(Exit::new(exit::USAGE, format!("expected an IRI, got {other}"))),
        Err(e) => Err(Exit::query(&e, text)),
    }
}

fn parse_binding(spec: &str, engine: &Engine) -> Result<(String, Term), Exit> {
    let (var, value) = spec
        .split_once('=')
        .ok_or_else(|| Exit::new(exit::USAGE, format!("--bind expects VAR=TERM, got `{spec}`")))?;
    let var = var.trim();
    if !var.chars().next().is_some_and(|c| c.is_ascii_uppercase()) {
        return Err(Exit::new(exit::USAGE, format!("`{var}` is not a variable name")));
    }
    let term = parse_term(value.trim(), engine.namespaces()).map_err(|e| Exit::query(&e, value.trim()))?;
    Ok((var.to_string(), term))
}

/// One query per line; bindings do not carry over between lines, assertions
/// do. Errors are printed and the loop continues.
fn repl(engine: &mut Engine, initial: &Binding, out: &mut impl std::io::Write) -> Result<(), Exit> {
    let stdin = std::io::stdin();
    let mut failed = None;
    for line in stdin.lock().lines() {
        let line = line.map_err(Exit::io)?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('%') {
            continue;
        }
        match engine.query(text, initial) {
            Ok(answer) => write!(out, "{}", answer.render(engine.namespaces())).map_err(Exit::io)?,
            Err(e) => {
                let exit = Exit::query(&e, text);
                writeln!(out, "{}", exit.message).map_err(Exit::io)?;
                failed = Some(exit);
            }
        }
    }
    match failed {
        Some(e) => Err(Exit::new(e.code, "at least one query failed".into())),
        None => Ok(()),
    }
}
