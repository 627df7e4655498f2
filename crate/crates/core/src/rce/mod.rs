//! The robot control executive: walk an asserted recipe's chain, check
//! capabilities, resolve and parametrize API calls with graph queries and
//! hand each call to an executor.
//!
//! Every question the loop asks the graph is one of the query texts below,
//! run through the same parser and solver as the REPL with `Task` pre-bound.

mod executor;

pub use executor::{ExecError, Executor, SimulatedExecutor};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write as _};

use crate::namespace::Namespaces;
use crate::query::{self, parse_query, Binding, Direction, QueryError};
use crate::recipe::{first_action, next_action, OrderError};
use crate::store::Graph;
use crate::term::{Iri, Term};
use crate::twin::{DigitalTwin, RobotProfile};
use crate::vocab;

/// Who performs the task and what that robot can do.
pub const CAPABILITY_QUERY: &str = "?-rdf(Task, rdfs:subClassOf, Restriction),
 rdf(Restriction, owl:onProperty, knowrob:'performedBy'),
 rdf(Restriction, owl:hasValue, Robot),
 rdf(Robot, srdl2:'hasCapability', Capability).";

/// The performer alone, so a robot without capabilities still counts.
pub const PERFORMER_QUERY: &str = "?-rdf(Task, rdfs:subClassOf, Restriction),
 rdf(Restriction, owl:onProperty, knowrob:'performedBy'),
 rdf(Restriction, owl:hasValue, Robot).";

/// Capabilities the task's action types demand.
pub const REQUIRED_CAPABILITY_QUERY: &str = "?-rdf_reachable(Task, rdfs:subClassOf, ActionType),
 rdf(ActionType, srdl2:'requiresCapability', Capability).";

/// Function and parameter names along the task's superclasses.
pub const API_QUERY: &str = "?- rdf_reachable(Task, rdfs:subClassOf, ActionType),
 rdf(ActionType, roboearth:'apiFunction', ApiFunction),
 rdf(ActionType, roboearth:'apiParameter', ApiParameter).";

/// [`API_QUERY`] without the parameter goal, for functions that take none.
pub const API_FUNCTION_QUERY: &str = "?- rdf_reachable(Task, rdfs:subClassOf, ActionType),
 rdf(ActionType, roboearth:'apiFunction', ApiFunction).";

pub const OBJECT_LOCATION_QUERY: &str = "?-rdf(Task, rdfs:subClassOf, Restriction),
 rdf(Restriction, owl:onProperty, knowrob:'objectActedOn'),
 rdf(Restriction, owl:hasValue, Object),
 rdf(Object, knowrob:'location', Loc).";

/// The comma missing after the type goal in the published listing is restored.
pub const TARGET_LOCATION_QUERY: &str = "?-rdf(Task, rdfs:subClassOf, Restriction),
 rdf(Restriction, owl:onProperty, knowrob:'toLocation'),
 rdf(Restriction, owl:hasValue, Furniture),
 rdf(Furniture, rdf:type, knowrob:'Bed-PieceOfFurniture'),
 rdf(Furniture, knowrob:'location', Loc).";

fn join(iris: &[Iri]) -> String {
    iris.iter().map(|i| i.local_name()).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RceError {
    #[error("capability mismatch at {}: missing {}", .task.local_name(), join(.missing))]
    CapabilityMismatch { task: Iri, missing: Vec<Iri> },
    #[error("no apiFunction on {} or its superclasses", .0.local_name())]
    UnresolvedApi(Iri),
    #[error("cannot fill parameter `{slot}` of {}", .task.local_name())]
    ParametrizationFailure { task: Iri, slot: String },
    #[error("executor failed at {}: {source}", .task.local_name())]
    ExecutorFailure { task: Iri, source: ExecError },
    #[error(transparent)]
    Ordering(#[from] OrderError),
    #[error(transparent)]
    Query(#[from] QueryError),
}

impl RceError {
    /// The subaction the error is about, if any.
    pub fn task(&self) -> Option<&Iri> {
        match self {
            RceError::CapabilityMismatch { task, .. }
            | RceError::ParametrizationFailure { task, .. }
            | RceError::ExecutorFailure { task, .. } => Some(task),
            RceError::UnresolvedApi(task) => Some(task),
            RceError::Ordering(_) | RceError::Query(_) => None,
        }
    }
}

/// An API call, or its skeleton when the parameters are still empty.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ApiCall {
    pub function: String,
    /// The action type that supplied `function`.
    pub action_type: Iri,
    /// Parameter names in the order the ontology lists them.
    pub slots: Vec<String>,
    pub parameters: BTreeMap<String, Term>,
}

impl ApiCall {
    /// The IRI bound to `slot`, if any.
    pub fn iri(&self, slot: &str) -> Option<&Iri> {
        self.parameters.get(slot).and_then(Term::as_iri)
    }

    /// `grasp(object=roboearth:huawei_mug_1, object_location=roboearth:table_1)`
    pub fn render(&self, ns: &Namespaces) -> String {
        let args: Vec<String> = self
            .slots
            .iter()
            .filter_map(|s| self.parameters.get(s).map(|v| format!("{s}={}", ns.render(v))))
            .collect();
        format!("{}({})", self.function, args.join(", "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapabilityCheck {
    pub performer: Option<Iri>,
    pub required: BTreeSet<Iri>,
    pub missing: BTreeSet<Iri>,
}

impl CapabilityCheck {
    pub fn ok(&self) -> bool {
        self.missing.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub task: Iri,
    pub capabilities_checked: BTreeSet<Iri>,
    pub call: ApiCall,
    pub effect: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    Aborted(RceError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExecutionTrace {
    pub root: Iri,
    pub steps: Vec<TraceStep>,
    pub status: RunStatus,
}

impl ExecutionTrace {
    pub fn completed(&self) -> bool {
        self.status == RunStatus::Completed
    }

    pub fn tasks(&self) -> Vec<Iri> {
        self.steps.iter().map(|s| s.task.clone()).collect()
    }

    pub fn error(&self) -> Option<&RceError> {
        match &self.status {
            RunStatus::Aborted(e) => Some(e),
            RunStatus::Completed => None,
        }
    }

    /// One line per step, then a status line.
    pub fn render(&self, ns: &Namespaces) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "recipe {}", ns.curie(&self.root));
        for (i, s) in self.steps.iter().enumerate() {
            let caps: Vec<String> = s.capabilities_checked.iter().map(|c| ns.curie(c)).collect();
            let _ = writeln!(
                out,
                "step {} task={} capabilities=[{}] call={} effect=\"{}\"",
                i + 1,
                ns.curie(&s.task),
                caps.join(", "),
                s.call.render(ns),
                s.effect
            );
        }
        match &self.status {
            RunStatus::Completed => out.push_str("status completed\n"),
            RunStatus::Aborted(e) => {
                let task = e.task().map(|t| ns.curie(t)).unwrap_or_else(|| "-".into());
                let _ = writeln!(out, "status aborted task={task} reason=\"{e}\"");
            }
        }
        out
    }
}

impl fmt::Display for ExecutionTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(&Namespaces::default()))
    }
}

/// Run one of the query texts with `Task` bound.
fn ask(g: &Graph, text: &str, task: &Iri) -> Result<Vec<Binding>, QueryError> {
    let q = parse_query(text, g.namespaces())?;
    let mut init = Binding::new();
    init.insert("Task", task.into());
    query::solve_with(&q, g, init).collect_distinct()
}

fn iri_of<'b>(b: &'b Binding, var: &str) -> Option<&'b Iri> {
    b.get(var).and_then(Term::as_iri)
}

pub fn match_capabilities(task: &Iri, robot: &RobotProfile, g: &Graph) -> Result<CapabilityCheck, RceError> {
    let performers: BTreeSet<Iri> = ask(g, PERFORMER_QUERY, task)?
        .iter()
        .filter_map(|b| iri_of(b, "Robot").cloned())
        .collect();
    let Some(performer) = performers.into_iter().next() else {
        log::warn!("{} has no performedBy restriction; nothing required", task.local_name());
        return Ok(CapabilityCheck {
            performer: None,
            required: BTreeSet::new(),
            missing: BTreeSet::new(),
        });
    };
    if performer != robot.iri {
        log::warn!(
            "{} is performed by {}, checking against {}",
            task.local_name(),
            performer.local_name(),
            robot.iri.local_name()
        );
    }
    let required: BTreeSet<Iri> = ask(g, REQUIRED_CAPABILITY_QUERY, task)?
        .iter()
        .filter_map(|b| iri_of(b, "Capability").cloned())
        .collect();
    let missing = required.difference(&robot.capabilities).cloned().collect();
    Ok(CapabilityCheck {
        performer: Some(performer),
        required,
        missing,
    })
}

/// The nearest superclass (fewest subClassOf hops, then smallest IRI) that
/// names an API function, with its parameter slots.
pub fn resolve_api(task: &Iri, g: &Graph) -> Result<ApiCall, RceError> {
    let depth: BTreeMap<Term, usize> = query::reachable(
        g,
        &task.into(),
        &vocab::sub_class_of().into(),
        Direction::Forward,
    )
    .into_iter()
    .collect();
    let mut best: Option<(usize, Iri, String)> = None;
    for b in ask(g, API_FUNCTION_QUERY, task)? {
        let (Some(Term::Iri(ty)), Some(f)) = (b.get("ActionType"), b.get("ApiFunction").and_then(Term::literal_value))
        else {
            continue;
        };
        let d = depth.get(&Term::Iri(ty.clone())).copied().unwrap_or(usize::MAX);
        let better = match &best {
            None => true,
            Some((bd, bt, _)) => (d, ty) < (*bd, bt),
        };
        if better {
            best = Some((d, ty.clone(), f.to_string()));
        }
    }
    let (_, action_type, function) = best.ok_or_else(|| RceError::UnresolvedApi(task.clone()))?;
    let mut slots = Vec::new();
    for b in ask(g, API_QUERY, task)? {
        if iri_of(&b, "ActionType") != Some(&action_type) {
            continue;
        }
        if let Some(p) = b.get("ApiParameter").and_then(Term::literal_value) {
            if !slots.iter().any(|s| s == p) {
                slots.push(p.to_string());
            }
        }
    }
    Ok(ApiCall {
        function,
        action_type,
        slots,
        parameters: BTreeMap::new(),
    })
}

/// Fill every slot from the object-location and target-location queries.
pub fn parametrize(task: &Iri, skeleton: &ApiCall, g: &Graph) -> Result<ApiCall, RceError> {
    let mut call = skeleton.clone();
    let mut object_rows: Option<Vec<Binding>> = None;
    let mut target_rows: Option<Vec<Binding>> = None;
    for slot in &skeleton.slots {
        let (rows, var) = match slot.as_str() {
            "object" | "object_location" => {
                if object_rows.is_none() {
                    object_rows = Some(ask(g, OBJECT_LOCATION_QUERY, task)?);
                }
                (object_rows.as_ref(), if slot == "object" { "Object" } else { "Loc" })
            }
            "target" | "target_location" => {
                if target_rows.is_none() {
                    target_rows = Some(ask(g, TARGET_LOCATION_QUERY, task)?);
                }
                (target_rows.as_ref(), if slot == "target" { "Furniture" } else { "Loc" })
            }
            _ => (None, ""),
        };
        let value = rows
            .and_then(|r| r.first())
            .and_then(|b| b.get(var))
            .cloned()
            .ok_or_else(|| RceError::ParametrizationFailure {
                task: task.clone(),
                slot: slot.clone(),
            })?;
        call.parameters.insert(slot.clone(), value);
    }
    Ok(call)
}

/// Capability check, API resolution and parametrization for one subaction.
fn prepare(task: &Iri, twin: &DigitalTwin, g: &Graph) -> Result<(BTreeSet<Iri>, ApiCall), RceError> {
    let check = match_capabilities(task, &twin.robot, g)?;
    if !check.ok() {
        return Err(RceError::CapabilityMismatch {
            task: task.clone(),
            missing: check.missing.into_iter().collect(),
        });
    }
    let skeleton = resolve_api(task, g)?;
    let call = parametrize(task, &skeleton, g)?;
    Ok((check.required, call))
}

/// Execute the recipe rooted at `root`. Each step runs against copies of the
/// twin and graph that replace the originals only when the step succeeds,
/// so an aborted run leaves the state of the last good step behind.
pub fn run(root: &Iri, g: &mut Graph, twin: &mut DigitalTwin, executor: &mut dyn Executor) -> ExecutionTrace {
    let mut trace = ExecutionTrace {
        root: root.clone(),
        steps: Vec::new(),
        status: RunStatus::Completed,
    };
    let mut action = match first_action(root, g) {
        Ok(a) => a,
        Err(e) => {
            trace.status = RunStatus::Aborted(e.into());
            return trace;
        }
    };
    let mut visited = Vec::new();
    while let Some(task) = action {
        if visited.contains(&task) {
            visited.push(task);
            trace.status = RunStatus::Aborted(OrderError::CyclicOrdering(visited).into());
            return trace;
        }
        let step = prepare(&task, twin, g).and_then(|(caps, call)| {
            let mut twin2 = twin.clone();
            let mut g2 = g.clone();
            let effect = executor
                .execute(&call, &mut twin2, &mut g2)
                .map_err(|source| RceError::ExecutorFailure {
                    task: task.clone(),
                    source,
                })?;
            *twin = twin2;
            *g = g2;
            Ok(TraceStep {
                task: task.clone(),
                capabilities_checked: caps,
                call,
                effect,
            })
        });
        match step {
            Ok(s) => {
                log::info!("{}: {}", s.call.function, s.effect);
                trace.steps.push(s);
            }
            Err(e) => {
                log::warn!("abort: {e}");
                trace.status = RunStatus::Aborted(e);
                return trace;
            }
        }
        visited.push(task.clone());
        action = match next_action(&task, g) {
            Ok(a) => a,
            Err(e) => {
                trace.status = RunStatus::Aborted(e.into());
                return trace;
            }
        };
    }
    trace
}

#[cfg(test)]
mod tests;
