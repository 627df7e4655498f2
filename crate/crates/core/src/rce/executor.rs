//! Executors turn a parametrized call into effects. The simulated one
//! applies a fixed effect table to the twin and graph; a robot backend would
//! implement the same trait.

use super::ApiCall;
use crate::store::Graph;
use crate::term::Iri;
use crate::twin::{
    apply_perception, move_robot, robot_gripper, update_location, user_handover, DigitalTwin, Observation,
    TwinError,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExecError {
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("unknown API function `{0}`")]
    UnknownFunction(String),
    #[error("{function} needs an IRI for parameter `{slot}`")]
    MissingParameter { function: String, slot: String },
    #[error(transparent)]
    Twin(#[from] TwinError),
    #[error("{0}")]
    Failed(String),
}

pub trait Executor {
    /// Carry out `call`, updating `twin` and `g` together. Returns a short
    /// description of the effect.
    fn execute(&mut self, call: &ApiCall, twin: &mut DigitalTwin, g: &mut Graph) -> Result<String, ExecError>;
}

/// The effect table:
///
/// | function | effect |
/// |---|---|
/// | `move_base(target)` | robot pose := target |
/// | `move_to_handover` | robot pose := user_handover |
/// | `grasp(object)` | needs robot pose = object location; object := robot_gripper |
/// | `open_gripper(object)`, `handover(object)` | object := user_handover |
/// | `place(object, target)` | object := target |
/// | `perceive(target)` | perception event over the objects at target, one tick later |
#[derive(Debug, Clone, Copy, Default)]
pub struct SimulatedExecutor;

fn param<'c>(call: &'c ApiCall, slot: &str) -> Result<&'c Iri, ExecError> {
    call.iri(slot).ok_or_else(|| ExecError::MissingParameter {
        function: call.function.clone(),
        slot: slot.to_string(),
    })
}

impl Executor for SimulatedExecutor {
    fn execute(&mut self, call: &ApiCall, twin: &mut DigitalTwin, g: &mut Graph) -> Result<String, ExecError> {
        let robot = twin.robot.iri.local_name().to_string();
        match call.function.as_str() {
            "move_base" => {
                let target = param(call, "target")?;
                move_robot(twin, g, target)?;
                Ok(format!("{robot} at {}", target.local_name()))
            }
            "move_to_handover" => {
                move_robot(twin, g, &user_handover())?;
                Ok(format!("{robot} at user_handover"))
            }
            "grasp" => {
                let obj = param(call, "object")?;
                let at = twin
                    .location_of(obj)
                    .cloned()
                    .ok_or_else(|| TwinError::UnknownObject(obj.clone()))?;
                if twin.robot.location.as_ref() != Some(&at) {
                    let pose = twin.robot.location.as_ref().map_or("nowhere", |l| l.local_name());
                    return Err(ExecError::PreconditionViolation(format!(
                        "{robot} is at {pose}, {} is at {}",
                        obj.local_name(),
                        at.local_name()
                    )));
                }
                update_location(twin, g, obj, &robot_gripper())?;
                Ok(format!("{} in robot_gripper", obj.local_name()))
            }
            "open_gripper" | "handover" => {
                let obj = param(call, "object")?;
                update_location(twin, g, obj, &user_handover())?;
                Ok(format!("{} at user_handover", obj.local_name()))
            }
            "place" => {
                let obj = param(call, "object")?;
                let target = param(call, "target")?;
                update_location(twin, g, obj, target)?;
                Ok(format!("{} at {}", obj.local_name(), target.local_name()))
            }
            "perceive" => {
                let target = param(call, "target")?;
                let seen: Vec<Observation> = twin
                    .objects_at(target)
                    .map(|o| Observation {
                        iri: o.iri.clone(),
                        type_iri: o.type_iri.clone(),
                        location: target.clone(),
                    })
                    .collect();
                let time = twin.clock + 1;
                let asserted = apply_perception(twin, g, target, &seen, time)?;
                Ok(format!(
                    "perceived {} objects at {} ({asserted} triples)",
                    seen.len(),
                    target.local_name()
                ))
            }
            other => Err(ExecError::UnknownFunction(other.to_string())),
        }
    }
}
