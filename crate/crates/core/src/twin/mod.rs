//! The digital twin: a symbolic semantic map of the scene and the robot.
//!
//! The twin mirrors what the graph says about object locations and the
//! robot; every mutation here updates both sides.

mod perception;
mod retrieval;
mod scene;

pub use perception::{apply_perception, move_robot, update_location, Observation, PerceptionRecord};
pub use retrieval::{retrieve, retrieve_with, tokenize, LexicalScorer, RetrievalContext, Scorer};
pub use scene::{load_scene, SceneFile};

use std::collections::BTreeSet;

use crate::namespace::NamespaceError;
use crate::query::QueryError;
use crate::store::{Graph, StoreError};
use crate::term::{Iri, Term, Triple};
use crate::vocab;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SceneObject {
    pub iri: Iri,
    pub type_iri: Iri,
    pub location: Iri,
    /// Lowercase words used by retrieval.
    pub descriptors: Vec<String>,
    pub label: String,
}

/// A piece of furniture or a region of the environment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Place {
    pub iri: Iri,
    pub type_iri: Iri,
    pub label: String,
    /// The enclosing region, if any.
    pub location: Option<Iri>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RobotProfile {
    pub iri: Iri,
    pub capabilities: BTreeSet<Iri>,
    /// Current base pose, as a place.
    pub location: Option<Iri>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitalTwin {
    pub objects: Vec<SceneObject>,
    pub furniture: Vec<Place>,
    pub regions: Vec<Place>,
    pub robot: RobotProfile,
    pub clock: i64,
    pub perceptions: Vec<PerceptionRecord>,
    /// Extra prefixes the scene file declared.
    pub namespaces: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TwinError {
    #[error("scene schema error at `{path}`: {message}")]
    Schema { path: String, message: String },
    #[error("object {object} is located at undeclared {location}")]
    DanglingLocation { object: Iri, location: Iri },
    #[error("duplicate individual {0} in scene")]
    Duplicate(Iri),
    #[error("unknown object {0}")]
    UnknownObject(Iri),
    #[error("unknown location {0}")]
    UnknownLocation(Iri),
    #[error("timestamp {time} is older than the twin clock {clock}")]
    StaleTimestamp { time: i64, clock: i64 },
    #[error(transparent)]
    Namespace(#[from] NamespaceError),
    #[error(transparent)]
    Store(#[from] StoreError),
    #[error(transparent)]
    Query(#[from] QueryError),
}

/// Where a grasped object sits.
pub fn robot_gripper() -> Iri {
    vocab::roboearth("robot_gripper")
}

/// Where a handed-over object ends up.
pub fn user_handover() -> Iri {
    vocab::roboearth("user_handover")
}

impl DigitalTwin {
    /// A twin holding only the robot.
    pub fn with_robot(robot: RobotProfile) -> Self {
        DigitalTwin {
            objects: Vec::new(),
            furniture: Vec::new(),
            regions: Vec::new(),
            robot,
            clock: 0,
            perceptions: Vec::new(),
            namespaces: Vec::new(),
        }
    }

    pub fn object(&self, iri: &Iri) -> Option<&SceneObject> {
        self.objects.iter().find(|o| &o.iri == iri)
    }

    pub fn object_mut(&mut self, iri: &Iri) -> Option<&mut SceneObject> {
        self.objects.iter_mut().find(|o| &o.iri == iri)
    }

    pub fn furniture(&self, iri: &Iri) -> Option<&Place> {
        self.furniture.iter().find(|f| &f.iri == iri)
    }

    /// Furniture, regions, or a pseudo-location.
    pub fn is_place(&self, iri: &Iri) -> bool {
        self.furniture.iter().chain(&self.regions).any(|p| &p.iri == iri)
            || *iri == robot_gripper()
            || *iri == user_handover()
    }

    /// Where an object or piece of furniture is, or the robot's pose.
    pub fn location_of(&self, iri: &Iri) -> Option<&Iri> {
        if let Some(o) = self.object(iri) {
            return Some(&o.location);
        }
        if *iri == self.robot.iri {
            return self.robot.location.as_ref();
        }
        self.furniture
            .iter()
            .chain(&self.regions)
            .find(|p| &p.iri == iri)
            .and_then(|p| p.location.as_ref())
    }

    /// Whether a recipe may mention `iri` as an individual.
    pub fn contains(&self, iri: &Iri) -> bool {
        self.object(iri).is_some() || self.is_place(iri) || *iri == self.robot.iri
    }

    pub fn objects_at<'a>(&'a self, place: &'a Iri) -> impl Iterator<Item = &'a SceneObject> + 'a {
        self.objects.iter().filter(move |o| &o.location == place)
    }

    /// The triples the twin contributes to the graph.
    pub fn triples(&self) -> Vec<Triple> {
        let rdf_type = vocab::rdf_type();
        let location = vocab::location();
        let label = vocab::label();
        let mut out = Vec::new();
        for p in self.regions.iter().chain(&self.furniture) {
            out.push(Triple::iris(&p.iri, &rdf_type, &p.type_iri));
            out.push(Triple {
                subject: p.iri.clone().into(),
                predicate: label.clone().into(),
                object: Term::string(&p.label),
            });
            if let Some(l) = &p.location {
                out.push(Triple::iris(&p.iri, &location, l));
            }
        }
        for o in &self.objects {
            out.push(Triple::iris(&o.iri, &rdf_type, &o.type_iri));
            out.push(Triple::iris(&o.iri, &location, &o.location));
            out.push(Triple {
                subject: o.iri.clone().into(),
                predicate: label.clone().into(),
                object: Term::string(&o.label),
            });
        }
        for c in &self.robot.capabilities {
            out.push(Triple::iris(&self.robot.iri, &vocab::has_capability(), c));
        }
        if let Some(l) = &self.robot.location {
            out.push(Triple::iris(&self.robot.iri, &location, l));
        }
        out
    }

    /// Assert the twin into `g`, registering its extra prefixes first.
    pub fn assert_into(&self, g: &mut Graph) -> Result<usize, TwinError> {
        let mut scratch = g.clone();
        for (p, u) in &self.namespaces {
            scratch.namespaces_mut().register(p, u)?;
        }
        let added = scratch.assert_all(self.triples())?;
        *g = scratch;
        Ok(added)
    }
}
