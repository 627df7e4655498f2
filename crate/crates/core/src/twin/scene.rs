//! The TOML scene file.
//!
//! ```toml
//! [namespaces]            # optional, extra prefixes
//! lab = "http://example.org/lab#"
//!
//! [[regions]]
//! iri = "roboearth:loft_kitchen_area"
//! type = "knowrob:KitchenArea"
//! label = "kitchen area"
//!
//! [[furniture]]
//! iri = "roboearth:table_1"
//! type = "knowrob:Bed-PieceOfFurniture"
//! label = "dining table"
//! location = "roboearth:loft_living_area"   # optional
//!
//! [[objects]]
//! iri = "roboearth:huawei_mug_1"
//! type = "knowrob:DrinkingBottle"
//! location = "roboearth:table_1"
//! label = "huawei mug"
//! descriptors = ["drink", "mug", "container"]
//!
//! [robot]
//! iri = "roboearth:robot_1"
//! capabilities = ["srdl2:Navigate", "srdl2:Grasping"]
//! location = "roboearth:loft_living_area"   # optional
//! ```
//!
//! IRIs are written as `prefix:local` or `<full-iri>`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{DigitalTwin, Place, RobotProfile, SceneObject, TwinError};
use crate::namespace::Namespaces;
use crate::term::Iri;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub namespaces: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "is_zero")]
    pub clock: i64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub regions: Vec<PlaceEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub furniture: Vec<PlaceEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub objects: Vec<ObjectEntry>,
    pub robot: RobotEntry,
}

fn is_zero(n: &i64) -> bool {
    *n == 0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaceEntry {
    pub iri: String,
    #[serde(rename = "type")]
    pub type_iri: String,
    #[serde(default)]
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectEntry {
    pub iri: String,
    #[serde(rename = "type")]
    pub type_iri: String,
    pub location: String,
    #[serde(default)]
    pub label: String,
    #[serde(default)]
    pub descriptors: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotEntry {
    pub iri: String,
    pub capabilities: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<String>,
}

fn schema(path: impl Into<String>, message: impl ToString) -> TwinError {
    TwinError::Schema {
        path: path.into(),
        message: message.to_string(),
    }
}

fn expand(ns: &Namespaces, path: &str, text: &str) -> Result<Iri, TwinError> {
    if let Some(full) = text.strip_prefix('<').and_then(|t| t.strip_suffix('>')) {
        return Ok(Iri::new(full));
    }
    let local_ok = text.split_once(':').is_some_and(|(_, l)| !l.is_empty());
    if !local_ok {
        return Err(schema(path, format!("`{text}` is not a prefixed name")));
    }
    ns.expand_curie(text).map_err(|e| schema(path, e))
}

fn compact(ns: &Namespaces, iri: &Iri) -> String {
    match ns.compact(iri) {
        Some((p, l)) => format!("{p}:{l}"),
        None => format!("<{}>", iri.as_str()),
    }
}

/// Parse a scene file into a twin.
pub fn load_scene(text: &str) -> Result<DigitalTwin, TwinError> {
    let file: SceneFile = toml::from_str(text).map_err(|e| {
        let path = e.span().map_or_else(String::new, |s| format!("byte {}", s.start));
        schema(path, e.message())
    })?;
    file.into_twin()
}

impl SceneFile {
    pub fn into_twin(self) -> Result<DigitalTwin, TwinError> {
        let mut ns = Namespaces::default();
        for (p, u) in &self.namespaces {
            ns.register(p, u)?;
        }
        let places = |entries: &[PlaceEntry], section: &str| -> Result<Vec<Place>, TwinError> {
            entries
                .iter()
                .enumerate()
                .map(|(i, e)| {
                    let at = |field: &str| format!("{section}[{i}].{field}");
                    Ok(Place {
                        iri: expand(&ns, &at("iri"), &e.iri)?,
                        type_iri: expand(&ns, &at("type"), &e.type_iri)?,
                        label: e.label.clone(),
                        location: e
                            .location
                            .as_deref()
                            .map(|l| expand(&ns, &at("location"), l))
                            .transpose()?,
                    })
                })
                .collect()
        };
        let regions = places(&self.regions, "regions")?;
        let furniture = places(&self.furniture, "furniture")?;
        let mut objects = Vec::new();
        for (i, e) in self.objects.iter().enumerate() {
            let at = |field: &str| format!("objects[{i}].{field}");
            if let Some(d) = e.descriptors.iter().find(|d| **d != d.to_lowercase() || d.is_empty()) {
                return Err(schema(at("descriptors"), format!("`{d}` must be a non-empty lowercase word")));
            }
            objects.push(SceneObject {
                iri: expand(&ns, &at("iri"), &e.iri)?,
                type_iri: expand(&ns, &at("type"), &e.type_iri)?,
                location: expand(&ns, &at("location"), &e.location)?,
                descriptors: e.descriptors.clone(),
                label: e.label.clone(),
            });
        }
        let capabilities: BTreeSet<Iri> = self
            .robot
            .capabilities
            .iter()
            .enumerate()
            .map(|(i, c)| expand(&ns, &format!("robot.capabilities[{i}]"), c))
            .collect::<Result<_, _>>()?;
        let robot = RobotProfile {
            iri: expand(&ns, "robot.iri", &self.robot.iri)?,
            capabilities,
            location: self
                .robot
                .location
                .as_deref()
                .map(|l| expand(&ns, "robot.location", l))
                .transpose()?,
        };
        let twin = DigitalTwin {
            objects,
            furniture,
            regions,
            robot,
            clock: self.clock,
            perceptions: Vec::new(),
            namespaces: self.namespaces.into_iter().collect(),
        };
        twin.check()?;
        Ok(twin)
    }

    /// The file form of a twin. Perception records are not part of a scene.
    pub fn from_twin(twin: &DigitalTwin) -> SceneFile {
        let mut ns = Namespaces::default();
        for (p, u) in &twin.namespaces {
            let _ = ns.register(p, u);
        }
        let place = |p: &Place| PlaceEntry {
            iri: compact(&ns, &p.iri),
            type_iri: compact(&ns, &p.type_iri),
            label: p.label.clone(),
            location: p.location.as_ref().map(|l| compact(&ns, l)),
        };
        SceneFile {
            namespaces: twin.namespaces.iter().cloned().collect(),
            clock: twin.clock,
            regions: twin.regions.iter().map(place).collect(),
            furniture: twin.furniture.iter().map(place).collect(),
            objects: twin
                .objects
                .iter()
                .map(|o| ObjectEntry {
                    iri: compact(&ns, &o.iri),
                    type_iri: compact(&ns, &o.type_iri),
                    location: compact(&ns, &o.location),
                    label: o.label.clone(),
                    descriptors: o.descriptors.clone(),
                })
                .collect(),
            robot: RobotEntry {
                iri: compact(&ns, &twin.robot.iri),
                capabilities: twin.robot.capabilities.iter().map(|c| compact(&ns, c)).collect(),
                location: twin.robot.location.as_ref().map(|l| compact(&ns, l)),
            },
        }
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scene files always serialize")
    }
}

impl DigitalTwin {
    /// Uniqueness and location checks shared by loading and mutation tests.
    pub(crate) fn check(&self) -> Result<(), TwinError> {
        let mut seen = BTreeSet::new();
        let ids = self
            .regions
            .iter()
            .chain(&self.furniture)
            .map(|p| &p.iri)
            .chain(self.objects.iter().map(|o| &o.iri))
            .chain(std::iter::once(&self.robot.iri));
        for id in ids {
            if !seen.insert(id) {
                return Err(TwinError::Duplicate(id.clone()));
            }
        }
        if self.robot.capabilities.is_empty() {
            return Err(schema("robot.capabilities", "the robot needs at least one capability"));
        }
        for o in &self.objects {
            if !self.is_place(&o.location) {
                return Err(TwinError::DanglingLocation {
                    object: o.iri.clone(),
                    location: o.location.clone(),
                });
            }
        }
        for p in self.furniture.iter().chain(&self.regions) {
            if let Some(l) = &p.location {
                if !self.is_place(l) {
                    return Err(TwinError::DanglingLocation {
                        object: p.iri.clone(),
                        location: l.clone(),
                    });
                }
            }
        }
        if let Some(l) = &self.robot.location {
            if !self.is_place(l) {
                return Err(TwinError::DanglingLocation {
                    object: self.robot.iri.clone(),
                    location: l.clone(),
                });
            }
        }
        Ok(())
    }
}
