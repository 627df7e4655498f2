//! Twin mutations: perception results, object moves and robot motion.

use super::{DigitalTwin, SceneObject, TwinError};
use crate::query::{self, Binding, ConjunctiveQuery, Goal};
use crate::store::Graph;
use crate::term::{Iri, Term, Triple, TriplePattern};
use crate::vocab;

/// One object seen by the perception routine.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Observation {
    pub iri: Iri,
    pub type_iri: Iri,
    pub location: Iri,
}

/// A perception event already asserted into the graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerceptionRecord {
    pub iri: Iri,
    pub location: Iri,
    pub time: i64,
    pub objects: Vec<Iri>,
}

/// The perception assertion query: type, location and time of the event,
/// then one `objectActedOn` per observed object.
fn perception_query(observed: &[Observation]) -> ConjunctiveQuery {
    let p = || Term::var("P");
    let mut goals = vec![
        Goal::RdfAssert(TriplePattern::new(p(), vocab::rdf_type(), vocab::perception())),
        Goal::RdfAssert(TriplePattern::new(p(), vocab::location(), Term::var("Loc"))),
        Goal::RdfAssert(TriplePattern::new(p(), vocab::occurs_at(), Term::var("T"))),
    ];
    for o in observed {
        goals.push(Goal::RdfAssert(TriplePattern::new(p(), vocab::object_acted_on(), &o.iri)));
    }
    ConjunctiveQuery::new(goals)
}

fn fresh_perception(twin: &DigitalTwin, g: &Graph) -> Iri {
    (twin.perceptions.len() + 1..)
        .map(|n| vocab::roboearth(&format!("perception_{n}")))
        .find(|i| !g.mentions(&i.into()))
        .expect("unbounded range")
}

/// Record a perception event at `location` and fold the observations into
/// the twin. Returns the number of triples the event asserted.
pub fn apply_perception(
    twin: &mut DigitalTwin,
    g: &mut Graph,
    location: &Iri,
    observed: &[Observation],
    time: i64,
) -> Result<usize, TwinError> {
    if time < twin.clock {
        return Err(TwinError::StaleTimestamp {
            time,
            clock: twin.clock,
        });
    }
    if !twin.is_place(location) {
        return Err(TwinError::UnknownLocation(location.clone()));
    }
    for o in observed {
        if !twin.is_place(&o.location) {
            return Err(TwinError::UnknownLocation(o.location.clone()));
        }
    }
    let event = fresh_perception(twin, g);
    let mut scratch = g.clone();
    let mut init = Binding::new();
    init.insert("P", event.clone().into());
    init.insert("Loc", location.clone().into());
    init.insert("T", Term::integer(time));
    let q = perception_query(observed);
    let mut solutions = query::solve_with(&q, &mut scratch, init);
    if let Some(Err(e)) = solutions.next() {
        return Err(e.into());
    }
    let asserted = solutions.asserted();

    let mut mirror = twin.clone();
    for o in observed {
        if mirror.object(&o.iri).is_some() {
            update_location(&mut mirror, &mut scratch, &o.iri, &o.location)?;
            continue;
        }
        let label = o.iri.local_name().replace('_', " ");
        scratch.assert_all([
            Triple::iris(&o.iri, &vocab::rdf_type(), &o.type_iri),
            Triple::iris(&o.iri, &vocab::location(), &o.location),
            Triple {
                subject: o.iri.clone().into(),
                predicate: vocab::label().into(),
                object: Term::string(&label),
            },
        ])?;
        mirror.objects.push(SceneObject {
            iri: o.iri.clone(),
            type_iri: o.type_iri.clone(),
            location: o.location.clone(),
            descriptors: Vec::new(),
            label,
        });
    }
    mirror.perceptions.push(PerceptionRecord {
        iri: event,
        location: location.clone(),
        time,
        objects: observed.iter().map(|o| o.iri.clone()).collect(),
    });
    mirror.clock = time;
    *twin = mirror;
    *g = scratch;
    Ok(asserted)
}

/// Move an object, replacing its location triple.
pub fn update_location(twin: &mut DigitalTwin, g: &mut Graph, obj: &Iri, new_loc: &Iri) -> Result<(), TwinError> {
    if twin.object(obj).is_none() {
        return Err(TwinError::UnknownObject(obj.clone()));
    }
    if !twin.is_place(new_loc) {
        return Err(TwinError::UnknownLocation(new_loc.clone()));
    }
    let new = Triple::iris(obj, &vocab::location(), new_loc);
    g.check_triple(&new)?;
    g.retract(&TriplePattern::new(obj, vocab::location(), Term::var("L")));
    g.assert_triple(new)?;
    twin.object_mut(obj).expect("checked above").location = new_loc.clone();
    Ok(())
}

/// Move the robot base to `place`.
pub fn move_robot(twin: &mut DigitalTwin, g: &mut Graph, place: &Iri) -> Result<(), TwinError> {
    if !twin.is_place(place) {
        return Err(TwinError::UnknownLocation(place.clone()));
    }
    let robot = twin.robot.iri.clone();
    let new = Triple::iris(&robot, &vocab::location(), place);
    g.check_triple(&new)?;
    g.retract(&TriplePattern::new(&robot, vocab::location(), Term::var("L")));
    g.assert_triple(new)?;
    twin.robot.location = Some(place.clone());
    Ok(())
}
