use super::*;
use crate::fixtures;
use crate::generator::{generate_validated, GenerationRequest, TemplatePlanner};
use crate::recipe::linearize;
use crate::term::{Triple, TriplePattern};
use crate::twin::{retrieve, robot_gripper, user_handover};
use crate::vocab::{knowrob, roboearth, srdl2};

fn world(twin: DigitalTwin) -> (Graph, DigitalTwin) {
    let mut g = fixtures::base_graph();
    twin.assert_into(&mut g).unwrap();
    (g, twin)
}

/// Generate with the template planner and assert; returns the root.
fn assert_prompt(prompt: &str, g: &mut Graph, twin: &DigitalTwin) -> (Iri, Vec<Iri>) {
    let req = GenerationRequest::new(prompt, retrieve(twin, prompt, 5));
    let out = generate_validated(&req, &mut TemplatePlanner::default(), &fixtures::base_graph(), twin, g);
    assert!(out.succeeded, "{prompt}: {:?}", out.last());
    let r = out.recipe.unwrap();
    let order = linearize(&r).unwrap();
    (r.root, order)
}

fn located(g: &Graph, obj: &str) -> Vec<Term> {
    g.objects(&roboearth(obj).into(), &vocab::location().into()).cloned().collect()
}

/// Twin object locations and robot pose equal the graph's location triples.
fn coherent(twin: &DigitalTwin, g: &Graph) -> bool {
    let loc = Term::Iri(vocab::location());
    let single = |i: &Iri| g.objects(&i.into(), &loc).cloned().collect::<Vec<_>>();
    twin.objects.iter().all(|o| single(&o.iri) == [Term::Iri(o.location.clone())])
        && single(&twin.robot.iri) == twin.robot.location.iter().map(|l| Term::Iri(l.clone())).collect::<Vec<_>>()
}

#[test]
fn serve_a_drink_completes() {
    let (mut g, mut twin) = world(fixtures::loft());
    let (root, order) = assert_prompt("Serve me a drink", &mut g, &twin);
    let trace = run(&root, &mut g, &mut twin, &mut SimulatedExecutor);
    assert!(trace.completed(), "{trace}");
    assert_eq!(trace.tasks(), order);
    let functions: Vec<&str> = trace.steps.iter().map(|s| s.call.function.as_str()).collect();
    assert_eq!(functions, ["move_base", "grasp", "open_gripper", "move_to_handover", "handover"]);
    let mug = roboearth("huawei_mug_1");
    assert_eq!(twin.location_of(&mug), Some(&user_handover()));
    assert_eq!(located(&g, "huawei_mug_1"), [Term::Iri(user_handover())]);
    assert_eq!(twin.robot.location, Some(user_handover()));
    assert!(coherent(&twin, &g));
    assert_eq!(
        trace.steps[1].capabilities_checked,
        BTreeSet::from([srdl2("Grasping")])
    );
}

#[test]
fn missing_grasping_aborts_at_grasp() {
    let mut twin = fixtures::loft();
    twin.robot.capabilities.remove(&srdl2("Grasping"));
    let (mut g, mut twin) = world(twin);
    let (root, _) = assert_prompt("Serve me a drink", &mut g, &twin);
    let trace = run(&root, &mut g, &mut twin, &mut SimulatedExecutor);
    assert_eq!(trace.steps.len(), 1);
    assert_eq!(
        trace.status,
        RunStatus::Aborted(RceError::CapabilityMismatch {
            task: roboearth("GraspObject"),
            missing: vec![srdl2("Grasping")],
        })
    );
    // The approach happened, the grasp did not.
    assert_eq!(twin.robot.location, Some(roboearth("table_1")));
    assert_eq!(twin.location_of(&roboearth("huawei_mug_1")), Some(&roboearth("table_1")));
    assert!(coherent(&twin, &g));
}

#[test]
fn empty_recipe_completes_with_no_steps() {
    let (mut g, mut twin) = world(fixtures::loft());
    let trace = run(&roboearth("NothingToDo"), &mut g, &mut twin, &mut SimulatedExecutor);
    assert!(trace.completed());
    assert!(trace.steps.is_empty());
}

#[test]
fn capability_matching() {
    let (mut g, twin) = world(fixtures::loft());
    assert_prompt("Serve me a drink", &mut g, &twin);
    let check = match_capabilities(&roboearth("GraspObject"), &twin.robot, &g).unwrap();
    assert!(check.ok());
    assert_eq!(check.performer, Some(roboearth("robot_1")));
    assert_eq!(check.required, BTreeSet::from([srdl2("Grasping")]));

    let mut grasper = twin.robot.clone();
    grasper.capabilities = BTreeSet::from([srdl2("Grasping")]);
    let check = match_capabilities(&roboearth("MoveBaseToGraspPose"), &grasper, &g).unwrap();
    assert_eq!(check.missing, BTreeSet::from([srdl2("Navigate")]));
    assert!(!check.ok());

    // Inherited through MovingToHandoverPose ⊑ BaseMovement.
    let check = match_capabilities(&roboearth("MoveBaseToHandoverPose"), &grasper, &g).unwrap();
    assert_eq!(check.missing, BTreeSet::from([srdl2("Navigate")]));

    assert_prompt("Perceive objects on the dining table", &mut g, &twin);
    let check = match_capabilities(&roboearth("PerceiveObjects"), &grasper, &g).unwrap();
    assert!(check.required.is_empty() && check.ok());

    // A task without a performer requires nothing.
    let check = match_capabilities(&knowrob("GraspingSomething"), &grasper, &g).unwrap();
    assert_eq!(check.performer, None);
    assert!(check.ok());
}

#[test]
fn api_resolution_prefers_the_nearest_ancestor() {
    let (mut g, twin) = world(fixtures::loft());
    assert_prompt("Serve me a drink", &mut g, &twin);
    let call = resolve_api(&roboearth("GraspObject"), &g).unwrap();
    assert_eq!(call.function, "grasp");
    assert_eq!(call.action_type, knowrob("GraspingSomething"));
    assert_eq!(call.slots, ["object", "object_location"]);

    // move_to_handover (one hop) beats move_base (two hops) and has no slots.
    let call = resolve_api(&roboearth("MoveBaseToHandoverPose"), &g).unwrap();
    assert_eq!(call.function, "move_to_handover");
    assert!(call.slots.is_empty());

    // Zero hops wins outright.
    let grasp = roboearth("GraspObject");
    g.assert_triple(Triple::new(grasp.clone(), vocab::api_function(), Term::string("careful_grasp")).unwrap())
        .unwrap();
    assert_eq!(resolve_api(&grasp, &g).unwrap().function, "careful_grasp");
    assert_eq!(resolve_api(&grasp, &g).unwrap().slots, Vec::<String>::new());

    assert_eq!(
        resolve_api(&roboearth("Levitate"), &g),
        Err(RceError::UnresolvedApi(roboearth("Levitate")))
    );
}

#[test]
fn api_resolution_breaks_ties_by_iri() {
    let (mut g, _) = world(fixtures::loft());
    let task = roboearth("Juggle");
    for sup in ["PuttingSomethingSomewhere", "OpeningAGripper"] {
        g.assert_triple(Triple::iris(&task, &vocab::sub_class_of(), &knowrob(sup))).unwrap();
    }
    // Both at one hop; OpeningAGripper sorts first.
    let call = resolve_api(&task, &g).unwrap();
    assert_eq!(call.action_type, knowrob("OpeningAGripper"));
    assert_eq!(call.function, "open_gripper");
}

#[test]
fn parametrization_uses_the_location_queries() {
    let (mut g, twin) = world(fixtures::loft());
    assert_prompt("Serve me a drink", &mut g, &twin);
    let grasp = roboearth("GraspObject");
    let call = parametrize(&grasp, &resolve_api(&grasp, &g).unwrap(), &g).unwrap();
    assert_eq!(call.iri("object"), Some(&roboearth("huawei_mug_1")));
    assert_eq!(call.iri("object_location"), Some(&roboearth("table_1")));
    assert_eq!(
        call.render(&Namespaces::default()),
        "grasp(object=roboearth:huawei_mug_1, object_location=roboearth:table_1)"
    );

    assert_prompt("Clean the dining table", &mut g, &twin);
    let place = roboearth("PlaceObject1");
    let call = parametrize(&place, &resolve_api(&place, &g).unwrap(), &g).unwrap();
    assert_eq!(call.iri("target"), Some(&roboearth("trash_1")));
    assert_eq!(call.iri("target_location"), Some(&roboearth("loft_kitchen_area")));
    assert_eq!(call.iri("object"), Some(&roboearth("huawei_mug_1")));

    // Without a location triple the object query has no answer.
    let mug: Term = roboearth("huawei_mug_1").into();
    g.retract(&TriplePattern::new(mug, vocab::location(), Term::var("L")));
    let pick = roboearth("PickObject1");
    assert_eq!(
        parametrize(&pick, &resolve_api(&pick, &g).unwrap(), &g),
        Err(RceError::ParametrizationFailure {
            task: pick,
            slot: "object".into()
        })
    );
}

#[test]
fn grasp_needs_the_robot_at_the_object() {
    let (mut g, mut twin) = world(fixtures::loft());
    let mug = roboearth("huawei_mug_1");
    let call = |obj: &Iri| ApiCall {
        function: "grasp".into(),
        slots: vec!["object".into()],
        parameters: BTreeMap::from([("object".to_string(), obj.into())]),
        ..ApiCall::default()
    };
    let err = SimulatedExecutor.execute(&call(&mug), &mut twin, &mut g).unwrap_err();
    assert!(matches!(err, ExecError::PreconditionViolation(_)), "{err}");
    crate::twin::move_robot(&mut twin, &mut g, &roboearth("table_1")).unwrap();
    SimulatedExecutor.execute(&call(&mug), &mut twin, &mut g).unwrap();
    assert_eq!(twin.location_of(&mug), Some(&robot_gripper()));
    assert!(coherent(&twin, &g));

    let unknown = ApiCall {
        function: "teleport".into(),
        ..ApiCall::default()
    };
    assert_eq!(
        SimulatedExecutor.execute(&unknown, &mut twin, &mut g),
        Err(ExecError::UnknownFunction("teleport".into()))
    );
}

#[test]
fn cup_ends_on_the_sink() {
    let (mut g, mut twin) = world(fixtures::kitchen());
    let (root, order) = assert_prompt("Pick up the cup from the table and place it on the sink", &mut g, &twin);
    let trace = run(&root, &mut g, &mut twin, &mut SimulatedExecutor);
    assert!(trace.completed(), "{trace}");
    assert_eq!(trace.tasks(), order);
    assert_eq!(twin.location_of(&roboearth("cup_1")), Some(&roboearth("sink_1")));
    assert_eq!(located(&g, "cup_1"), [Term::Iri(roboearth("sink_1"))]);
}

#[test]
fn perceive_then_clean() {
    let (mut g, mut twin) = world(fixtures::loft());
    let (root, _) = assert_prompt("Perceive objects on the dining table", &mut g, &twin);
    let before = g.len();
    let trace = run(&root, &mut g, &mut twin, &mut SimulatedExecutor);
    assert!(trace.completed(), "{trace}");
    assert_eq!(twin.perceptions.len(), 1);
    let seen = &twin.perceptions[0];
    assert_eq!(seen.objects, [roboearth("huawei_mug_1"), roboearth("plate_1")]);
    // Three event triples plus one per object; the robot's pose triple is swapped.
    assert_eq!(g.len() - before, 3 + 2);

    let (root, _) = assert_prompt("Clean the dining table", &mut g, &twin);
    let trace = run(&root, &mut g, &mut twin, &mut SimulatedExecutor);
    assert!(trace.completed(), "{trace}");
    assert_eq!(trace.steps.len(), 5);
    for obj in ["huawei_mug_1", "plate_1"] {
        assert_eq!(twin.location_of(&roboearth(obj)), Some(&roboearth("trash_1")), "{obj}");
    }
    assert!(coherent(&twin, &g));
}

#[test]
fn every_parameter_is_reproducible_from_the_query_text() {
    let (mut g, mut twin) = world(fixtures::loft());
    for prompt in ["Serve me a drink", "Pick up the plate and put it on the kitchen counter"] {
        let (root, _) = assert_prompt(prompt, &mut g, &twin);
        let snapshot = g.clone();
        let trace = run(&root, &mut g, &mut twin, &mut SimulatedExecutor);
        assert!(trace.completed(), "{trace}");
        for step in &trace.steps {
            let task = format!("roboearth:'{}'", step.task.local_name());
            for (slot, value) in &step.call.parameters {
                let (text, var) = match slot.as_str() {
                    "object" => (OBJECT_LOCATION_QUERY, "Object"),
                    "object_location" => (OBJECT_LOCATION_QUERY, "Loc"),
                    "target" => (TARGET_LOCATION_QUERY, "Furniture"),
                    _ => (TARGET_LOCATION_QUERY, "Loc"),
                };
                let text = text.replacen("Task", &task, 1);
                let q = parse_query(&text, snapshot.namespaces()).unwrap();
                let rows = query::solve(&q, &snapshot).collect_distinct().unwrap();
                assert_eq!(rows[0].get(var), Some(value), "{slot} of {task}");
            }
        }
    }
}

/// Checks coherence after every call and can fail on a chosen call after
/// having mutated its scratch state.
struct Probe {
    inner: SimulatedExecutor,
    calls: usize,
    fail_at: Option<usize>,
}

impl Executor for Probe {
    fn execute(&mut self, call: &ApiCall, twin: &mut DigitalTwin, g: &mut Graph) -> Result<String, ExecError> {
        self.calls += 1;
        let effect = self.inner.execute(call, twin, g)?;
        assert!(coherent(twin, g), "incoherent after {}", call.function);
        if self.fail_at == Some(self.calls) {
            return Err(ExecError::Failed("injected".into()));
        }
        Ok(effect)
    }
}

#[test]
fn failed_step_leaves_no_effects() {
    for fail_at in 1..=5 {
        let (mut g, mut twin) = world(fixtures::loft());
        let (root, _) = assert_prompt("Serve me a drink", &mut g, &twin);
        let mut expected = (g.clone(), twin.clone());
        let mut probe = Probe {
            inner: SimulatedExecutor,
            calls: 0,
            fail_at: None,
        };
        // Reference run, stopping the snapshot before the failing step.
        let mut steps = 0;
        let (mut g2, mut t2) = expected.clone();
        let mut action = first_action(&root, &g2).unwrap();
        while let Some(task) = action {
            steps += 1;
            if steps == fail_at {
                break;
            }
            let (_, call) = prepare(&task, &t2, &g2).unwrap();
            probe.execute(&call, &mut t2, &mut g2).unwrap();
            expected = (g2.clone(), t2.clone());
            action = next_action(&task, &g2).unwrap();
        }
        let mut failing = Probe {
            inner: SimulatedExecutor,
            calls: 0,
            fail_at: Some(fail_at),
        };
        let trace = run(&root, &mut g, &mut twin, &mut failing);
        assert_eq!(trace.steps.len(), fail_at - 1);
        assert!(matches!(trace.error(), Some(RceError::ExecutorFailure { .. })));
        assert_eq!(twin, expected.1, "fail at {fail_at}");
        assert_eq!(g.to_ntriples(), expected.0.to_ntriples());
    }
}

#[test]
fn ordering_cycles_are_caught() {
    let (mut g, mut twin) = world(fixtures::loft());
    let (root, _) = assert_prompt("Serve me a drink", &mut g, &twin);
    let node = g.fresh_blank();
    g.assert_all([
        Triple::new(node.clone(), vocab::occurs_before(), roboearth("HandoverObject")).unwrap(),
        Triple::new(node, vocab::occurs_after(), roboearth("GraspObject")).unwrap(),
    ])
    .unwrap();
    let trace = run(&root, &mut g, &mut twin, &mut SimulatedExecutor);
    assert_eq!(trace.steps.len(), 5);
    assert!(matches!(
        trace.error(),
        Some(RceError::Ordering(OrderError::CyclicOrdering(_)))
    ));
}

#[test]
fn trace_rendering() {
    let (mut g, mut twin) = world(fixtures::loft());
    let (root, _) = assert_prompt("Serve me a drink", &mut g, &twin);
    let trace = run(&root, &mut g, &mut twin, &mut SimulatedExecutor);
    let text = trace.render(g.namespaces());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7);
    assert_eq!(lines[0], "recipe roboearth:ServeADrink");
    assert_eq!(
        lines[2],
        "step 2 task=roboearth:GraspObject capabilities=[srdl2:Grasping] \
         call=grasp(object=roboearth:huawei_mug_1, object_location=roboearth:table_1) \
         effect=\"huawei_mug_1 in robot_gripper\""
    );
    assert_eq!(lines[6], "status completed");

    let mut weak = fixtures::loft();
    weak.robot.capabilities.clear();
    let (mut g, mut twin) = world(weak);
    let (root, _) = assert_prompt("Serve me a drink", &mut g, &twin);
    let text = run(&root, &mut g, &mut twin, &mut SimulatedExecutor).render(g.namespaces());
    assert_eq!(
        text.lines().last().unwrap(),
        "status aborted task=roboearth:MoveBaseToGraspPose reason=\"capability mismatch at MoveBaseToGraspPose: missing Navigate\""
    );
}
