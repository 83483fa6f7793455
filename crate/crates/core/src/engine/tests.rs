use super::*;
use crate::certify::{check_certificate, replay_trace};
use crate::kernel::Transition;

fn m<const N: usize>(c: [u32; N]) -> Marking {
    Marking::from(c)
}

/// x, y with one transition moving a token from x to y; one token in x.
fn net_a() -> PetriNet {
    PetriNet::new(
        vec!["x".into(), "y".into()],
        vec![Transition::new("t1", vec![1, 0], vec![-1, 1]).unwrap()],
        vec![m([1, 0])],
    )
    .unwrap()
}

fn frames_at(net: &PetriNet, depth: usize) -> Frames {
    let mut fr = Frames::new(net);
    for _ in 0..depth {
        fr.unfold();
    }
    fr
}

fn ob(q: &mut ObligationQueue, state: Marking, level: usize) -> Obligation {
    q.push(state, level, None)
}

#[test]
fn candidate_examples() {
    let net = net_a();
    let fr = frames_at(&net, 1);
    let target = UpSet::new([m([0, 2])]);
    assert_eq!(candidate(&fr, &target), Some(&m([0, 2])));

    let mut fr = frames_at(&net, 1);
    fr.add_blocker(m([0, 2]), Level::At(1)).unwrap();
    assert_eq!(candidate(&fr, &target), None);

    let both = UpSet::new([m([0, 2]), m([3, 0])]);
    assert_eq!(candidate(&fr, &both), Some(&m([3, 0])));
}

#[test]
fn decide_examples() {
    let net = net_a();
    let mut q = ObligationQueue::new();

    let mut fr = frames_at(&net, 2);
    fr.add_blocker(m([0, 2]), Level::At(1)).unwrap();
    let o = ob(&mut q, m([0, 2]), 2);
    assert_eq!(
        decide_step(&o, &fr, &net).unwrap(),
        Decision::Predecessor {
            state: m([1, 1]),
            transition: 0
        }
    );

    let fr = frames_at(&net, 1);
    let o = ob(&mut q, m([0, 2]), 1);
    assert_eq!(decide_step(&o, &fr, &net).unwrap(), Decision::NoPredecessor);

    // the only predecessor lies inside ↑a
    let grow = PetriNet::new(
        vec!["x".into()],
        vec![Transition::new("inc", vec![0], vec![1]).unwrap()],
        vec![m([0])],
    )
    .unwrap();
    let fr = frames_at(&grow, 1);
    let o = ob(&mut q, m([0]), 1);
    assert_eq!(
        decide_step(&o, &fr, &grow).unwrap(),
        Decision::NoPredecessor
    );
}

#[test]
fn relative_level_examples() {
    let net = net_a();
    let fr = frames_at(&net, 1);
    assert_eq!(relative_level(&m([0, 2]), &fr, &net).unwrap(), 0);

    let mut fr = frames_at(&net, 2);
    fr.add_blocker(m([2, 0]), Level::At(1)).unwrap();
    assert_eq!(relative_level(&m([2, 0]), &fr, &net).unwrap(), 3);

    let idle = PetriNet::new(vec!["x".into()], vec![], vec![m([0])]).unwrap();
    let fr = frames_at(&idle, 2);
    assert_eq!(relative_level(&m([1]), &fr, &idle).unwrap(), 3);
}

#[test]
fn unblocked_predecessor_is_an_internal_error() {
    let net = net_a();
    let fr = frames_at(&net, 1);
    // pred (1,0) of (0,1) is the initial marking
    assert!(matches!(
        relative_level(&m([0, 1]), &fr, &net),
        Err(EngineError::Invariant { .. })
    ));
    assert!(matches!(
        generalize(&m([0, 1]), &fr, &net),
        Err(EngineError::Invariant { .. })
    ));
    // nothing in F_0 below an initially coverable state
    let idle = PetriNet::new(vec!["x".into()], vec![], vec![m([2])]).unwrap();
    let fr = frames_at(&idle, 1);
    assert!(matches!(
        generalize(&m([1]), &fr, &idle),
        Err(EngineError::Invariant { .. })
    ));
}

#[test]
fn generalize_examples() {
    let net = net_a();
    // pred (2,0) of (1,1) blocked by (2,0) in F_0: a'' = (1,0) is initial,
    // repaired with (0,1)
    let fr = frames_at(&net, 1);
    let g = generalize(&m([1, 1]), &fr, &net).unwrap();
    assert_eq!(g, m([1, 1]));
    assert!(m([1, 1]).covers(&g));
    assert!(!fr.in_region(&g, 0).unwrap());

    let g = generalize(&m([0, 2]), &fr, &net).unwrap();
    assert_eq!(g, m([0, 2]));

    // every predecessor self-blocked: a'' = 0, repaired to an F_0 element
    let drain = PetriNet::new(
        vec!["x".into(), "y".into()],
        vec![Transition::new("dec", vec![1, 0], vec![-1, 0]).unwrap()],
        vec![m([0, 0])],
    )
    .unwrap();
    let fr = frames_at(&drain, 1);
    let g = generalize(&m([3, 4]), &fr, &drain).unwrap();
    assert!(fr.f0().contains(&g));
    assert!(m([3, 4]).covers(&g));
}

#[test]
fn conflict_examples() {
    let net = net_a();
    let mut q = ObligationQueue::new();

    let mut fr = frames_at(&net, 1);
    ob(&mut q, m([0, 2]), 1);
    let o = q.pop().unwrap();
    let out = conflict_step(&o, &mut fr, &net, &mut q).unwrap();
    assert_eq!(out.relative_level, 0);
    assert_eq!(out.blocker, m([0, 2]));
    assert_eq!(out.placed, Level::At(1));
    assert!(out.requeued.is_none());
    assert_eq!(fr.level(1).unwrap(), &[m([0, 2])]);

    let mut fr = frames_at(&net, 2);
    fr.add_blocker(m([2, 0]), Level::At(1)).unwrap();
    ob(&mut q, m([2, 0]), 2);
    let o = q.pop().unwrap();
    let out = conflict_step(&o, &mut fr, &net, &mut q).unwrap();
    assert_eq!(out.relative_level, 3);
    assert_eq!(out.placed, Level::Infinity);
    assert!(fr.level(1).unwrap().is_empty());
    assert_eq!(fr.finf(), &[m([2, 0])]);
    assert!(out.requeued.is_none());
}

#[test]
fn conflict_requeues_below_top_frame() {
    let net = net_a();
    let mut q = ObligationQueue::new();
    let mut fr = frames_at(&net, 3);
    ob(&mut q, m([0, 2]), 1);
    let o = q.pop().unwrap();
    let out = conflict_step(&o, &mut fr, &net, &mut q).unwrap();
    assert_eq!(out.relative_level, 0);
    let again = out.requeued.unwrap();
    assert_eq!(again.level, 2);
    assert_eq!(again.state, m([0, 2]));
    assert_eq!(q.len(), 1);
}

#[test]
fn propagate_examples() {
    let net = net_a();
    let mut fr = frames_at(&net, 2);
    fr.add_blocker(m([0, 2]), Level::At(1)).unwrap();
    assert_eq!(propagate(&mut fr, &net).unwrap(), 0);
    assert_eq!(fr.level(1).unwrap(), &[m([0, 2])]);

    // predecessors along the only transition stay inside ↑r
    let grow = PetriNet::new(
        vec!["x".into(), "y".into()],
        vec![Transition::new("inc", vec![0, 0], vec![1, 0]).unwrap()],
        vec![m([0, 0])],
    )
    .unwrap();
    let mut fr = frames_at(&grow, 2);
    fr.add_blocker(m([0, 1]), Level::At(1)).unwrap();
    assert_eq!(propagate(&mut fr, &grow).unwrap(), 1);
    assert!(fr.level(1).unwrap().is_empty());
    assert_eq!(fr.level(2).unwrap(), &[m([0, 1])]);

    let mut fr = frames_at(&net, 3);
    assert_eq!(propagate(&mut fr, &net).unwrap(), 0);
}

#[test]
fn net_a_safe_golden_run() {
    let net = net_a();
    let target = UpSet::new([m([0, 2])]);
    let mut eng = Engine::new(
        &net,
        &target,
        EngineConfig {
            check_invariants: true,
            record_events: true,
            ..EngineConfig::default()
        },
    )
    .unwrap();
    let v = eng.run().unwrap();
    let Outcome::Safe(basis) = &v.outcome else {
        panic!("expected safe, got {:?}", v.outcome)
    };
    assert_eq!(basis.sorted(), vec![m([0, 2]), m([1, 1]), m([2, 0])]);
    assert_eq!(check_certificate(&net, &target, basis), Ok(()));
    assert_eq!(eng.closing_rule(), Some(Rule::Valid));
    let rules: Vec<Rule> = eng.events().iter().map(|e| e.rule).collect();
    assert_eq!(
        rules,
        vec![
            Rule::Initialize,
            Rule::Unfold,
            Rule::Candidate,
            Rule::Conflict,
            Rule::Unfold,
            Rule::Candidate,
            Rule::Decide,
            Rule::Conflict,
            Rule::Conflict,
            Rule::Decide,
            Rule::Conflict,
            Rule::Conflict,
            Rule::Valid,
        ]
    );
}

#[test]
fn net_a_unsafe_golden_run() {
    let net = net_a();
    let target = UpSet::new([m([0, 1])]);
    let mut eng = Engine::new(
        &net,
        &target,
        EngineConfig {
            check_invariants: true,
            ..EngineConfig::default()
        },
    )
    .unwrap();
    let v = eng.run().unwrap();
    let Outcome::Unsafe(trace) = &v.outcome else {
        panic!("expected unsafe")
    };
    assert_eq!(trace.steps(), &[(m([1, 0]), 0)]);
    assert_eq!(trace.last(), &m([0, 1]));
    assert_eq!(eng.closing_rule(), Some(Rule::ModelSem));
    let run = replay_trace(&net, &target, trace).unwrap();
    assert_eq!(run.markings, vec![m([1, 0]), m([0, 1])]);
}

#[test]
fn initially_covered_target_has_empty_trace() {
    let net = net_a();
    let target = UpSet::new([m([1, 0])]);
    let v = check(&net, &target).unwrap();
    let Outcome::Unsafe(trace) = v.outcome else {
        panic!("expected unsafe")
    };
    assert!(trace.is_empty());
    assert_eq!(trace.last(), &m([1, 0]));
}

#[test]
fn empty_target_is_safe_with_empty_certificate() {
    let net = net_a();
    let v = check(&net, &UpSet::default()).unwrap();
    assert_eq!(v.outcome, Outcome::Safe(UpSet::default()));
}

#[test]
fn target_dimension_mismatch() {
    let net = net_a();
    let target = UpSet::new([m([0, 1, 0])]);
    assert!(matches!(
        check(&net, &target),
        Err(EngineError::Kernel(KernelError::DimensionMismatch { .. }))
    ));
}

#[test]
fn step_budget_is_reported() {
    let net = net_a();
    let target = UpSet::new([m([0, 2])]);
    let cfg = EngineConfig {
        step_budget: 3,
        ..EngineConfig::default()
    };
    assert_eq!(
        check_with(&net, &target, cfg),
        Err(EngineError::BudgetExhausted(3))
    );
}

#[test]
fn longer_counterexample_replays() {
    // x -> y -> z, two tokens in x; cover z >= 2
    let net = PetriNet::new(
        vec!["x".into(), "y".into(), "z".into()],
        vec![
            Transition::new("a", vec![1, 0, 0], vec![-1, 1, 0]).unwrap(),
            Transition::new("b", vec![0, 1, 0], vec![0, -1, 1]).unwrap(),
        ],
        vec![m([2, 0, 0])],
    )
    .unwrap();
    let target = UpSet::new([m([0, 0, 2])]);
    let v = check_with(
        &net,
        &target,
        EngineConfig {
            check_invariants: true,
            ..EngineConfig::default()
        },
    )
    .unwrap();
    let Outcome::Unsafe(trace) = &v.outcome else {
        panic!("expected unsafe")
    };
    assert_eq!(trace.len(), 4);
    let run = replay_trace(&net, &target, trace).unwrap();
    assert_eq!(run.last(), &m([0, 0, 2]));
}

#[test]
fn event_display() {
    let e = Event {
        rule: Rule::Conflict,
        state: Some(m([0, 2])),
        level: Some(Level::At(1)),
        frame_sizes: vec![1, 0, 2],
    };
    assert_eq!(e.to_string(), "conflict (0,2) @1 frames=[1,0|2]");
}
