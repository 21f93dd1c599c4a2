use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use proptest::prelude::*;
use spatial_beam::bench::{generate_suite, SyntheticCase};
use spatial_beam::geometry::{cumulative_poses, yaw_rotation, Action, ActionKind, CameraPose, Intrinsics, Trajectory};
use spatial_beam::scoring::{oracle_score, OracleScorer, ScorePair, ScoreRequest, Scorer, ScoringError};
use spatial_beam::search::{
    cap_evidence, enumerate_candidates, spatial_beam_search, PruneReason, ReferenceView, SearchConfig,
    SearchError, TerminalCause, within_budget,
};
use spatial_beam::worldmodel::{
    visibility, Frame, RolloutRequest, SyntheticWorld, WorldModel, WorldModelError,
};

fn case(seed: u64) -> SyntheticCase {
    generate_suite(seed, 1).unwrap().remove(0)
}

fn reference(case: &SyntheticCase) -> ReferenceView {
    ReferenceView {
        frame: Arc::new(case.reference_frame()),
        intrinsics: case.intrinsics,
        pitch_deg: 0.0,
    }
}

fn oracle(case: &SyntheticCase) -> OracleScorer {
    OracleScorer {
        spec: case.oracle.clone(),
        scene: Arc::new(case.scene.clone()),
        intrinsics: case.intrinsics,
        pitch_deg: 0.0,
    }
}

fn action() -> impl Strategy<Value = Action> {
    prop_oneof![
        Just(Action::forward(0.25).unwrap()),
        Just(Action::left(9.0).unwrap()),
        Just(Action::right(9.0).unwrap()),
    ]
}

fn trajectory(max: usize) -> impl Strategy<Value = Trajectory> {
    prop::collection::vec(action(), 0..=max).prop_map(Trajectory::new)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rollouts_are_prefix_consistent(t in trajectory(8), seed in 0u64..4) {
        prop_assume!(!t.is_empty());
        let c = case(seed);
        let world = SyntheticWorld::new(Arc::new(c.scene.clone()));
        let k = Intrinsics::from_fov(24, 24, 60.0).unwrap();
        let poses = cumulative_poses(&t);
        let req = |poses: Vec<CameraPose>| RolloutRequest {
            reference: Arc::new(Frame::filled(24, 24, [0; 3])),
            poses,
            intrinsics: k,
            pitch_deg: 0.0,
        };
        let all = world.rollout(&req(poses.clone())).unwrap();
        for m in 1..=poses.len() {
            let head = world.rollout(&req(poses[..m].to_vec())).unwrap();
            prop_assert_eq!(&head[..], &all[..m]);
        }
    }

    #[test]
    fn pruning_is_monotone(parent in trajectory(8), k in 1usize..6, budget in 0.1..3.0f64, yaw_budget in 5.0..120.0f64) {
        let tight = SearchConfig { k, translation_budget: budget, rotation_budget: yaw_budget, ..SearchConfig::default() };
        // beam nodes are always within budget themselves
        prop_assume!(within_budget(&parent, &tight));
        let loose = SearchConfig { translation_budget: budget * 2.0, rotation_budget: yaw_budget * 2.0, max_traj_len: 16, ..tight.clone() };
        let tight_rows = enumerate_candidates(&parent, &tight);
        let loose_rows = enumerate_candidates(&parent, &loose);
        for kind in [ActionKind::MoveForward, ActionKind::TurnLeft, ActionKind::TurnRight] {
            let group: Vec<_> = tight_rows.iter().filter(|(c, _)| c.appended_action.kind() == kind).collect();
            // once an extension is over budget every longer one is too
            let first_budget = group.iter().position(|(_, r)| *r == Some(PruneReason::Budget));
            if let Some(i) = first_budget {
                prop_assert!(group[i..].iter().all(|(_, r)| r.is_some()));
            }
        }
        for ((tc, tr), (lc, lr)) in tight_rows.iter().zip(&loose_rows) {
            prop_assert_eq!(&tc.full_trajectory, &lc.full_trajectory);
            if tr.is_none() {
                prop_assert!(lr.is_none(), "loosening budgets dropped {}", tc.full_trajectory);
            }
        }
    }

    #[test]
    fn oracle_exploration_decreases_with_bearing(a in -89.0..89.0f64, b in -89.0..89.0f64) {
        let c = case(0);
        let target = c.scene.object(&c.oracle.target_object_id).unwrap().center;
        let bearing = target[0].atan2(target[2]).to_degrees();
        // yaw_rotation(θ) turns left, so the camera heading sits at −θ
        let score = |off: f64| oracle_score(&c.oracle, &c.scene, &yaw_rotation(-(bearing + off)), &c.intrinsics, &c.question).unwrap();
        let (near, far) = if a.abs() <= b.abs() { (a, b) } else { (b, a) };
        prop_assert!(score(near).s_exp >= score(far).s_exp);
    }

    #[test]
    fn oracle_help_follows_visibility(t in trajectory(8), seed in 0u64..4) {
        let c = case(seed);
        let pose = cumulative_poses(&t).last().copied().unwrap_or_else(CameraPose::identity);
        let s = oracle_score(&c.oracle, &c.scene, &pose, &c.intrinsics, &c.question).unwrap();
        let vis = visibility(&c.scene, &pose, &c.intrinsics, &c.oracle.target_object_id).unwrap();
        let expected = (10.0 * (vis / c.oracle.visibility_threshold_help).min(1.0)).round() as u8;
        prop_assert_eq!(s.s_help, expected);
    }
}

#[test]
fn oracle_scores_do_not_depend_on_call_order() {
    let c = case(3);
    let scorer = oracle(&c);
    let frame = Frame::filled(2, 2, [0; 3]);
    let trajectories: Vec<Trajectory> = ["", "F0.25", "L9|L9", "F0.25|F0.25|R9", "R9|R9|R9|F0.25|F0.25"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    let run = |order: &[usize]| -> Vec<(usize, ScorePair)> {
        let mut out: Vec<(usize, ScorePair)> = order
            .iter()
            .map(|&i| {
                let s = scorer
                    .score(&ScoreRequest {
                        question: &c.question,
                        trajectory: &trajectories[i],
                        description: "",
                        frame: &frame,
                    })
                    .unwrap();
                (i, s)
            })
            .collect();
        out.sort_by_key(|(i, _)| *i);
        out
    };
    let forward = run(&[0, 1, 2, 3, 4]);
    assert_eq!(forward, run(&[4, 3, 2, 1, 0]));
    assert_eq!(forward, run(&[2, 0, 4, 1, 3]));
}

#[test]
fn search_is_deterministic_and_bounded() {
    let c = case(9);
    let cfg = SearchConfig::default();
    let world = SyntheticWorld::new(Arc::new(c.scene.clone()));
    let a = spatial_beam_search(&reference(&c), &c.question, &world, &oracle(&c), &cfg).unwrap();
    let b = spatial_beam_search(&reference(&c), &c.question, &world, &oracle(&c), &cfg).unwrap();
    assert_eq!(a.trace.to_jsonl(), b.trace.to_jsonl());
    assert!(a.steps <= cfg.n);
    assert!(a.evidence.len() <= cfg.evidence_cap);
    for step in 1..=a.steps {
        let events: Vec<_> = a.trace.of_kind("candidate").filter(|e| e.step == step).collect();
        let beam = events.iter().filter(|e| e.disposition.as_deref().is_some_and(|d| d.starts_with("beam"))).count();
        let cached = events.iter().filter(|e| e.disposition.as_deref().is_some_and(|d| d.ends_with("evidence"))).count();
        assert!(beam <= cfg.beam, "step {step}: beam {beam}");
        assert!(cached <= cfg.h, "step {step}: evidence {cached}");
    }
    for traj in a.visited() {
        assert!(!traj.contains("L9|R9") && !traj.contains("R9|L9"), "{traj} reverses a turn");
        let t: Trajectory = traj.parse().unwrap();
        assert!(t.len() <= cfg.max_traj_len);
    }
}

#[test]
fn evidence_cap_keeps_most_helpful_in_discovery_order() {
    let c = case(9);
    let cfg = SearchConfig { beam: 4, h: 4, gamma_help: 0.0, ..SearchConfig::default() };
    let world = SyntheticWorld::new(Arc::new(c.scene.clone()));
    let out = spatial_beam_search(&reference(&c), &c.question, &world, &oracle(&c), &SearchConfig { evidence_cap: usize::MAX, ..cfg.clone() }).unwrap();
    let all = out.evidence;
    let capped = cap_evidence(&all, 3);
    assert_eq!(capped.len(), 3.min(all.len()));
    assert!(capped.windows(2).all(|w| w[0].order < w[1].order));
    let min_kept = capped.iter().map(|e| e.s_help).min().unwrap();
    let dropped_max = all
        .iter()
        .filter(|e| !capped.iter().any(|k| k.order == e.order))
        .map(|e| e.s_help)
        .max()
        .unwrap_or(0);
    assert!(min_kept >= dropped_max);
}

/// Synthetic world that fails every call after the first `ok_calls`.
struct Flaky {
    inner: SyntheticWorld,
    ok_calls: usize,
    calls: AtomicUsize,
}

impl WorldModel for Flaky {
    fn name(&self) -> String {
        "flaky".into()
    }

    fn rollout(&self, req: &RolloutRequest) -> Result<Vec<Frame>, WorldModelError> {
        if self.calls.fetch_add(1, Ordering::SeqCst) >= self.ok_calls {
            return Err(WorldModelError::Transport("connection reset".into()));
        }
        self.inner.rollout(req)
    }
}

#[test]
fn world_fault_aborts_but_keeps_evidence() {
    let c = case(9);
    // three groups per step from the root; the second step faults
    let world = Flaky {
        inner: SyntheticWorld::new(Arc::new(c.scene.clone())),
        ok_calls: 3,
        calls: AtomicUsize::new(0),
    };
    let cfg = SearchConfig { gamma_help: 0.0, ..SearchConfig::default() };
    let failure = spatial_beam_search(&reference(&c), &c.question, &world, &oracle(&c), &cfg).unwrap_err();
    assert!(matches!(failure.error, SearchError::WorldModel(WorldModelError::Transport(_))));
    assert_eq!(failure.evidence.len(), cfg.h);
    assert_eq!(failure.trace.of_kind("fault").count(), 1);
    assert_eq!(failure.trace.terminal_cause(), Some(TerminalCause::Fault));
}

/// Fails on every turn candidate.
struct NoTurns(OracleScorer);

impl Scorer for NoTurns {
    fn name(&self) -> String {
        "no-turns".into()
    }

    fn score(&self, req: &ScoreRequest<'_>) -> Result<ScorePair, ScoringError> {
        if req.trajectory.last().is_some_and(|a| a.kind().is_turn()) {
            return Err(ScoringError::Backend("timeout".into()));
        }
        self.0.score(req)
    }
}

#[test]
fn scorer_fault_zeroes_that_candidate_only() {
    let c = case(9);
    let world = SyntheticWorld::new(Arc::new(c.scene.clone()));
    let out = spatial_beam_search(&reference(&c), &c.question, &world, &NoTurns(oracle(&c)), &SearchConfig::default()).unwrap();
    let faults = out.trace.of_kind("fault").count();
    assert!(faults > 0);
    for e in out.trace.of_kind("candidate").filter(|e| e.s_exp.is_some()) {
        let turn = e.traj.as_deref().is_some_and(|t| t.ends_with("L9") || t.ends_with("R9"));
        if turn {
            assert_eq!((e.s_exp, e.s_help), (Some(0), Some(0)));
        }
    }
    assert_eq!(out.trace.terminal_cause(), Some(TerminalCause::StepLimit));
}
