use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::geometry::{ActionKind, Trajectory};
use crate::scoring::{Question, ScorePair, ScoreRequest, Scorer};
use crate::worldmodel::{Frame, RolloutRequest, WorldModel, WorldModelError};

use super::{
    describe, enumerate_candidates, plan_rollouts, BeamNode, Candidate, Disposition, PruneReason,
    ReferenceView, SearchConfig, SearchError, SearchTrace, TerminalCause, TraceEvent,
};

/// A cached helpful view.
#[derive(Clone, Debug)]
pub struct EvidenceItem {
    pub trajectory: Trajectory,
    pub frame: Arc<Frame>,
    pub description: String,
    pub s_exp: u8,
    pub s_help: u8,
    pub step_found: usize,
    /// Global discovery index of the observation.
    pub order: usize,
}

/// Live search frontier plus everything accumulated so far.
#[derive(Clone, Debug)]
pub struct BeamState {
    pub beam: Vec<BeamNode>,
    pub evidence: Vec<EvidenceItem>,
    pub step: usize,
    /// Observations scored so far; also the next frame id.
    pub observations: usize,
    pub trace: SearchTrace,
}

impl Default for BeamState {
    fn default() -> Self {
        BeamState {
            beam: vec![BeamNode::root()],
            evidence: Vec::new(),
            step: 0,
            observations: 0,
            trace: SearchTrace::default(),
        }
    }
}

/// Indices chosen for the next beam and the evidence cache, plus which
/// scores cleared their thresholds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Selection {
    pub beam: Vec<usize>,
    pub evidence: Vec<usize>,
    pub passed_exp: Vec<bool>,
    pub passed_help: Vec<bool>,
}

fn top_indices(scores: impl Iterator<Item = f64>, gamma: f64, limit: usize) -> (Vec<usize>, Vec<bool>) {
    let scores: Vec<f64> = scores.collect();
    let passed: Vec<bool> = scores.iter().map(|s| *s >= gamma).collect();
    let mut idx: Vec<usize> = (0..scores.len()).filter(|&i| passed[i]).collect();
    // stable: equal scores keep enumeration order
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    idx.truncate(limit);
    (idx, passed)
}

/// Threshold each criterion independently, then take the top `beam` by
/// exploration score and the top `h` by helpfulness. Ties go to the earlier
/// index.
pub fn select_top(
    scores: &[(f64, f64)],
    gamma_exp: f64,
    gamma_help: f64,
    beam: usize,
    h: usize,
) -> Selection {
    let (beam_idx, passed_exp) = top_indices(scores.iter().map(|s| s.0), gamma_exp, beam);
    let (evidence_idx, passed_help) = top_indices(scores.iter().map(|s| s.1), gamma_help, h);
    Selection {
        beam: beam_idx,
        evidence: evidence_idx,
        passed_exp,
        passed_help,
    }
}

struct Observation {
    candidate: Candidate,
    frame: Arc<Frame>,
    description: String,
    frame_id: usize,
}

/// One expand → roll out → score → select round.
///
/// A world-model fault aborts the step: the fault is traced, the beam and
/// evidence stay as they were, and the error is returned. A scorer fault
/// only zeroes that candidate's scores.
pub fn beam_step(
    state: &mut BeamState,
    reference: &ReferenceView,
    world: &dyn WorldModel,
    scorer: &dyn Scorer,
    question: &Question,
    cfg: &SearchConfig,
) -> Result<(), SearchError> {
    if state.beam.is_empty() {
        return Err(SearchError::State("beam is empty".into()));
    }
    if state.step >= cfg.n {
        return Err(SearchError::State(format!("step limit {} reached", cfg.n)));
    }
    let step = state.step + 1;
    state.trace.push(TraceEvent::new(step, "step_start").detail(format!(
        "beam={}",
        state
            .beam
            .iter()
            .map(|b| b.trajectory.to_string())
            .collect::<Vec<_>>()
            .join(",")
    )));

    let mut enumerated: Vec<(Candidate, Option<PruneReason>)> = Vec::new();
    let mut plans = Vec::new();
    for node in &state.beam {
        let all = enumerate_candidates(&node.trajectory, cfg);
        let survivors: Vec<Candidate> = all
            .iter()
            .filter(|(_, r)| r.is_none())
            .map(|(c, _)| c.clone())
            .collect();
        plans.extend(plan_rollouts(&survivors)?);
        enumerated.extend(all);
    }

    let results: Vec<Result<Vec<Frame>, WorldModelError>> = plans
        .par_iter()
        .map(|plan| {
            world.rollout(&RolloutRequest {
                reference: reference.frame.clone(),
                poses: plan.poses.clone(),
                intrinsics: reference.intrinsics,
                pitch_deg: reference.pitch_deg,
            })
        })
        .collect();

    let mut frames_by_group: HashMap<(String, ActionKind), Vec<Arc<Frame>>> = HashMap::new();
    for (plan, result) in plans.iter().zip(results) {
        let target = plan.parent.extended(plan.action, plan.length);
        let frames = match result {
            Ok(f) if f.len() == plan.length => f,
            Ok(f) => {
                let err = WorldModelError::FrameCount {
                    expected: plan.length,
                    got: f.len(),
                };
                return Err(abort(state, step, &target, err));
            }
            Err(err) => return Err(abort(state, step, &target, err)),
        };
        let mut event = TraceEvent::new(step, "rollout").traj(&target);
        event.frames = Some(frames.len());
        state.trace.push(event);
        frames_by_group.insert(
            (plan.parent.to_string(), plan.action.kind()),
            frames.into_iter().map(Arc::new).collect(),
        );
    }

    let observations: Vec<Observation> = enumerated
        .iter()
        .filter(|(_, r)| r.is_none())
        .enumerate()
        .map(|(i, (c, _))| {
            let frames = &frames_by_group[&(c.parent.to_string(), c.appended_action.kind())];
            Observation {
                candidate: c.clone(),
                frame: frames[c.repetitions - 1].clone(),
                description: describe(&c.full_trajectory, cfg),
                frame_id: state.observations + i,
            }
        })
        .collect();

    let scored: Vec<(ScorePair, Option<String>)> = observations
        .par_iter()
        .map(|o| {
            match scorer.score(&ScoreRequest {
                question,
                trajectory: &o.candidate.full_trajectory,
                description: &o.description,
                frame: &o.frame,
            }) {
                Ok(s) => (s, None),
                Err(e) => (ScorePair::zero(), Some(e.to_string())),
            }
        })
        .collect();
    for (o, (_, fault)) in observations.iter().zip(&scored) {
        if let Some(msg) = fault {
            state.trace.push(
                TraceEvent::new(step, "fault")
                    .traj(&o.candidate.full_trajectory)
                    .detail(format!("scorer: {msg}")),
            );
        }
    }

    let numeric: Vec<(f64, f64)> = scored
        .iter()
        .map(|(s, _)| (s.s_exp as f64, s.s_help as f64))
        .collect();
    let selection = select_top(&numeric, cfg.gamma_exp, cfg.gamma_help, cfg.beam, cfg.h);

    let mut in_beam = vec![false; observations.len()];
    let mut in_evidence = vec![false; observations.len()];
    for &i in &selection.beam {
        in_beam[i] = true;
    }
    for &i in &selection.evidence {
        in_evidence[i] = true;
    }

    // candidate events in enumeration order, pruned and scored interleaved
    let mut scored_iter = observations.iter().zip(&scored).enumerate();
    for (cand, reason) in &enumerated {
        let mut event = TraceEvent::new(step, "candidate").traj(&cand.full_trajectory);
        let disposition = match reason {
            Some(r) => Disposition::Pruned(*r),
            None => {
                let (i, (_, (score, _))) = scored_iter.next().expect("one observation per survivor");
                event.s_exp = Some(score.s_exp);
                event.s_help = Some(score.s_help);
                Disposition::Scored {
                    passed_exp: selection.passed_exp[i],
                    passed_help: selection.passed_help[i],
                    beam: in_beam[i],
                    evidence: in_evidence[i],
                }
            }
        };
        event.disposition = Some(disposition.label());
        state.trace.push(event);
    }

    let mut evidence_idx = selection.evidence.clone();
    evidence_idx.sort_unstable();
    for i in evidence_idx {
        let o = &observations[i];
        state.evidence.push(EvidenceItem {
            trajectory: o.candidate.full_trajectory.clone(),
            frame: o.frame.clone(),
            description: o.description.clone(),
            s_exp: scored[i].0.s_exp,
            s_help: scored[i].0.s_help,
            step_found: step,
            order: o.frame_id,
        });
    }
    state.beam = selection
        .beam
        .iter()
        .map(|&i| BeamNode {
            trajectory: observations[i].candidate.full_trajectory.clone(),
            frame_id: Some(observations[i].frame_id),
            depth: step,
        })
        .collect();
    state.observations += observations.len();
    state.step = step;
    state.trace.push(TraceEvent::new(step, "step_end").detail(format!(
        "observations={} beam={} evidence_added={}",
        observations.len(),
        state.beam.len(),
        selection.evidence.len()
    )));
    Ok(())
}

fn abort(state: &mut BeamState, step: usize, traj: &Trajectory, err: WorldModelError) -> SearchError {
    state.trace.push(
        TraceEvent::new(step, "fault")
            .traj(traj)
            .detail(format!("world model: {err}")),
    );
    SearchError::WorldModel(err)
}

/// Keep the `cap` items with the highest helpfulness (earlier discovery wins
/// ties), returned in discovery order.
pub fn cap_evidence(items: &[EvidenceItem], cap: usize) -> Vec<EvidenceItem> {
    let mut ranked: Vec<&EvidenceItem> = items.iter().collect();
    ranked.sort_by(|a, b| b.s_help.cmp(&a.s_help).then(a.order.cmp(&b.order)));
    ranked.truncate(cap);
    ranked.sort_by_key(|e| e.order);
    ranked.into_iter().cloned().collect()
}

#[derive(Clone, Debug)]
pub struct SearchOutcome {
    /// Capped evidence in discovery order.
    pub evidence: Vec<EvidenceItem>,
    /// Evidence cached before the cap was applied.
    pub evidence_found: usize,
    pub steps: usize,
    pub observations: usize,
    pub trace: SearchTrace,
}

impl SearchOutcome {
    /// Trajectories that were rolled out and scored, in discovery order.
    pub fn visited(&self) -> Vec<String> {
        visited(&self.trace)
    }
}

fn visited(trace: &SearchTrace) -> Vec<String> {
    trace
        .of_kind("candidate")
        .filter(|e| e.s_exp.is_some())
        .filter_map(|e| e.traj.clone())
        .collect()
}

/// An unrecoverable backend fault, with whatever the search had gathered.
#[derive(Debug)]
pub struct SearchFailure {
    pub error: SearchError,
    pub evidence: Vec<EvidenceItem>,
    pub trace: SearchTrace,
}

impl fmt::Display for SearchFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "search aborted: {}", self.error)
    }
}

impl std::error::Error for SearchFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Run up to `cfg.n` beam steps from the empty trajectory.
pub fn spatial_beam_search(
    reference: &ReferenceView,
    question: &Question,
    world: &dyn WorldModel,
    scorer: &dyn Scorer,
    cfg: &SearchConfig,
) -> Result<SearchOutcome, SearchFailure> {
    let mut state = BeamState::default();
    if let Err(e) = cfg.validate() {
        return Err(SearchFailure {
            error: e.into(),
            evidence: Vec::new(),
            trace: state.trace,
        });
    }
    let mut cause = TerminalCause::StepLimit;
    while state.step < cfg.n {
        if let Err(error) = beam_step(&mut state, reference, world, scorer, question, cfg) {
            state
                .trace
                .push(TraceEvent::new(state.step + 1, "terminate").detail("fault"));
            return Err(SearchFailure {
                error,
                evidence: cap_evidence(&state.evidence, cfg.evidence_cap),
                trace: state.trace,
            });
        }
        if state.beam.is_empty() {
            cause = TerminalCause::EmptyBeam;
            break;
        }
    }
    let detail = match cause {
        TerminalCause::StepLimit => "step_limit",
        TerminalCause::EmptyBeam => "empty_beam",
        TerminalCause::Fault => "fault",
    };
    state.trace.push(TraceEvent::new(state.step, "terminate").detail(detail));
    Ok(SearchOutcome {
        evidence: cap_evidence(&state.evidence, cfg.evidence_cap),
        evidence_found: state.evidence.len(),
        steps: state.step,
        observations: state.observations,
        trace: state.trace,
    })
}
