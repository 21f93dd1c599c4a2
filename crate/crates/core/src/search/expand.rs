use std::collections::BTreeMap;

use serde::Serialize;

use crate::geometry::{cumulative_poses, Action, ActionKind, CameraPose, Trajectory, ACTION_ORDER};

use super::{SearchConfig, SearchError};

/// Slack for inclusive budget comparisons on accumulated floats.
const BUDGET_EPS: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct BeamNode {
    pub trajectory: Trajectory,
    /// Observation that produced this node; `None` for the root.
    pub frame_id: Option<usize>,
    pub depth: usize,
}

impl BeamNode {
    pub fn root() -> Self {
        BeamNode {
            trajectory: Trajectory::empty(),
            frame_id: None,
            depth: 0,
        }
    }
}

/// `parent ⊕ appended_action^repetitions`.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub parent: Trajectory,
    pub appended_action: Action,
    pub repetitions: usize,
    pub full_trajectory: Trajectory,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum PruneReason {
    Reversal,
    Budget,
}

impl PruneReason {
    pub fn as_str(self) -> &'static str {
        match self {
            PruneReason::Reversal => "reversal",
            PruneReason::Budget => "budget",
        }
    }
}

/// True iff `action` immediately undoes the last action of `traj`.
pub fn is_reversal(traj: &Trajectory, action: &Action) -> bool {
    match (traj.last(), action.kind().inverse()) {
        (Some(last), Some(inv)) => last.kind() == inv,
        _ => false,
    }
}

/// Length, total forward distance and |net yaw| all within their limits
/// (inclusive).
pub fn within_budget(traj: &Trajectory, cfg: &SearchConfig) -> bool {
    traj.len() <= cfg.max_traj_len
        && traj.total_distance() <= cfg.translation_budget + BUDGET_EPS
        && traj.net_yaw().abs() <= cfg.rotation_budget + BUDGET_EPS
}

fn step_action(kind: ActionKind, cfg: &SearchConfig) -> Action {
    let magnitude = match kind {
        ActionKind::MoveForward => cfg.forward_step,
        _ => cfg.turn_step,
    };
    Action::new(kind, magnitude).expect("step sizes validated with the config")
}

/// All `3k` candidates in enumeration order (action order, then `r`
/// ascending), each with the reason it was pruned, if any.
pub fn enumerate_candidates(
    parent: &Trajectory,
    cfg: &SearchConfig,
) -> Vec<(Candidate, Option<PruneReason>)> {
    let mut out = Vec::with_capacity(3 * cfg.k);
    for kind in ACTION_ORDER {
        let action = step_action(kind, cfg);
        let reverses = is_reversal(parent, &action);
        for r in 1..=cfg.k {
            let full = parent.extended(action, r);
            let reason = if reverses {
                Some(PruneReason::Reversal)
            } else if !within_budget(&full, cfg) {
                Some(PruneReason::Budget)
            } else {
                None
            };
            out.push((
                Candidate {
                    parent: parent.clone(),
                    appended_action: action,
                    repetitions: r,
                    full_trajectory: full,
                },
                reason,
            ));
        }
    }
    out
}

/// Surviving candidates of `node`, in enumeration order.
pub fn expand(node: &BeamNode, cfg: &SearchConfig) -> Vec<Candidate> {
    enumerate_candidates(&node.trajectory, cfg)
        .into_iter()
        .filter_map(|(c, reason)| reason.is_none().then_some(c))
        .collect()
}

/// One batched world-model call serving every surviving repetition count
/// of a single appended action.
#[derive(Clone, Debug, PartialEq)]
pub struct RolloutPlan {
    pub parent: Trajectory,
    pub action: Action,
    /// Longest surviving repetition count; also the number of frames.
    pub length: usize,
    /// Poses of `parent ⊕ action^r` for `r = 1..=length`.
    pub poses: Vec<CameraPose>,
    /// Repetition count → frame index in the rollout.
    pub frame_for: BTreeMap<usize, usize>,
}

/// Group candidates by appended action, emitting one request per group for
/// the longest surviving repetition. Relies on prefix consistency: frame
/// `r − 1` of that rollout is the view after `r` repetitions.
pub fn plan_rollouts(candidates: &[Candidate]) -> Result<Vec<RolloutPlan>, SearchError> {
    let Some(first) = candidates.first() else {
        return Ok(Vec::new());
    };
    if candidates.iter().any(|c| c.parent != first.parent) {
        return Err(SearchError::MixedParents);
    }
    let mut plans: Vec<RolloutPlan> = Vec::new();
    for kind in ACTION_ORDER {
        let group: Vec<&Candidate> = candidates
            .iter()
            .filter(|c| c.appended_action.kind() == kind)
            .collect();
        let Some(longest) = group.iter().max_by_key(|c| c.repetitions) else {
            continue;
        };
        let length = longest.repetitions;
        let all = cumulative_poses(&longest.full_trajectory);
        let poses = all[all.len() - length..].to_vec();
        plans.push(RolloutPlan {
            parent: first.parent.clone(),
            action: longest.appended_action,
            length,
            poses,
            frame_for: group.iter().map(|c| (c.repetitions, c.repetitions - 1)).collect(),
        });
    }
    Ok(plans)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(s: &str) -> BeamNode {
        BeamNode {
            trajectory: s.parse().unwrap(),
            frame_id: None,
            depth: 1,
        }
    }

    fn traj(s: &str) -> Trajectory {
        s.parse().unwrap()
    }

    #[test]
    fn root_expands_to_nine() {
        let cands = expand(&BeamNode::root(), &SearchConfig::default());
        let names: Vec<String> = cands.iter().map(|c| c.full_trajectory.to_string()).collect();
        assert_eq!(
            names,
            [
                "F0.25",
                "F0.25|F0.25",
                "F0.25|F0.25|F0.25",
                "L9",
                "L9|L9",
                "L9|L9|L9",
                "R9",
                "R9|R9",
                "R9|R9|R9"
            ]
        );
    }

    #[test]
    fn no_right_turn_after_left() {
        let cands = expand(&node("L9"), &SearchConfig::default());
        assert_eq!(cands.len(), 6);
        assert!(cands
            .iter()
            .all(|c| c.appended_action.kind() != ActionKind::TurnRight));
    }

    #[test]
    fn full_length_node_has_no_children() {
        let n = node("F0.25|F0.25|F0.25|F0.25|L9|L9|L9|L9");
        assert!(expand(&n, &SearchConfig::default()).is_empty());
        assert!(enumerate_candidates(&n.trajectory, &SearchConfig::default())
            .iter()
            .all(|(_, r)| r.is_some()));
    }

    #[test]
    fn reversal_examples() {
        assert!(is_reversal(&traj("L9"), &Action::right(9.0).unwrap()));
        assert!(!is_reversal(&Trajectory::empty(), &Action::right(9.0).unwrap()));
        assert!(!is_reversal(&traj("F0.25"), &Action::forward(0.25).unwrap()));
        assert!(!is_reversal(&traj("R9|F0.25"), &Action::left(9.0).unwrap()));
    }

    #[test]
    fn budget_examples() {
        let cfg = SearchConfig::default();
        let eight_forward = traj(&vec!["F0.25"; 8].join("|"));
        assert!(within_budget(&eight_forward, &cfg));
        let nine = traj(&vec!["F0.25"; 9].join("|"));
        assert!(!within_budget(&nine, &cfg));

        let mut tokens = vec!["L9"; 10];
        tokens.push("R9");
        let wobble = traj(&tokens.join("|"));
        assert_eq!(wobble.net_yaw(), 81.0);
        assert!(!within_budget(&wobble, &cfg));
        let long = SearchConfig {
            max_traj_len: 16,
            ..cfg.clone()
        };
        assert!(within_budget(&wobble, &long));
        let too_far = traj(&vec!["L9"; 11].join("|"));
        assert!(!within_budget(&too_far, &long));
    }

    #[test]
    fn root_rollout_plan() {
        let cands = expand(&BeamNode::root(), &SearchConfig::default());
        let plans = plan_rollouts(&cands).unwrap();
        assert_eq!(plans.len(), 3);
        for p in &plans {
            assert_eq!(p.length, 3);
            assert_eq!(p.poses.len(), 3);
            assert_eq!(p.frame_for, BTreeMap::from([(1, 0), (2, 1), (3, 2)]));
        }
    }

    #[test]
    fn truncated_group_plans_shorter_rollout() {
        // seven forward steps leave room for one more action only
        let cfg = SearchConfig::default();
        let parent = node("F0.25|F0.25|F0.25|F0.25|F0.25|F0.25|L9");
        let cands = expand(&parent, &cfg);
        assert_eq!(cands.len(), 2);
        let plans = plan_rollouts(&cands).unwrap();
        assert_eq!(plans.len(), 2);
        assert!(plans.iter().all(|p| p.length == 1));

        let two_left = SearchConfig {
            translation_budget: 0.5,
            ..cfg
        };
        let cands = expand(&BeamNode::root(), &two_left);
        let forward = plan_rollouts(&cands).unwrap().remove(0);
        assert_eq!(forward.action.kind(), ActionKind::MoveForward);
        assert_eq!(forward.length, 2);
        assert_eq!(forward.frame_for, BTreeMap::from([(1, 0), (2, 1)]));
    }

    #[test]
    fn mixed_parents_rejected() {
        let mut cands = expand(&BeamNode::root(), &SearchConfig::default());
        cands.extend(expand(&node("F0.25"), &SearchConfig::default()));
        assert!(matches!(plan_rollouts(&cands), Err(SearchError::MixedParents)));
    }
}
