//! Spatial beam search: expand every beam node by repeated primitive
//! actions, roll the survivors out through a world model, score each
//! imagined view for exploration value and helpfulness, keep the best as the
//! next beam and cache helpful views as answer evidence.

mod answer;
mod config;
mod describe;
mod engine;
mod expand;
mod trace;

use std::sync::Arc;

use thiserror::Error;

use crate::geometry::Intrinsics;
use crate::worldmodel::{Frame, WorldModelError};

pub use answer::{assemble_answer, evidence_views, AnswerRecord, EvidenceSummary};
pub use config::{ConfigError, SearchConfig, UNBOUNDED};
pub use describe::describe;
pub use engine::{
    beam_step, cap_evidence, select_top, spatial_beam_search, BeamState, EvidenceItem,
    SearchFailure, SearchOutcome, Selection,
};
pub use expand::{
    enumerate_candidates, expand, is_reversal, plan_rollouts, within_budget, BeamNode, Candidate,
    PruneReason, RolloutPlan,
};
pub use trace::{Disposition, SearchTrace, TerminalCause, TraceEvent};

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("world model fault: {0}")]
    WorldModel(#[from] WorldModelError),
    #[error("invalid search configuration: {0}")]
    Config(#[from] ConfigError),
    #[error("rollout plan needs candidates sharing one parent")]
    MixedParents,
    #[error("beam state precondition violated: {0}")]
    State(String),
}

/// The reference image `x₀` with the camera model used to imagine from it.
#[derive(Clone, Debug)]
pub struct ReferenceView {
    pub frame: Arc<Frame>,
    pub intrinsics: Intrinsics,
    pub pitch_deg: f64,
}
