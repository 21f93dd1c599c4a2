//! World models map a reference image plus a sequence of reference-relative
//! camera poses to one imagined frame per pose.
//!
//! [`SyntheticWorld`] is an exact raycaster over a [`Scene`] and honours the
//! prefix-consistency contract bit for bit: a rollout's first `m` frames are
//! identical to the rollout of its first `m` poses. [`RemoteWorldModel`]
//! speaks the JSON rollout protocol to an external generator.

mod frame;
mod remote;
mod render;
mod scene;

use std::sync::Arc;

use thiserror::Error;

use crate::geometry::{compose, pitch_rotation, CameraPose, Intrinsics};

pub use frame::Frame;
pub use remote::{
    decode_rollout_request, decode_rollout_response, encode_rollout_request, HealthStatus, RemoteWorldModel,
    PROTOCOL_VERSION,
};
pub use render::{render, render_hits, visibility, LIGHT_DIRECTION, AMBIENT};
pub use scene::{Scene, SceneObject, Shape};

#[derive(Debug, Error)]
pub enum WorldModelError {
    #[error("transport fault: {0}")]
    Transport(String),
    #[error("protocol fault: {0}")]
    Protocol(String),
    #[error("protocol version mismatch: expected {expected}, got {got}")]
    ProtocolVersion { expected: u32, got: u32 },
    #[error("server error {code}: {message}")]
    Server { code: String, message: String },
    #[error("expected {expected} frames, got {got}")]
    FrameCount { expected: usize, got: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid request: {0}")]
    Validation(String),
}

/// `(x₀, C)`: the reference image and cumulative reference-relative poses.
#[derive(Clone, Debug)]
pub struct RolloutRequest {
    pub reference: Arc<Frame>,
    pub poses: Vec<CameraPose>,
    pub intrinsics: Intrinsics,
    pub pitch_deg: f64,
}

impl RolloutRequest {
    pub fn validate(&self, max_len: usize) -> Result<(), WorldModelError> {
        if self.poses.is_empty() {
            return Err(WorldModelError::Validation("pose sequence is empty".into()));
        }
        if self.poses.len() > max_len {
            return Err(WorldModelError::Validation(format!(
                "{} poses exceeds the maximum of {max_len}",
                self.poses.len()
            )));
        }
        let (w, h) = (self.intrinsics.width, self.intrinsics.height);
        if self.reference.width() != w || self.reference.height() != h {
            return Err(WorldModelError::Dimension(format!(
                "reference is {}x{}, intrinsics are {w}x{h}",
                self.reference.width(),
                self.reference.height()
            )));
        }
        Ok(())
    }
}

pub trait WorldModel: Send + Sync {
    /// Short identity recorded in reports.
    fn name(&self) -> String;

    /// Exactly one frame per pose, in order.
    fn rollout(&self, req: &RolloutRequest) -> Result<Vec<Frame>, WorldModelError>;
}

/// Deterministic raycasting world model over a known scene.
#[derive(Clone, Debug)]
pub struct SyntheticWorld {
    scene: Arc<Scene>,
    max_len: usize,
}

impl SyntheticWorld {
    pub fn new(scene: Arc<Scene>) -> Self {
        SyntheticWorld { scene, max_len: 8 }
    }

    pub fn with_max_len(mut self, max_len: usize) -> Self {
        self.max_len = max_len;
        self
    }

    pub fn scene(&self) -> &Scene {
        &self.scene
    }

    /// Render from the reference camera, i.e. `x₀`.
    pub fn reference_frame(&self, k: &Intrinsics, pitch_deg: f64) -> Frame {
        render(&self.scene, &camera_pose(&CameraPose::identity(), pitch_deg), k)
    }
}

/// Full camera placement: horizontal motion followed by the fixed pitch.
pub fn camera_pose(horizontal: &CameraPose, pitch_deg: f64) -> CameraPose {
    if pitch_deg == 0.0 {
        *horizontal
    } else {
        compose(horizontal, &pitch_rotation(pitch_deg))
    }
}

impl WorldModel for SyntheticWorld {
    fn name(&self) -> String {
        "synthetic-raycast".to_string()
    }

    fn rollout(&self, req: &RolloutRequest) -> Result<Vec<Frame>, WorldModelError> {
        req.validate(self.max_len)?;
        Ok(req
            .poses
            .iter()
            .map(|p| render(&self.scene, &camera_pose(p, req.pitch_deg), &req.intrinsics))
            .collect())
    }
}
