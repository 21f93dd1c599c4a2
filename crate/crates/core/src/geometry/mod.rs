//! Rigid-body algebra for the primitive egocentric action set, plus the
//! Plücker ray maps used to condition world models on camera motion.
//!
//! Convention: right-handed camera frame, +z forward, +x right, +y down.
//! Poses map camera coordinates into the reference frame
//! (`p_ref = R * p_cam + t`), so the camera centre sits at `t`.
//! Angles are degrees at every interface.

mod action;
mod plucker;
mod pose;

pub use action::{Action, ActionKind, Trajectory, ACTION_ORDER};
pub use plucker::{plucker_map, plucker_map_with_pitch, ray_direction, Intrinsics, PluckerMap};
pub use pose::{
    compose, cumulative_poses, decompose_pitch, pitch_rotation, pose_of_action, relative_poses,
    yaw_rotation, CameraPose,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("action magnitude must be finite and > 0, got {0}")]
    InvalidMagnitude(f64),
    #[error("rotation is not a proper orthonormal matrix (max error {0:e})")]
    InvalidRotation(f64),
    #[error("non-finite value in pose")]
    NonFinite,
    #[error("invalid intrinsics: {0}")]
    InvalidIntrinsics(String),
    #[error("cannot parse trajectory token {token:?}: {reason}")]
    ParseTrajectory { token: String, reason: String },
    #[error("malformed plucker wire buffer: {0}")]
    Wire(String),
}

/// `(sin, cos)` of an angle in degrees.
///
/// Multiples of 90° come out exact, and `sin_cos_deg(-x)` is the exact
/// negation of `sin_cos_deg(x)` in its sine, so mirrored turns produce
/// transposed matrices bit for bit.
pub fn sin_cos_deg(deg: f64) -> (f64, f64) {
    let reduced = deg.abs() % 360.0;
    let (s, c) = if reduced == 0.0 {
        (0.0, 1.0)
    } else if reduced == 90.0 {
        (1.0, 0.0)
    } else if reduced == 180.0 {
        (0.0, -1.0)
    } else if reduced == 270.0 {
        (-1.0, 0.0)
    } else {
        reduced.to_radians().sin_cos()
    };
    if deg < 0.0 {
        (-s, c)
    } else {
        (s, c)
    }
}

pub fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

pub fn normalize(a: [f64; 3]) -> [f64; 3] {
    let n = norm(a);
    [a[0] / n, a[1] / n, a[2] / n]
}
