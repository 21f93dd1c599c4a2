use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Stand-in for "no limit" on beam width, cache size and step count.
pub const UNBOUNDED: usize = usize::MAX;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{key}: {message}")]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

/// Search hyperparameters. Defaults: 3 steps, 3 repetitions, beam 2,
/// thresholds 8/8, 0.25 m forward, 9° turns, at most 8 actions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    /// Maximum search steps.
    pub n: usize,
    /// Maximum consecutive repetitions of an action per expansion.
    pub k: usize,
    /// Beam width.
    pub beam: usize,
    /// Helpful views cached per step.
    pub h: usize,
    pub gamma_exp: f64,
    pub gamma_help: f64,
    pub max_traj_len: usize,
    /// Meters per forward step.
    pub forward_step: f64,
    /// Degrees per turn step.
    pub turn_step: f64,
    /// Bound on |net signed yaw|, degrees.
    pub rotation_budget: f64,
    /// Bound on total forward distance, meters.
    pub translation_budget: f64,
    /// Evidence views handed to the answerer.
    pub evidence_cap: usize,
    pub include_descriptions: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            n: 3,
            k: 3,
            beam: 2,
            h: 2,
            gamma_exp: 8.0,
            gamma_help: 8.0,
            max_traj_len: 8,
            forward_step: 0.25,
            turn_step: 9.0,
            rotation_budget: 90.0,
            translation_budget: 2.0,
            evidence_cap: 8,
            include_descriptions: true,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let err = |key: &str, message: &str| {
            Err(ConfigError {
                key: format!("search.{key}"),
                message: message.to_string(),
            })
        };
        for (key, v) in [
            ("n", self.n),
            ("k", self.k),
            ("beam", self.beam),
            ("h", self.h),
            ("max_traj_len", self.max_traj_len),
            ("evidence_cap", self.evidence_cap),
        ] {
            if v == 0 {
                return err(key, "must be at least 1");
            }
        }
        for (key, v) in [
            ("forward_step", self.forward_step),
            ("turn_step", self.turn_step),
            ("rotation_budget", self.rotation_budget),
            ("translation_budget", self.translation_budget),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return err(key, "must be finite and > 0");
            }
        }
        // Thresholds above the score scale are legal; they just never pass.
        for (key, v) in [("gamma_exp", self.gamma_exp), ("gamma_help", self.gamma_help)] {
            if !(v.is_finite() && v >= 0.0) {
                return err(key, "must be finite and >= 0");
            }
        }
        Ok(())
    }
}
