use crate::geometry::{ActionKind, Trajectory};

use super::SearchConfig;

fn format_magnitude(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    s.to_string()
}

/// Natural-language camera motion, e.g. `move forward 0.2 m, then turn right 30°`.
/// Runs of the same kind are merged.
pub fn describe(traj: &Trajectory, _cfg: &SearchConfig) -> String {
    if traj.is_empty() {
        return "stay at the initial view".to_string();
    }
    traj.merged_runs()
        .into_iter()
        .map(|(kind, total)| match kind {
            ActionKind::MoveForward => format!("move forward {} m", format_magnitude(total)),
            ActionKind::TurnLeft => format!("turn left {}°", format_magnitude(total)),
            ActionKind::TurnRight => format!("turn right {}°", format_magnitude(total)),
        })
        .collect::<Vec<_>>()
        .join(", then ")
}
