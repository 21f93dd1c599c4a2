use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::GeometryError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ActionKind {
    MoveForward,
    TurnLeft,
    TurnRight,
}

/// Enumeration order used for expansion and tie-breaking.
pub const ACTION_ORDER: [ActionKind; 3] = [
    ActionKind::MoveForward,
    ActionKind::TurnLeft,
    ActionKind::TurnRight,
];

impl ActionKind {
    pub fn letter(self) -> char {
        match self {
            ActionKind::MoveForward => 'F',
            ActionKind::TurnLeft => 'L',
            ActionKind::TurnRight => 'R',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        match c {
            'F' => Some(ActionKind::MoveForward),
            'L' => Some(ActionKind::TurnLeft),
            'R' => Some(ActionKind::TurnRight),
            _ => None,
        }
    }

    pub fn is_turn(self) -> bool {
        !matches!(self, ActionKind::MoveForward)
    }

    /// The kind that undoes this one, if the action set has it.
    pub fn inverse(self) -> Option<Self> {
        match self {
            ActionKind::MoveForward => None,
            ActionKind::TurnLeft => Some(ActionKind::TurnRight),
            ActionKind::TurnRight => Some(ActionKind::TurnLeft),
        }
    }
}

/// A primitive egocentric move. Magnitude is meters for `MoveForward` and
/// degrees for turns.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAction", into = "RawAction")]
pub struct Action {
    kind: ActionKind,
    magnitude: f64,
}

#[derive(Serialize, Deserialize)]
struct RawAction {
    kind: ActionKind,
    magnitude: f64,
}

impl TryFrom<RawAction> for Action {
    type Error = GeometryError;
    fn try_from(raw: RawAction) -> Result<Self, Self::Error> {
        Action::new(raw.kind, raw.magnitude)
    }
}

impl From<Action> for RawAction {
    fn from(a: Action) -> Self {
        RawAction {
            kind: a.kind,
            magnitude: a.magnitude,
        }
    }
}

impl Action {
    pub fn new(kind: ActionKind, magnitude: f64) -> Result<Self, GeometryError> {
        if !(magnitude.is_finite() && magnitude > 0.0) {
            return Err(GeometryError::InvalidMagnitude(magnitude));
        }
        Ok(Action { kind, magnitude })
    }

    pub fn forward(meters: f64) -> Result<Self, GeometryError> {
        Self::new(ActionKind::MoveForward, meters)
    }

    pub fn left(degrees: f64) -> Result<Self, GeometryError> {
        Self::new(ActionKind::TurnLeft, degrees)
    }

    pub fn right(degrees: f64) -> Result<Self, GeometryError> {
        Self::new(ActionKind::TurnRight, degrees)
    }

    pub fn kind(&self) -> ActionKind {
        self.kind
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    /// Signed yaw contribution in degrees (left positive).
    pub fn signed_yaw(&self) -> f64 {
        match self.kind {
            ActionKind::MoveForward => 0.0,
            ActionKind::TurnLeft => self.magnitude,
            ActionKind::TurnRight => -self.magnitude,
        }
    }

    pub fn distance(&self) -> f64 {
        match self.kind {
            ActionKind::MoveForward => self.magnitude,
            _ => 0.0,
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.kind.letter(), self.magnitude)
    }
}

impl FromStr for Action {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let token = s.trim();
        let bad = |reason: &str| GeometryError::ParseTrajectory {
            token: token.to_string(),
            reason: reason.to_string(),
        };
        let mut chars = token.chars();
        let kind = chars
            .next()
            .and_then(ActionKind::from_letter)
            .ok_or_else(|| bad("expected kind letter F, L or R"))?;
        let magnitude: f64 = chars
            .as_str()
            .parse()
            .map_err(|_| bad("expected numeric magnitude"))?;
        Action::new(kind, magnitude).map_err(|e| bad(&e.to_string()))
    }
}

/// An ordered sequence of actions; the empty trajectory is the root.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Trajectory(Vec<Action>);

impl Trajectory {
    pub fn empty() -> Self {
        Trajectory(Vec::new())
    }

    pub fn new(actions: Vec<Action>) -> Self {
        Trajectory(actions)
    }

    pub fn actions(&self) -> &[Action] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> Option<&Action> {
        self.0.last()
    }

    /// `self ⊕ action^times`
    pub fn extended(&self, action: Action, times: usize) -> Trajectory {
        let mut actions = Vec::with_capacity(self.0.len() + times);
        actions.extend_from_slice(&self.0);
        actions.extend(std::iter::repeat_n(action, times));
        Trajectory(actions)
    }

    pub fn prefix(&self, len: usize) -> Trajectory {
        Trajectory(self.0[..len].to_vec())
    }

    pub fn total_distance(&self) -> f64 {
        self.0.iter().map(Action::distance).sum()
    }

    pub fn net_yaw(&self) -> f64 {
        self.0.iter().map(Action::signed_yaw).sum()
    }

    /// Maximal runs of identical kinds, with magnitudes summed.
    pub fn merged_runs(&self) -> Vec<(ActionKind, f64)> {
        let mut runs: Vec<(ActionKind, f64)> = Vec::new();
        for a in &self.0 {
            match runs.last_mut() {
                Some((kind, total)) if *kind == a.kind => *total += a.magnitude,
                _ => runs.push((a.kind, a.magnitude)),
            }
        }
        runs
    }
}

impl fmt::Display for Trajectory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            write!(f, "{a}")?;
        }
        Ok(())
    }
}

impl FromStr for Trajectory {
    type Err = GeometryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Trajectory::empty());
        }
        s.split('|')
            .map(str::parse)
            .collect::<Result<Vec<_>, _>>()
            .map(Trajectory)
    }
}

impl FromIterator<Action> for Trajectory {
    fn from_iter<I: IntoIterator<Item = Action>>(iter: I) -> Self {
        Trajectory(iter.into_iter().collect())
    }
}
