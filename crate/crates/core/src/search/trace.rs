use serde::{Deserialize, Serialize};

use super::PruneReason;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalCause {
    StepLimit,
    EmptyBeam,
    Fault,
}

/// Final fate of an enumerated candidate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Disposition {
    Pruned(PruneReason),
    Scored {
        passed_exp: bool,
        passed_help: bool,
        beam: bool,
        evidence: bool,
    },
}

impl Disposition {
    pub fn label(&self) -> String {
        match *self {
            Disposition::Pruned(r) => format!("pruned:{}", r.as_str()),
            Disposition::Scored {
                beam: true,
                evidence: true,
                ..
            } => "beam+evidence".into(),
            Disposition::Scored { beam: true, .. } => "beam".into(),
            Disposition::Scored { evidence: true, .. } => "evidence".into(),
            Disposition::Scored {
                passed_exp: false,
                passed_help: false,
                ..
            } => "dropped:below_threshold".into(),
            Disposition::Scored { .. } => "dropped:rank".into(),
        }
    }
}

/// One line of the search log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub step: usize,
    pub event: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub traj: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frames: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_exp: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s_help: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disposition: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl TraceEvent {
    pub fn new(step: usize, event: &str) -> Self {
        TraceEvent {
            step,
            event: event.to_string(),
            traj: None,
            frames: None,
            s_exp: None,
            s_help: None,
            disposition: None,
            detail: None,
        }
    }

    pub fn traj(mut self, t: impl ToString) -> Self {
        self.traj = Some(t.to_string());
        self
    }

    pub fn detail(mut self, d: impl Into<String>) -> Self {
        self.detail = Some(d.into());
        self
    }
}

/// Ordered event log for one search; serializes to one JSON object per line.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SearchTrace {
    pub events: Vec<TraceEvent>,
}

impl SearchTrace {
    pub fn push(&mut self, e: TraceEvent) {
        self.events.push(e);
    }

    pub fn of_kind<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a TraceEvent> + 'a {
        self.events.iter().filter(move |e| e.event == kind)
    }

    pub fn rollout_count(&self) -> usize {
        self.of_kind("rollout").count()
    }

    pub fn terminal_cause(&self) -> Option<TerminalCause> {
        self.of_kind("terminate")
            .last()
            .and_then(|e| e.detail.as_deref())
            .and_then(|d| serde_json::from_value(serde_json::Value::String(d.to_string())).ok())
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&serde_json::to_string(e).expect("trace event serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, serde_json::Error> {
        let events = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(serde_json::from_str)
            .collect::<Result<_, _>>()?;
        Ok(SearchTrace { events })
    }
}
