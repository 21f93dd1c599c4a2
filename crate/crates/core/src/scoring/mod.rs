//! Scorer (`V_search`) and answerer (`V_QA`) abstractions, the multiple-choice
//! question type, a geometric oracle for both roles, and a chat-completions
//! client that carries the prompt templates.

mod oracle;
mod parse;
mod question;
mod remote;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Trajectory;
use crate::worldmodel::Frame;

pub use oracle::{oracle_answer, oracle_score, OracleAnswerer, OracleScorer, OracleSpec};
pub use parse::{format_scores, parse_choice, parse_scores};
pub use question::{Category, Question};
pub use remote::{
    build_answer_payload, build_score_payload, ChatEndpoint, PromptTemplates, RemoteAnswerer,
    RemoteScorer, API_KEY_ENV,
};

/// Top of the integer score scale.
pub const SCORE_MAX: u8 = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoringError {
    #[error("transport fault: {0}")]
    Transport(String),
    #[error("parse fault: {0}")]
    Parse(String),
    #[error("invalid question: {0}")]
    InvalidQuestion(String),
    #[error("backend fault: {0}")]
    Backend(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScorePair {
    pub s_exp: u8,
    pub s_help: u8,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub raw: String,
}

impl ScorePair {
    pub fn new(s_exp: u8, s_help: u8) -> Self {
        ScorePair {
            s_exp: s_exp.min(SCORE_MAX),
            s_help: s_help.min(SCORE_MAX),
            raw: String::new(),
        }
    }

    pub fn zero() -> Self {
        Self::new(0, 0)
    }
}

/// One imagined view to be scored against a question.
pub struct ScoreRequest<'a> {
    pub question: &'a Question,
    pub trajectory: &'a Trajectory,
    pub description: &'a str,
    pub frame: &'a Frame,
}

/// Must be stateless across calls: a score depends only on its request.
pub trait Scorer: Send + Sync {
    fn name(&self) -> String;
    fn score(&self, req: &ScoreRequest<'_>) -> Result<ScorePair, ScoringError>;
}

/// Evidence view as handed to the answerer.
#[derive(Clone, Debug)]
pub struct EvidenceView {
    pub trajectory: Trajectory,
    /// `None` when trajectory descriptions are switched off.
    pub description: Option<String>,
    pub frame: Arc<Frame>,
}

pub struct AnswerRequest<'a> {
    pub question: &'a Question,
    pub reference: &'a Frame,
    pub evidence: &'a [EvidenceView],
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnswerOutput {
    pub index: usize,
    pub raw: String,
}

pub trait Answerer: Send + Sync {
    fn name(&self) -> String;
    fn answer(&self, req: &AnswerRequest<'_>) -> Result<AnswerOutput, ScoringError>;
}
