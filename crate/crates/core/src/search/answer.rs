use serde::{Deserialize, Serialize};

use crate::scoring::{AnswerRequest, Answerer, EvidenceView, Question};

use super::{EvidenceItem, ReferenceView, SearchConfig};

/// Evidence as recorded alongside an answer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceSummary {
    pub trajectory: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub s_exp: u8,
    pub s_help: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnswerRecord {
    pub question_id: String,
    /// `None` when the answerer failed or produced an out-of-range choice.
    pub chosen: Option<usize>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub raw: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fault: Option<String>,
    pub evidence_used: Vec<EvidenceSummary>,
}

impl AnswerRecord {
    pub fn answered(&self) -> bool {
        self.chosen.is_some()
    }
}

/// Convert cached evidence into answerer views, dropping descriptions when
/// they are switched off.
pub fn evidence_views(evidence: &[EvidenceItem], cfg: &SearchConfig) -> Vec<EvidenceView> {
    evidence
        .iter()
        .map(|e| EvidenceView {
            trajectory: e.trajectory.clone(),
            description: cfg.include_descriptions.then(|| e.description.clone()),
            frame: e.frame.clone(),
        })
        .collect()
}

/// Ask the answerer with the reference view plus evidence. An empty evidence
/// list is the plain baseline query.
pub fn assemble_answer(
    question: &Question,
    reference: &ReferenceView,
    evidence: &[EvidenceItem],
    answerer: &dyn Answerer,
    cfg: &SearchConfig,
) -> AnswerRecord {
    let views = evidence_views(evidence, cfg);
    let evidence_used = evidence
        .iter()
        .zip(&views)
        .map(|(e, v)| EvidenceSummary {
            trajectory: e.trajectory.to_string(),
            description: v.description.clone(),
            s_exp: e.s_exp,
            s_help: e.s_help,
        })
        .collect();
    let result = answerer.answer(&AnswerRequest {
        question,
        reference: &reference.frame,
        evidence: &views,
    });
    let (chosen, raw, fault) = match result {
        Ok(out) if out.index < question.choices.len() => (Some(out.index), out.raw, None),
        Ok(out) => (
            None,
            out.raw,
            Some(format!("choice index {} out of range", out.index)),
        ),
        Err(e) => (None, String::new(), Some(e.to_string())),
    };
    AnswerRecord {
        question_id: question.id.clone(),
        chosen,
        raw,
        fault,
        evidence_used,
    }
}
