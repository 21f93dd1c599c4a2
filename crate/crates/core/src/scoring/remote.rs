use std::path::Path;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use reqwest::blocking::Client;
use serde_json::{json, Value};

use super::{
    parse_choice, parse_scores, AnswerOutput, AnswerRequest, Answerer, EvidenceView, Question,
    ScorePair, ScoreRequest, Scorer, ScoringError,
};
use crate::transport::{self, ConcurrencyLimit, HttpFault, HttpSettings};
use crate::worldmodel::Frame;

pub const API_KEY_ENV: &str = "SPATIAL_BEAM_API_KEY";

/// Editable prompt texts. Placeholders: `{question}`, `{choices}`,
/// `{description}`. The score template's only contract is that replies
/// contain `exploration:` and `helpful:` followed by 0–10 integers.
#[derive(Clone, Debug, PartialEq)]
pub struct PromptTemplates {
    pub baseline_qa: String,
    pub search_score: String,
    pub evidence_qa: String,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        PromptTemplates {
            baseline_qa: include_str!("../../templates/baseline_qa.txt").to_string(),
            search_score: include_str!("../../templates/search_score.txt").to_string(),
            evidence_qa: include_str!("../../templates/evidence_qa.txt").to_string(),
        }
    }
}

impl PromptTemplates {
    /// Load `baseline_qa.txt`, `search_score.txt` and `evidence_qa.txt`
    /// from `dir`, keeping the built-in text for any that are missing.
    pub fn load_dir(dir: &Path) -> std::io::Result<Self> {
        let mut t = Self::default();
        for (name, slot) in [
            ("baseline_qa.txt", &mut t.baseline_qa),
            ("search_score.txt", &mut t.search_score),
            ("evidence_qa.txt", &mut t.evidence_qa),
        ] {
            let path = dir.join(name);
            if path.exists() {
                *slot = std::fs::read_to_string(path)?;
            }
        }
        Ok(t)
    }
}

fn fill(template: &str, q: &Question, description: &str) -> String {
    template
        .replace("{question}", &q.text)
        .replace("{choices}", &q.lettered_choices())
        .replace("{description}", description)
}

fn image_part(frame: &Frame) -> Value {
    json!({
        "type": "image_url",
        "image_url": { "url": format!("data:image/png;base64,{}", BASE64.encode(frame.to_png())) }
    })
}

fn text_part(text: &str) -> Value {
    json!({ "type": "text", "text": text })
}

fn chat_body(model: &str, parts: Vec<Value>) -> Value {
    json!({
        "model": model,
        "temperature": 0,
        "messages": [{ "role": "user", "content": parts }]
    })
}

/// One combined request returning both scores for a candidate view.
pub fn build_score_payload(
    model: &str,
    templates: &PromptTemplates,
    q: &Question,
    description: &str,
    frame: &Frame,
) -> Value {
    chat_body(
        model,
        vec![
            text_part(&fill(&templates.search_score, q, description)),
            image_part(frame),
        ],
    )
}

/// Single-pass answer request: template, reference image, then each
/// evidence view as an optional description followed by its image.
/// Without evidence this is the plain baseline prompt.
pub fn build_answer_payload(
    model: &str,
    templates: &PromptTemplates,
    q: &Question,
    reference: &Frame,
    evidence: &[EvidenceView],
) -> Value {
    if evidence.is_empty() {
        return chat_body(
            model,
            vec![text_part(&fill(&templates.baseline_qa, q, "")), image_part(reference)],
        );
    }
    let mut parts = vec![
        text_part(&fill(&templates.evidence_qa, q, "")),
        text_part("Original view:"),
        image_part(reference),
    ];
    for (i, view) in evidence.iter().enumerate() {
        let label = match &view.description {
            Some(d) => format!("Imagined view {}: {d}", i + 1),
            None => format!("Imagined view {}:", i + 1),
        };
        parts.push(text_part(&label));
        parts.push(image_part(&view.frame));
    }
    chat_body(model, parts)
}

/// Connection settings for an OpenAI-compatible chat endpoint.
pub struct ChatEndpoint {
    base_url: String,
    model: String,
    api_key: Option<String>,
    client: Client,
    limit: ConcurrencyLimit,
}

impl ChatEndpoint {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>, settings: HttpSettings) -> Self {
        ChatEndpoint {
            base_url: base_url.into(),
            model: model.into(),
            api_key: std::env::var(API_KEY_ENV).ok().filter(|k| !k.is_empty()),
            client: transport::build_client(&settings),
            limit: ConcurrencyLimit::new(settings.max_in_flight),
        }
    }

    pub fn with_api_key(mut self, key: Option<String>) -> Self {
        self.api_key = key;
        self
    }

    pub fn model(&self) -> &str {
        &self.model
    }

    /// POST the body and return the first choice's message text.
    pub fn complete(&self, body: &Value) -> Result<String, ScoringError> {
        let url = transport::join_url(&self.base_url, "/chat/completions");
        let bytes = {
            let _permit = self.limit.acquire();
            transport::post_json(
                &self.client,
                &url,
                serde_json::to_vec(body).expect("json body"),
                self.api_key.as_deref(),
                None,
            )
        }
        .map_err(|f| match f {
            HttpFault::Transport(m) => ScoringError::Transport(m),
            HttpFault::Status(s, body) => ScoringError::Backend(match transport::error_body(&body) {
                Some((code, msg)) => format!("http {s} {code}: {msg}"),
                None => format!("http {s}"),
            }),
        })?;
        let v: Value = serde_json::from_slice(&bytes)
            .map_err(|e| ScoringError::Backend(format!("response json: {e}")))?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_string)
            .ok_or_else(|| ScoringError::Backend("response has no choices[0].message.content".into()))
    }
}

pub struct RemoteScorer {
    pub endpoint: ChatEndpoint,
    pub templates: PromptTemplates,
}

impl Scorer for RemoteScorer {
    fn name(&self) -> String {
        format!("remote:{}", self.endpoint.model())
    }

    fn score(&self, req: &ScoreRequest<'_>) -> Result<ScorePair, ScoringError> {
        let body = build_score_payload(
            self.endpoint.model(),
            &self.templates,
            req.question,
            req.description,
            req.frame,
        );
        parse_scores(&self.endpoint.complete(&body)?)
    }
}

pub struct RemoteAnswerer {
    pub endpoint: ChatEndpoint,
    pub templates: PromptTemplates,
}

impl Answerer for RemoteAnswerer {
    fn name(&self) -> String {
        format!("remote:{}", self.endpoint.model())
    }

    /// Retries once when the reply has no usable choice letter.
    fn answer(&self, req: &AnswerRequest<'_>) -> Result<AnswerOutput, ScoringError> {
        let body = build_answer_payload(
            self.endpoint.model(),
            &self.templates,
            req.question,
            req.reference,
            req.evidence,
        );
        let n = req.question.choices.len();
        let mut last_err = None;
        for _ in 0..2 {
            let raw = self.endpoint.complete(&body)?;
            match parse_choice(&raw, n) {
                Ok(index) => return Ok(AnswerOutput { index, raw }),
                Err(e) => last_err = Some(e),
            }
        }
        Err(last_err.expect("loop ran"))
    }
}
