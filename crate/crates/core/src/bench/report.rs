use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::scoring::Category;
use crate::search::{AnswerRecord, SearchConfig};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuestionResult {
    pub id: String,
    pub category: Category,
    pub correct_index: Option<usize>,
    pub correct: bool,
    /// Missing when the question failed before the answer stage.
    pub answer: Option<AnswerRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fault: Option<String>,
    pub steps: usize,
    pub observations: usize,
    pub rollouts: usize,
    pub evidence_found: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CategoryAccuracy {
    pub category: Category,
    pub correct: usize,
    pub total: usize,
    pub accuracy: Option<f64>,
}

/// Outcome of one benchmark run. Holds nothing time-dependent, so equal
/// inputs give byte-equal reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    /// `search` or `baseline`.
    pub label: String,
    pub world: String,
    pub scorer: String,
    pub answerer: String,
    pub config: SearchConfig,
    pub total: usize,
    pub correct: usize,
    pub average: Option<f64>,
    pub categories: Vec<CategoryAccuracy>,
    pub questions: Vec<QuestionResult>,
}

fn ratio(correct: usize, total: usize) -> Option<f64> {
    (total > 0).then(|| correct as f64 / total as f64)
}

impl RunReport {
    pub fn new(
        label: &str,
        identities: [String; 3],
        config: SearchConfig,
        questions: Vec<QuestionResult>,
    ) -> Self {
        let [world, scorer, answerer] = identities;
        let categories = Category::ALL
            .into_iter()
            .filter_map(|category| {
                let of: Vec<&QuestionResult> =
                    questions.iter().filter(|q| q.category == category).collect();
                if of.is_empty() {
                    return None;
                }
                let correct = of.iter().filter(|q| q.correct).count();
                Some(CategoryAccuracy {
                    category,
                    correct,
                    total: of.len(),
                    accuracy: ratio(correct, of.len()),
                })
            })
            .collect();
        let correct = questions.iter().filter(|q| q.correct).count();
        RunReport {
            label: label.to_string(),
            world,
            scorer,
            answerer,
            config,
            total: questions.len(),
            correct,
            average: ratio(correct, questions.len()),
            categories,
            questions,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Json,
}

fn percent(v: Option<f64>) -> String {
    match v {
        Some(v) => format!("{:.2}", 100.0 * v),
        None => "n/a".to_string(),
    }
}

/// Render as an accuracy table (`Avg` then one column per category
/// present) or as pretty JSON.
pub fn emit_report(report: &RunReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Text => {
            let mut header = vec!["Method".to_string(), "Avg".to_string()];
            let mut row = vec![report.label.clone(), percent(report.average)];
            for c in &report.categories {
                header.push(c.category.as_str().to_string());
                row.push(percent(c.accuracy));
            }
            let widths: Vec<usize> = header
                .iter()
                .zip(&row)
                .map(|(h, r)| h.len().max(r.len()))
                .collect();
            let line = |cells: &[String]| {
                cells
                    .iter()
                    .zip(&widths)
                    .enumerate()
                    .map(|(i, (c, w))| if i == 0 { format!("{c:<w$}") } else { format!("{c:>w$}") })
                    .collect::<Vec<_>>()
                    .join("  ")
            };
            let mut out = String::new();
            let _ = writeln!(
                out,
                "world={} scorer={} answerer={}",
                report.world, report.scorer, report.answerer
            );
            let _ = writeln!(out, "{}", line(&header));
            let _ = writeln!(out, "{}", line(&row));
            let _ = writeln!(
                out,
                "{} of {} correct",
                report.correct, report.total
            );
            out
        }
    }
}
