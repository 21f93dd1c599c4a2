//! Benchmark harness: multiple-choice datasets, a synthetic hidden-object
//! suite with a geometric answer key, image quality metrics and accuracy
//! reports.

mod dataset;
mod metrics;
mod report;
mod run;
mod suite;

use thiserror::Error;

pub use dataset::{load_dataset, Dataset, DatasetEntry, DatasetRecord, DATASET_EXTENSION};
pub use metrics::{psnr, ssim, PSNR_CAP_DB};
pub use report::{emit_report, CategoryAccuracy, QuestionResult, ReportFormat, RunReport};
pub use run::{run_benchmark, Backend, Backends, BenchRun, CaseContext, RunOptions, RunTiming};
pub use suite::{
    check_case, generate_suite, generate_suite_with, write_suite, SuiteParams, SyntheticCase, COLOR_NAMES,
    SUITE_FILE,
};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("{path}:{line}: {message}")]
    Record {
        path: String,
        line: usize,
        message: String,
    },
    #[error("dataset fault: {0}")]
    Dataset(String),
    #[error("io fault on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("suite generation failed: {0}")]
    Generation(String),
    #[error("metric fault: {0}")]
    Metric(String),
    #[error("backend fault: {0}")]
    Backend(String),
}

impl BenchError {
    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        BenchError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}
