use std::sync::Arc;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::{BenchError, Dataset, DatasetEntry, QuestionResult, RunReport};
use crate::geometry::Intrinsics;
use crate::scoring::{Answerer, OracleAnswerer, OracleScorer, OracleSpec, Scorer};
use crate::search::{
    assemble_answer, spatial_beam_search, ReferenceView, SearchConfig, SearchTrace, TraceEvent,
};
use crate::worldmodel::{Frame, Scene, SyntheticWorld, WorldModel};

/// Field of view assumed for dataset images that carry no intrinsics.
const DEFAULT_FOV_DEG: f64 = 60.0;

/// Where a run gets a backend from: built per question from the case's
/// ground-truth scene (synthetic world, oracle scorer/answerer), or one
/// shared instance.
pub enum Backend<T: ?Sized> {
    FromCase,
    Shared(Arc<T>),
}

pub struct Backends {
    pub world: Backend<dyn WorldModel>,
    pub scorer: Backend<dyn Scorer>,
    pub answerer: Backend<dyn Answerer>,
}

impl Backends {
    /// Synthetic world plus oracle scorer and answerer.
    pub fn oracle() -> Self {
        Backends {
            world: Backend::FromCase,
            scorer: Backend::FromCase,
            answerer: Backend::FromCase,
        }
    }

    fn identities(&self) -> [String; 3] {
        let world = match &self.world {
            Backend::FromCase => "synthetic".to_string(),
            Backend::Shared(w) => w.name(),
        };
        let scorer = match &self.scorer {
            Backend::FromCase => "oracle".to_string(),
            Backend::Shared(s) => s.name(),
        };
        let answerer = match &self.answerer {
            Backend::FromCase => "oracle".to_string(),
            Backend::Shared(a) => a.name(),
        };
        [world, scorer, answerer]
    }

    fn needs_case(&self) -> bool {
        matches!(self.world, Backend::FromCase)
            || matches!(self.scorer, Backend::FromCase)
            || matches!(self.answerer, Backend::FromCase)
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub config: SearchConfig,
    /// Answer from the reference image alone, without searching.
    pub baseline: bool,
    /// Questions processed at once; 0 uses the global thread pool.
    pub parallelism: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            config: SearchConfig::default(),
            baseline: false,
            parallelism: 0,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunTiming {
    pub total: Duration,
    pub per_question: Vec<Duration>,
}

pub struct BenchRun {
    pub report: RunReport,
    /// Search trace per question id, in dataset order.
    pub traces: Vec<(String, SearchTrace)>,
    pub timing: RunTiming,
}

/// Ground truth for a question whose backends come from its own scene.
pub struct CaseContext {
    pub scene: Arc<Scene>,
    pub oracle: OracleSpec,
}

fn load_case(dataset: &Dataset, entry: &DatasetEntry) -> Result<CaseContext, String> {
    let scene_path = entry
        .record
        .scene
        .as_deref()
        .ok_or("record has no scene for the scene-backed backends")?;
    let scene = Scene::load(&dataset.resolve(scene_path)).map_err(|e| e.to_string())?;
    let oracle = entry
        .record
        .oracle
        .clone()
        .ok_or("record has no oracle spec for the scene-backed backends")?;
    Ok(CaseContext {
        scene: Arc::new(scene),
        oracle,
    })
}

fn reference_view(dataset: &Dataset, entry: &DatasetEntry) -> Result<ReferenceView, String> {
    let frame = Frame::load(&dataset.resolve(&entry.record.image)).map_err(|e| e.to_string())?;
    let intrinsics = match entry.record.intrinsics {
        Some(k) => k,
        None => Intrinsics::from_fov(frame.width(), frame.height(), DEFAULT_FOV_DEG)
            .map_err(|e| e.to_string())?,
    };
    Ok(ReferenceView {
        frame: Arc::new(frame),
        intrinsics,
        pitch_deg: entry.record.pitch_deg.unwrap_or(0.0),
    })
}

struct Handles {
    world: Arc<dyn WorldModel>,
    scorer: Arc<dyn Scorer>,
    answerer: Arc<dyn Answerer>,
}

fn handles(
    backends: &Backends,
    case: Option<&CaseContext>,
    reference: &ReferenceView,
    cfg: &SearchConfig,
) -> Handles {
    let case = || case.expect("case context loaded for scene-backed backends");
    let world: Arc<dyn WorldModel> = match &backends.world {
        Backend::Shared(w) => w.clone(),
        Backend::FromCase => {
            Arc::new(SyntheticWorld::new(case().scene.clone()).with_max_len(cfg.k.max(8)))
        }
    };
    let scorer: Arc<dyn Scorer> = match &backends.scorer {
        Backend::Shared(s) => s.clone(),
        Backend::FromCase => Arc::new(OracleScorer {
            spec: case().oracle.clone(),
            scene: case().scene.clone(),
            intrinsics: reference.intrinsics,
            pitch_deg: reference.pitch_deg,
        }),
    };
    let answerer: Arc<dyn Answerer> = match &backends.answerer {
        Backend::Shared(a) => a.clone(),
        Backend::FromCase => Arc::new(OracleAnswerer {
            spec: case().oracle.clone(),
            scene: case().scene.clone(),
            intrinsics: reference.intrinsics,
            pitch_deg: reference.pitch_deg,
        }),
    };
    Handles {
        world,
        scorer,
        answerer,
    }
}

fn failed(entry: &DatasetEntry, message: String, trace: &mut SearchTrace) -> QuestionResult {
    trace.push(TraceEvent::new(0, "fault").detail(message.clone()));
    QuestionResult {
        id: entry.question.id.clone(),
        category: entry.question.category,
        correct_index: entry.question.answer_index,
        correct: false,
        answer: None,
        fault: Some(message),
        steps: 0,
        observations: 0,
        rollouts: 0,
        evidence_found: 0,
    }
}

fn run_question(
    dataset: &Dataset,
    entry: &DatasetEntry,
    backends: &Backends,
    opts: &RunOptions,
) -> (QuestionResult, SearchTrace) {
    let mut trace = SearchTrace::default();
    let reference = match reference_view(dataset, entry) {
        Ok(r) => r,
        Err(e) => return (failed(entry, format!("reference image: {e}"), &mut trace), trace),
    };
    let case = if backends.needs_case() {
        match load_case(dataset, entry) {
            Ok(c) => Some(c),
            Err(e) => return (failed(entry, e, &mut trace), trace),
        }
    } else {
        None
    };
    let h = handles(backends, case.as_ref(), &reference, &opts.config);
    let question = &entry.question;

    let (evidence, fault, steps, observations, evidence_found) = if opts.baseline {
        trace.push(TraceEvent::new(0, "baseline"));
        (Vec::new(), None, 0, 0, 0)
    } else {
        match spatial_beam_search(&reference, question, h.world.as_ref(), h.scorer.as_ref(), &opts.config) {
            Ok(outcome) => {
                trace = outcome.trace;
                (
                    outcome.evidence,
                    None,
                    outcome.steps,
                    outcome.observations,
                    outcome.evidence_found,
                )
            }
            Err(failure) => {
                trace = failure.trace;
                let found = failure.evidence.len();
                // answer from whatever was gathered before the fault
                (failure.evidence, Some(failure.error.to_string()), 0, 0, found)
            }
        }
    };
    let answer = assemble_answer(question, &reference, &evidence, h.answerer.as_ref(), &opts.config);
    let correct = answer.chosen.is_some() && answer.chosen == question.answer_index;
    let steps = if fault.is_some() {
        trace.of_kind("step_end").count()
    } else {
        steps
    };
    let result = QuestionResult {
        id: question.id.clone(),
        category: question.category,
        correct_index: question.answer_index,
        correct,
        fault: fault.or_else(|| answer.fault.clone()),
        answer: Some(answer),
        steps,
        observations,
        rollouts: trace.rollout_count(),
        evidence_found,
    };
    (result, trace)
}

/// Run every question, either searching first or (baseline) answering from
/// the reference alone. Per-question faults are recorded and the run goes
/// on. Results come back in dataset order.
pub fn run_benchmark(
    dataset: &Dataset,
    backends: &Backends,
    opts: &RunOptions,
) -> Result<BenchRun, BenchError> {
    opts.config
        .validate()
        .map_err(|e| BenchError::Precondition(e.to_string()))?;
    let started = Instant::now();
    let work = || -> Vec<(QuestionResult, SearchTrace, Duration)> {
        dataset
            .entries
            .par_iter()
            .map(|entry| {
                let t = Instant::now();
                let (result, trace) = run_question(dataset, entry, backends, opts);
                (result, trace, t.elapsed())
            })
            .collect()
    };
    let outputs = if opts.parallelism > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(opts.parallelism)
            .build()
            .map_err(|e| BenchError::Precondition(format!("thread pool: {e}")))?
            .install(work)
    } else {
        work()
    };
    let mut results = Vec::with_capacity(outputs.len());
    let mut traces = Vec::with_capacity(outputs.len());
    let mut per_question = Vec::with_capacity(outputs.len());
    for (result, trace, elapsed) in outputs {
        traces.push((result.id.clone(), trace));
        results.push(result);
        per_question.push(elapsed);
    }
    let label = if opts.baseline { "baseline" } else { "search" };
    Ok(BenchRun {
        report: RunReport::new(label, backends.identities(), opts.config.clone(), results),
        traces,
        timing: RunTiming {
            total: started.elapsed(),
            per_question,
        },
    })
}
