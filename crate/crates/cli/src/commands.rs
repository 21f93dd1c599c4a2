use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde_json::json;
use spatial_beam::bench::{
    emit_report, generate_suite, load_dataset, run_benchmark, write_suite, Backend, BenchError, Backends,
    ReportFormat, RunOptions, RunReport,
};
use spatial_beam::geometry::{cumulative_poses, CameraPose, Intrinsics, Trajectory};
use spatial_beam::scoring::{ChatEndpoint, PromptTemplates, RemoteAnswerer, RemoteScorer};
use spatial_beam::search::{enumerate_candidates, within_budget, SearchConfig};
use spatial_beam::worldmodel::{camera_pose, render, Frame, RemoteWorldModel, Scene};

use crate::config::{http_settings, AppConfig, ModelBackend, ModelSection, WorldBackend};
use crate::CliError;

fn write(path: &Path, bytes: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn parse_trajectory(text: &str) -> Result<Trajectory, CliError> {
    text.parse()
        .map_err(|e| CliError::Usage(format!("trajectory {text:?}: {e}")))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpandRow {
    pub trajectory: String,
    /// `keep`, `pruned:reversal` or `pruned:budget`.
    pub status: String,
}

/// Every candidate of one expansion in enumeration order.
pub fn cmd_expand(trajectory: &str, cfg: &SearchConfig) -> Result<Vec<ExpandRow>, CliError> {
    let parent = parse_trajectory(trajectory)?;
    Ok(enumerate_candidates(&parent, cfg)
        .into_iter()
        .map(|(c, reason)| ExpandRow {
            trajectory: c.full_trajectory.to_string(),
            status: match reason {
                None => "keep".to_string(),
                Some(r) => format!("pruned:{}", r.as_str()),
            },
        })
        .collect())
}

#[derive(Clone, Debug)]
pub struct RenderOptions {
    pub width: u32,
    pub height: u32,
    pub fov_deg: f64,
    pub pitch_deg: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            width: 256,
            height: 256,
            fov_deg: 60.0,
            pitch_deg: 0.0,
        }
    }
}

/// Render the trajectory through the scene: one image per step, or just the
/// reference view for an empty trajectory, plus `contact_sheet.png`.
/// Returns the per-step image paths.
pub fn cmd_render(
    scene_path: &Path,
    trajectory: &str,
    out_dir: &Path,
    opts: &RenderOptions,
    cfg: &SearchConfig,
) -> Result<Vec<PathBuf>, CliError> {
    let traj = parse_trajectory(trajectory)?;
    if !within_budget(&traj, cfg) {
        return Err(CliError::Usage(format!(
            "trajectory {traj} exceeds the budget (at most {} actions, {} m, {}° net yaw)",
            cfg.max_traj_len, cfg.translation_budget, cfg.rotation_budget
        )));
    }
    let scene = Scene::load(scene_path).map_err(|e| CliError::Dataset(e.to_string()))?;
    let k = Intrinsics::from_fov(opts.width, opts.height, opts.fov_deg)
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let (names, poses): (Vec<String>, Vec<CameraPose>) = if traj.is_empty() {
        (vec!["reference.png".to_string()], vec![CameraPose::identity()])
    } else {
        cumulative_poses(&traj)
            .into_iter()
            .enumerate()
            .map(|(i, p)| (format!("step_{:02}.png", i + 1), p))
            .unzip()
    };
    let frames: Vec<Frame> = poses
        .iter()
        .map(|p| render(&scene, &camera_pose(p, opts.pitch_deg), &k))
        .collect();
    let mut paths = Vec::with_capacity(frames.len());
    for (name, frame) in names.iter().zip(&frames) {
        let path = out_dir.join(name);
        write(&path, frame.to_png())?;
        paths.push(path);
    }
    if let Some(sheet) = Frame::contact_sheet(&frames) {
        write(&out_dir.join("contact_sheet.png"), sheet.to_png())?;
    }
    Ok(paths)
}

/// Generate and write a suite; returns the dataset path.
pub fn cmd_gen_suite(seed: u64, count: usize, out_dir: &Path) -> Result<PathBuf, CliError> {
    if count == 0 {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }
    let cases = generate_suite(seed, count).map_err(|e| CliError::Dataset(e.to_string()))?;
    write_suite(&cases, out_dir).map_err(|e| match e {
        BenchError::Io { path, source } => CliError::Io {
            path: path.into(),
            source,
        },
        other => CliError::Dataset(other.to_string()),
    })
}

pub struct RunSummary {
    pub report: RunReport,
    pub text: String,
    pub report_path: PathBuf,
    /// Questions that ended with a recorded fault.
    pub faulted: usize,
}

fn templates(cfg: &AppConfig) -> Result<PromptTemplates, CliError> {
    match &cfg.templates {
        None => Ok(PromptTemplates::default()),
        Some(dir) => PromptTemplates::load_dir(dir)
            .map_err(|e| CliError::config("templates", format!("{}: {e}", dir.display()))),
    }
}

fn chat_endpoint(section: &ModelSection) -> ChatEndpoint {
    // validate() guarantees both for remote sections
    ChatEndpoint::new(
        section.endpoint.clone().unwrap_or_default(),
        section.model.clone().unwrap_or_default(),
        http_settings(section.timeout_secs, section.max_in_flight),
    )
}

fn build_backends(cfg: &AppConfig, baseline: bool) -> Result<Backends, CliError> {
    let mut backends = Backends::oracle();
    if cfg.world.backend == WorldBackend::Remote {
        let endpoint = cfg.world.endpoint.clone().unwrap_or_default();
        let world = RemoteWorldModel::new(
            endpoint,
            http_settings(cfg.world.timeout_secs, cfg.world.max_in_flight),
        )
        .with_max_len(cfg.search.k.max(cfg.search.max_traj_len));
        if !baseline {
            world
                .health()
                .map_err(|e| CliError::Backend(format!("world model at {}: {e}", world.endpoint())))?;
        }
        backends.world = Backend::Shared(Arc::new(world));
    }
    if cfg.scorer.backend == ModelBackend::Remote {
        backends.scorer = Backend::Shared(Arc::new(RemoteScorer {
            endpoint: chat_endpoint(&cfg.scorer),
            templates: templates(cfg)?,
        }));
    }
    if cfg.answerer.backend == ModelBackend::Remote {
        backends.answerer = Backend::Shared(Arc::new(RemoteAnswerer {
            endpoint: chat_endpoint(&cfg.answerer),
            templates: templates(cfg)?,
        }));
    }
    Ok(backends)
}

/// Run the benchmark and write `<label>.report.json`, `<label>.report.txt`,
/// `<label>.timing.json` and `traces/<label>/<id>.trace.jsonl` under
/// `out_dir`.
pub fn cmd_run(cfg: &AppConfig, dataset: &Path, out_dir: &Path, baseline: bool) -> Result<RunSummary, CliError> {
    let data = load_dataset(dataset).map_err(|e| CliError::Dataset(e.to_string()))?;
    let backends = build_backends(cfg, baseline)?;
    let opts = RunOptions {
        config: cfg.search.clone(),
        baseline,
        parallelism: cfg.parallelism,
    };
    let run = run_benchmark(&data, &backends, &opts).map_err(|e| match e {
        BenchError::Precondition(m) => CliError::config("search", m),
        BenchError::Backend(m) => CliError::Backend(m),
        other => CliError::Dataset(other.to_string()),
    })?;
    let label = run.report.label.clone();
    let report_path = out_dir.join(format!("{label}.report.json"));
    write(&report_path, emit_report(&run.report, ReportFormat::Json))?;
    let text = emit_report(&run.report, ReportFormat::Text);
    write(&out_dir.join(format!("{label}.report.txt")), &text)?;
    for (id, trace) in &run.traces {
        write(
            &out_dir.join("traces").join(&label).join(format!("{id}.trace.jsonl")),
            trace.to_jsonl(),
        )?;
    }
    // Kept apart from the report so reports stay byte-identical across runs.
    let timing = json!({
        "total_secs": run.timing.total.as_secs_f64(),
        "questions": run
            .report
            .questions
            .iter()
            .zip(&run.timing.per_question)
            .map(|(q, d)| json!({ "id": q.id, "secs": d.as_secs_f64() }))
            .collect::<Vec<_>>(),
    });
    write(
        &out_dir.join(format!("{label}.timing.json")),
        serde_json::to_string_pretty(&timing).expect("timing serializes") + "\n",
    )?;
    let faulted = run.report.questions.iter().filter(|q| q.fault.is_some()).count();
    Ok(RunSummary {
        report: run.report,
        text,
        report_path,
        faulted,
    })
}
