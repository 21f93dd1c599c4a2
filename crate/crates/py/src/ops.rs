//! Plain-Rust bodies of the Python functions, with string errors so they can
//! be tested without an interpreter.

use std::path::Path;

use spatial_beam::bench::{self, emit_report, load_dataset, Backends, ReportFormat, RunOptions};
use spatial_beam::geometry::{cumulative_poses, plucker_map, plucker_map_with_pitch, CameraPose, Intrinsics, Trajectory};
use spatial_beam::search::{enumerate_candidates, within_budget, SearchConfig};
use spatial_beam::worldmodel::{camera_pose, render, Frame, Scene};

pub type Pose = ([[f64; 3]; 3], [f64; 3]);

fn trajectory(text: &str) -> Result<Trajectory, String> {
    text.parse().map_err(|e| format!("{e}"))
}

pub fn canonical_trajectory(text: &str) -> Result<String, String> {
    Ok(trajectory(text)?.to_string())
}

pub fn trajectory_poses(text: &str) -> Result<Vec<Pose>, String> {
    Ok(cumulative_poses(&trajectory(text)?)
        .iter()
        .map(|p| (*p.rotation(), p.translation()))
        .collect())
}

pub fn expand(text: &str, cfg: &SearchConfig) -> Result<Vec<(String, String)>, String> {
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(enumerate_candidates(&trajectory(text)?, cfg)
        .into_iter()
        .map(|(c, reason)| {
            let status = reason.map_or("keep".to_string(), |r| format!("pruned:{}", r.as_str()));
            (c.full_trajectory.to_string(), status)
        })
        .collect())
}

/// Plücker map as (height, width, channels, row-major values).
pub fn plucker(
    width: u32,
    height: u32,
    fov_deg: f64,
    pose: Pose,
    pitch_deg: Option<f64>,
) -> Result<(u32, u32, u8, Vec<f64>), String> {
    let k = Intrinsics::from_fov(width, height, fov_deg).map_err(|e| e.to_string())?;
    let extrinsic = CameraPose::new(pose.0, pose.1).map_err(|e| e.to_string())?;
    let map = match pitch_deg {
        Some(p) => plucker_map_with_pitch(&k, &extrinsic, p),
        None => plucker_map(&k, &extrinsic),
    };
    Ok((map.height(), map.width(), map.channels(), map.data().to_vec()))
}

fn frame(png: &[u8]) -> Result<Frame, String> {
    Frame::from_png(png).map_err(|e| e.to_string())
}

pub fn psnr(a: &[u8], b: &[u8]) -> Result<f64, String> {
    bench::psnr(&frame(a)?, &frame(b)?).map_err(|e| e.to_string())
}

pub fn ssim(a: &[u8], b: &[u8]) -> Result<f64, String> {
    bench::ssim(&frame(a)?, &frame(b)?).map_err(|e| e.to_string())
}

/// PNG bytes of the reference view followed by one view per step.
pub fn render_trajectory(
    scene_json: &str,
    text: &str,
    width: u32,
    height: u32,
    fov_deg: f64,
    pitch_deg: f64,
    cfg: &SearchConfig,
) -> Result<Vec<Vec<u8>>, String> {
    let traj = trajectory(text)?;
    if !within_budget(&traj, cfg) {
        return Err(format!("trajectory {traj} exceeds the search budget"));
    }
    let scene = Scene::from_json(scene_json).map_err(|e| e.to_string())?;
    let k = Intrinsics::from_fov(width, height, fov_deg).map_err(|e| e.to_string())?;
    let poses = std::iter::once(CameraPose::identity()).chain(cumulative_poses(&traj));
    Ok(poses
        .map(|p| render(&scene, &camera_pose(&p, pitch_deg), &k).to_png())
        .collect())
}

pub fn generate_suite(seed: u64, count: usize, out_dir: &Path) -> Result<String, String> {
    let cases = bench::generate_suite(seed, count).map_err(|e| e.to_string())?;
    let path = bench::write_suite(&cases, out_dir).map_err(|e| e.to_string())?;
    Ok(path.display().to_string())
}

/// Oracle-backed run over a dataset file; returns the JSON report.
pub fn run_benchmark(dataset: &Path, cfg: &SearchConfig, baseline: bool, parallelism: usize) -> Result<String, String> {
    let data = load_dataset(dataset).map_err(|e| e.to_string())?;
    let opts = RunOptions {
        config: cfg.clone(),
        baseline,
        parallelism,
    };
    let run = bench::run_benchmark(&data, &Backends::oracle(), &opts).map_err(|e| e.to_string())?;
    Ok(emit_report(&run.report, ReportFormat::Json))
}
