use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyBytes;
use spatial_beam::search;

pub mod ops;

fn value_err(e: String) -> PyErr {
    PyValueError::new_err(e)
}

/// Search hyperparameters; a fresh instance holds the defaults.
#[pyclass(name = "SearchConfig", get_all, set_all, from_py_object)]
#[derive(Clone, Debug)]
pub struct PySearchConfig {
    pub n: usize,
    pub k: usize,
    pub beam: usize,
    pub h: usize,
    pub gamma_exp: f64,
    pub gamma_help: f64,
    pub max_traj_len: usize,
    pub forward_step: f64,
    pub turn_step: f64,
    pub rotation_budget: f64,
    pub translation_budget: f64,
    pub evidence_cap: usize,
    pub include_descriptions: bool,
}

impl From<search::SearchConfig> for PySearchConfig {
    fn from(c: search::SearchConfig) -> Self {
        PySearchConfig {
            n: c.n,
            k: c.k,
            beam: c.beam,
            h: c.h,
            gamma_exp: c.gamma_exp,
            gamma_help: c.gamma_help,
            max_traj_len: c.max_traj_len,
            forward_step: c.forward_step,
            turn_step: c.turn_step,
            rotation_budget: c.rotation_budget,
            translation_budget: c.translation_budget,
            evidence_cap: c.evidence_cap,
            include_descriptions: c.include_descriptions,
        }
    }
}

impl From<&PySearchConfig> for search::SearchConfig {
    fn from(c: &PySearchConfig) -> Self {
        search::SearchConfig {
            n: c.n,
            k: c.k,
            beam: c.beam,
            h: c.h,
            gamma_exp: c.gamma_exp,
            gamma_help: c.gamma_help,
            max_traj_len: c.max_traj_len,
            forward_step: c.forward_step,
            turn_step: c.turn_step,
            rotation_budget: c.rotation_budget,
            translation_budget: c.translation_budget,
            evidence_cap: c.evidence_cap,
            include_descriptions: c.include_descriptions,
        }
    }
}

#[pymethods]
impl PySearchConfig {
    #[new]
    fn new() -> Self {
        search::SearchConfig::default().into()
    }

    fn validate(&self) -> PyResult<()> {
        search::SearchConfig::from(self)
            .validate()
            .map_err(|e| value_err(e.to_string()))
    }

    fn to_json(&self) -> String {
        serde_json::to_string(&search::SearchConfig::from(self)).expect("config serializes")
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        serde_json::from_str::<search::SearchConfig>(text)
            .map(Into::into)
            .map_err(|e| value_err(e.to_string()))
    }

    fn __repr__(&self) -> String {
        format!(
            "SearchConfig(n={}, k={}, beam={}, gamma_exp={}, gamma_help={})",
            self.n, self.k, self.beam, self.gamma_exp, self.gamma_help
        )
    }
}

fn config_or_default(config: Option<PySearchConfig>) -> search::SearchConfig {
    config.map_or_else(search::SearchConfig::default, |c| (&c).into())
}

/// Canonical string form of a trajectory such as "F0.25|L9".
#[pyfunction]
fn canonical_trajectory(text: &str) -> PyResult<String> {
    ops::canonical_trajectory(text).map_err(value_err)
}

/// Camera-to-reference pose after each step, as (rotation rows, translation).
#[pyfunction]
fn trajectory_poses(text: &str) -> PyResult<Vec<ops::Pose>> {
    ops::trajectory_poses(text).map_err(value_err)
}

/// All candidates of one expansion with "keep" or "pruned:<reason>".
#[pyfunction]
#[pyo3(signature = (trajectory, config=None))]
fn expand(trajectory: &str, config: Option<PySearchConfig>) -> PyResult<Vec<(String, String)>> {
    ops::expand(trajectory, &config_or_default(config)).map_err(value_err)
}

/// Returns (height, width, channels, flat values).
#[pyfunction]
#[pyo3(signature = (width, height, fov_deg, rotation, translation, pitch_deg=None))]
fn plucker_map(
    width: u32,
    height: u32,
    fov_deg: f64,
    rotation: [[f64; 3]; 3],
    translation: [f64; 3],
    pitch_deg: Option<f64>,
) -> PyResult<(u32, u32, u8, Vec<f64>)> {
    ops::plucker(width, height, fov_deg, (rotation, translation), pitch_deg).map_err(value_err)
}

/// PSNR in dB between two PNG images.
#[pyfunction]
fn psnr(a: &[u8], b: &[u8]) -> PyResult<f64> {
    ops::psnr(a, b).map_err(value_err)
}

/// SSIM between two PNG images.
#[pyfunction]
fn ssim(a: &[u8], b: &[u8]) -> PyResult<f64> {
    ops::ssim(a, b).map_err(value_err)
}

/// PNG images: the reference view, then one per step.
#[pyfunction]
#[pyo3(signature = (scene_json, trajectory, width=256, height=256, fov_deg=60.0, pitch_deg=0.0, config=None))]
#[allow(clippy::too_many_arguments)]
fn render<'py>(
    py: Python<'py>,
    scene_json: &str,
    trajectory: &str,
    width: u32,
    height: u32,
    fov_deg: f64,
    pitch_deg: f64,
    config: Option<PySearchConfig>,
) -> PyResult<Vec<Bound<'py, PyBytes>>> {
    let cfg = config_or_default(config);
    let frames = py
        .detach(|| ops::render_trajectory(scene_json, trajectory, width, height, fov_deg, pitch_deg, &cfg))
        .map_err(value_err)?;
    Ok(frames.iter().map(|f| PyBytes::new(py, f)).collect())
}

/// Write a generated suite under `out_dir`; returns the dataset path.
#[pyfunction]
fn generate_suite(py: Python<'_>, seed: u64, count: usize, out_dir: PathBuf) -> PyResult<String> {
    py.detach(|| ops::generate_suite(seed, count, &out_dir))
        .map_err(value_err)
}

/// Run the oracle-backed benchmark; returns the report as JSON text.
#[pyfunction]
#[pyo3(signature = (dataset, config=None, baseline=false, parallelism=0))]
fn run_benchmark(
    py: Python<'_>,
    dataset: PathBuf,
    config: Option<PySearchConfig>,
    baseline: bool,
    parallelism: usize,
) -> PyResult<String> {
    let cfg = config_or_default(config);
    py.detach(|| ops::run_benchmark(&dataset, &cfg, baseline, parallelism))
        .map_err(value_err)
}

#[pymodule]
fn spatial_beam_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySearchConfig>()?;
    m.add_function(wrap_pyfunction!(canonical_trajectory, m)?)?;
    m.add_function(wrap_pyfunction!(trajectory_poses, m)?)?;
    m.add_function(wrap_pyfunction!(expand, m)?)?;
    m.add_function(wrap_pyfunction!(plucker_map, m)?)?;
    m.add_function(wrap_pyfunction!(psnr, m)?)?;
    m.add_function(wrap_pyfunction!(ssim, m)?)?;
    m.add_function(wrap_pyfunction!(render, m)?)?;
    m.add_function(wrap_pyfunction!(generate_suite, m)?)?;
    m.add_function(wrap_pyfunction!(run_benchmark, m)?)?;
    Ok(())
}
