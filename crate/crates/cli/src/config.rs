//! Layered application config: built-in defaults, then a TOML file, then
//! environment variables, then command-line overrides.

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use spatial_beam::search::SearchConfig;
use spatial_beam::transport::HttpSettings;
use toml::{Table, Value};

use crate::CliError;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WorldBackend {
    #[default]
    Synthetic,
    Remote,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelBackend {
    #[default]
    Oracle,
    Remote,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorldSection {
    pub backend: WorldBackend,
    pub endpoint: Option<String>,
    pub timeout_secs: u64,
    pub max_in_flight: usize,
}

impl Default for WorldSection {
    fn default() -> Self {
        WorldSection {
            backend: WorldBackend::Synthetic,
            endpoint: None,
            timeout_secs: 60,
            max_in_flight: 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub backend: ModelBackend,
    /// Base URL of a chat-completions API.
    pub endpoint: Option<String>,
    pub model: Option<String>,
    pub timeout_secs: u64,
    pub max_in_flight: usize,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            backend: ModelBackend::Oracle,
            endpoint: None,
            model: None,
            timeout_secs: 60,
            max_in_flight: 4,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AppConfig {
    pub search: SearchConfig,
    pub world: WorldSection,
    pub scorer: ModelSection,
    pub answerer: ModelSection,
    /// Directory of prompt template overrides.
    pub templates: Option<PathBuf>,
    /// Questions in flight at once; 0 means one per core.
    pub parallelism: usize,
    /// Default seed for suite generation.
    pub seed: u64,
}

/// Environment variable → config key.
pub const ENV_KEYS: &[(&str, &str)] = &[
    ("SPATIAL_BEAM_WM_ENDPOINT", "world.endpoint"),
    ("SPATIAL_BEAM_WORLD_BACKEND", "world.backend"),
    ("SPATIAL_BEAM_SCORER_BACKEND", "scorer.backend"),
    ("SPATIAL_BEAM_SCORER_ENDPOINT", "scorer.endpoint"),
    ("SPATIAL_BEAM_SCORER_MODEL", "scorer.model"),
    ("SPATIAL_BEAM_ANSWERER_BACKEND", "answerer.backend"),
    ("SPATIAL_BEAM_ANSWERER_ENDPOINT", "answerer.endpoint"),
    ("SPATIAL_BEAM_ANSWERER_MODEL", "answerer.model"),
    ("SPATIAL_BEAM_TEMPLATES", "templates"),
    ("SPATIAL_BEAM_PARALLELISM", "parallelism"),
    ("SPATIAL_BEAM_SEED", "seed"),
    ("SPATIAL_BEAM_N", "search.n"),
    ("SPATIAL_BEAM_K", "search.k"),
    ("SPATIAL_BEAM_BEAM", "search.beam"),
    ("SPATIAL_BEAM_H", "search.h"),
    ("SPATIAL_BEAM_GAMMA_EXP", "search.gamma_exp"),
    ("SPATIAL_BEAM_GAMMA_HELP", "search.gamma_help"),
    ("SPATIAL_BEAM_MAX_TRAJ_LEN", "search.max_traj_len"),
    ("SPATIAL_BEAM_FORWARD_STEP", "search.forward_step"),
    ("SPATIAL_BEAM_TURN_STEP", "search.turn_step"),
    ("SPATIAL_BEAM_EVIDENCE_CAP", "search.evidence_cap"),
    ("SPATIAL_BEAM_INCLUDE_DESCRIPTIONS", "search.include_descriptions"),
];

/// Read the variables in [`ENV_KEYS`] from the process environment.
pub fn process_env() -> HashMap<String, String> {
    ENV_KEYS
        .iter()
        .filter_map(|(var, _)| std::env::var(var).ok().map(|v| (var.to_string(), v)))
        .collect()
}

/// Typed value for a textual override: anything TOML reads as a scalar
/// (integer, float, bool) keeps that type, everything else is a string.
fn scalar(text: &str) -> Value {
    let parsed = format!("v = {text}")
        .parse::<Table>()
        .ok()
        .and_then(|mut t| t.remove("v"));
    match parsed {
        Some(v @ (Value::Integer(_) | Value::Float(_) | Value::Boolean(_))) => v,
        _ => Value::String(text.to_string()),
    }
}

fn set_path(table: &mut Table, key: &str, value: Value) -> Result<(), CliError> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let leaf = parts.pop().filter(|s| !s.is_empty()).ok_or_else(|| CliError::config(key, "empty key"))?;
    let mut cur = table;
    for part in parts {
        let entry = cur
            .entry(part.to_string())
            .or_insert_with(|| Value::Table(Table::new()));
        cur = entry
            .as_table_mut()
            .ok_or_else(|| CliError::config(key, format!("`{part}` is not a section")))?;
    }
    cur.insert(leaf.to_string(), value);
    Ok(())
}

fn merge(base: &mut Table, over: Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Parse `key=value`.
pub fn parse_override(text: &str) -> Result<(String, String), CliError> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| CliError::config(text, "expected key=value"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

/// Resolve the effective config. `overrides` are applied in order, so later
/// entries win; callers put command-line values there.
pub fn resolve(
    file: Option<&Path>,
    env: &HashMap<String, String>,
    overrides: &[(String, String)],
) -> Result<AppConfig, CliError> {
    let mut layered = Table::new();
    if let Some(path) = file {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))?;
        let table: Table = text
            .parse()
            .map_err(|e| CliError::config("config", format!("{}: {e}", path.display())))?;
        merge(&mut layered, table);
    }
    for (var, key) in ENV_KEYS {
        if let Some(v) = env.get(*var) {
            set_path(&mut layered, key, scalar(v))?;
        }
    }
    for (key, v) in overrides {
        set_path(&mut layered, key, scalar(v))?;
    }
    let cfg: AppConfig = serde_path_to_error::deserialize(Value::Table(layered)).map_err(|e| {
        let key = e.path().to_string();
        CliError::config(if key == "." { "config" } else { &key }, e.inner().to_string())
    })?;
    cfg.validate()?;
    Ok(cfg)
}

impl AppConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.search
            .validate()
            .map_err(|e| CliError::config(&e.key, e.message))?;
        if self.world.backend == WorldBackend::Remote && self.world.endpoint.is_none() {
            return Err(CliError::config("world.endpoint", "required when world.backend = \"remote\""));
        }
        for (name, section) in [("scorer", &self.scorer), ("answerer", &self.answerer)] {
            if section.backend != ModelBackend::Remote {
                continue;
            }
            if section.endpoint.is_none() {
                return Err(CliError::config(
                    &format!("{name}.endpoint"),
                    format!("required when {name}.backend = \"remote\""),
                ));
            }
            if section.model.is_none() {
                return Err(CliError::config(
                    &format!("{name}.model"),
                    format!("required when {name}.backend = \"remote\""),
                ));
            }
        }
        for (key, secs, in_flight) in [
            ("world", self.world.timeout_secs, self.world.max_in_flight),
            ("scorer", self.scorer.timeout_secs, self.scorer.max_in_flight),
            ("answerer", self.answerer.timeout_secs, self.answerer.max_in_flight),
        ] {
            if secs == 0 {
                return Err(CliError::config(&format!("{key}.timeout_secs"), "must be at least 1"));
            }
            if in_flight == 0 {
                return Err(CliError::config(&format!("{key}.max_in_flight"), "must be at least 1"));
            }
        }
        Ok(())
    }
}

pub fn http_settings(timeout_secs: u64, max_in_flight: usize) -> HttpSettings {
    HttpSettings {
        timeout: Duration::from_secs(timeout_secs),
        max_in_flight,
    }
}
