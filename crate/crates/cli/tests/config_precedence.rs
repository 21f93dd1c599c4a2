use std::collections::HashMap;
use std::process::Command;

use spatial_beam::search::SearchConfig;
use spatial_beam_cli::{resolve, AppConfig, CliError, ModelBackend, WorldBackend};

const BIN: &str = env!("CARGO_BIN_EXE_spatial-beam");

fn config_file(body: &str) -> tempfile::NamedTempFile {
    let f = tempfile::Builder::new().suffix(".toml").tempfile().unwrap();
    std::fs::write(f.path(), body).unwrap();
    f
}

#[test]
fn defaults_are_the_published_configuration() {
    let cfg = resolve(None, &HashMap::new(), &[]).unwrap();
    assert_eq!(cfg, AppConfig::default());
    let s = &cfg.search;
    assert_eq!((s.n, s.k, s.beam), (3, 3, 2));
    assert_eq!((s.gamma_exp, s.gamma_help), (8.0, 8.0));
    assert_eq!((s.forward_step, s.turn_step, s.max_traj_len), (0.25, 9.0, 8));
    assert_eq!(cfg.world.backend, WorldBackend::Synthetic);
    assert_eq!(cfg.scorer.backend, ModelBackend::Oracle);
    assert_eq!(cfg.answerer.backend, ModelBackend::Oracle);
}

/// Every subset of {file, env, flag} setting `search.beam` to a distinct
/// value; the highest-precedence layer present must win.
#[test]
fn precedence_matrix() {
    let file = config_file("[search]\nbeam = 3\n");
    for mask in 0..8u8 {
        let use_file = mask & 1 != 0;
        let use_env = mask & 2 != 0;
        let use_flag = mask & 4 != 0;
        let env: HashMap<String, String> = if use_env {
            [("SPATIAL_BEAM_BEAM".to_string(), "4".to_string())].into()
        } else {
            HashMap::new()
        };
        let flags = if use_flag {
            vec![("search.beam".to_string(), "5".to_string())]
        } else {
            vec![]
        };
        let cfg = resolve(use_file.then(|| file.path()), &env, &flags).unwrap();
        let expected = if use_flag {
            5
        } else if use_env {
            4
        } else if use_file {
            3
        } else {
            SearchConfig::default().beam
        };
        assert_eq!(cfg.search.beam, expected, "file={use_file} env={use_env} flag={use_flag}");
    }
}

#[test]
fn layers_merge_per_key() {
    let file = config_file("seed = 11\n[search]\nk = 2\ngamma_exp = 6\n[world]\ntimeout_secs = 5\n");
    let env: HashMap<String, String> = [
        ("SPATIAL_BEAM_GAMMA_HELP".to_string(), "7.5".to_string()),
        ("SPATIAL_BEAM_WM_ENDPOINT".to_string(), "http://127.0.0.1:9".to_string()),
    ]
    .into();
    let cfg = resolve(Some(file.path()), &env, &[("search.n".into(), "4".into())]).unwrap();
    assert_eq!(cfg.seed, 11);
    assert_eq!((cfg.search.n, cfg.search.k, cfg.search.beam), (4, 2, 2));
    assert_eq!((cfg.search.gamma_exp, cfg.search.gamma_help), (6.0, 7.5));
    assert_eq!(cfg.world.timeout_secs, 5);
    assert_eq!(cfg.world.endpoint.as_deref(), Some("http://127.0.0.1:9"));
    assert_eq!(cfg.world.backend, WorldBackend::Synthetic);
}

#[test]
fn remote_world_without_endpoint_names_the_key() {
    let err = resolve(None, &HashMap::new(), &[("world.backend".into(), "remote".into())]).unwrap_err();
    assert!(matches!(&err, CliError::Config { key, .. } if key == "world.endpoint"), "{err}");
    assert_eq!(err.exit_code(), 2);

    let env: HashMap<String, String> = [("SPATIAL_BEAM_WM_ENDPOINT".to_string(), "http://h:1".to_string())].into();
    resolve(None, &env, &[("world.backend".into(), "remote".into())]).unwrap();
}

#[test]
fn remote_scorer_needs_model() {
    let err = resolve(
        None,
        &HashMap::new(),
        &[
            ("scorer.backend".into(), "remote".into()),
            ("scorer.endpoint".into(), "http://h:1/v1".into()),
        ],
    )
    .unwrap_err();
    assert!(matches!(&err, CliError::Config { key, .. } if key == "scorer.model"), "{err}");
}

#[test]
fn invalid_search_value_names_the_key() {
    let err = resolve(None, &HashMap::new(), &[("search.k".into(), "0".into())]).unwrap_err();
    assert!(err.to_string().starts_with("search.k:"), "{err}");
    let file = config_file("[search]\nturn_step = \"wide\"\n");
    let err = resolve(Some(file.path()), &HashMap::new(), &[]).unwrap_err();
    assert!(err.to_string().starts_with("search.turn_step:"), "{err}");
}

fn expand_rows(args: &[&str], env: &[(&str, &str)]) -> usize {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env_remove("SPATIAL_BEAM_K");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap().lines().count()
}

/// Same matrix end to end: `expand` prints 3k rows.
#[test]
fn binary_precedence_matrix() {
    let file = config_file("[search]\nk = 2\n");
    let path = file.path().to_str().unwrap();
    for mask in 0..8u8 {
        let mut args = vec!["expand"];
        let mut env = vec![];
        if mask & 1 != 0 {
            args.extend(["--config", path]);
        }
        if mask & 2 != 0 {
            env.push(("SPATIAL_BEAM_K", "1"));
        }
        if mask & 4 != 0 {
            args.extend(["--k", "4"]);
        }
        let k = if mask & 4 != 0 {
            4
        } else if mask & 2 != 0 {
            1
        } else if mask & 1 != 0 {
            2
        } else {
            3
        };
        assert_eq!(expand_rows(&args, &env), 3 * k, "mask {mask}");
    }
}

#[test]
fn binary_config_fault_exit_code() {
    let out = Command::new(BIN)
        .args(["run", "--dataset", "missing.satq.jsonl", "--out", "unused", "--set", "world.backend=remote"])
        .env_remove("SPATIAL_BEAM_WM_ENDPOINT")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("world.endpoint"));
}
