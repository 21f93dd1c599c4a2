use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spatial_beam_cli::config::{parse_override, process_env};
use spatial_beam_cli::{cmd_expand, cmd_gen_suite, cmd_render, cmd_run, resolve, AppConfig, CliError, RenderOptions};

#[derive(Parser)]
#[command(name = "spatial-beam", version, about = "Beam search over imagined camera trajectories")]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// TOML config file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override any config key, e.g. `--set world.backend=remote`.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,
    /// Maximum search steps.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Maximum repetitions per action in one expansion.
    #[arg(long, global = true)]
    k: Option<usize>,
    /// Beam width.
    #[arg(long, global = true)]
    beam: Option<usize>,
    #[arg(long = "gamma-exp", global = true)]
    gamma_exp: Option<f64>,
    #[arg(long = "gamma-help", global = true)]
    gamma_help: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a benchmark and write report and traces.
    Run {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Answer from the reference image alone.
        #[arg(long)]
        baseline: bool,
    },
    /// List the candidates of one expansion with their pruning status.
    Expand {
        /// Parent trajectory, e.g. "F0.25|L9"; empty for the root.
        #[arg(default_value = "")]
        trajectory: String,
    },
    /// Render a trajectory through a scene file.
    Render {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long, default_value = "")]
        traj: String,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 256)]
        width: u32,
        #[arg(long, default_value_t = 256)]
        height: u32,
        #[arg(long, default_value_t = 60.0)]
        fov: f64,
        #[arg(long, default_value_t = 0.0)]
        pitch: f64,
    },
    /// Generate a synthetic hidden-object suite.
    GenSuite {
        /// Defaults to the config's `seed`.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn load_config(g: &GlobalArgs) -> Result<AppConfig, CliError> {
    let mut overrides = g
        .set
        .iter()
        .map(|s| parse_override(s))
        .collect::<Result<Vec<_>, _>>()?;
    let named = [
        ("search.n", g.n.map(|v| v.to_string())),
        ("search.k", g.k.map(|v| v.to_string())),
        ("search.beam", g.beam.map(|v| v.to_string())),
        ("search.gamma_exp", g.gamma_exp.map(|v| format!("{v:?}"))),
        ("search.gamma_help", g.gamma_help.map(|v| format!("{v:?}"))),
    ];
    overrides.extend(named.into_iter().filter_map(|(k, v)| Some((k.to_string(), v?))));
    resolve(g.config.as_deref(), &process_env(), &overrides)
}

fn execute(cli: Cli) -> Result<ExitCode, CliError> {
    let cfg = load_config(&cli.global)?;
    match cli.command {
        Command::Run { dataset, out, baseline } => {
            let summary = cmd_run(&cfg, &dataset, &out, baseline)?;
            print!("{}", summary.text);
            eprintln!("report written to {}", summary.report_path.display());
            let total = summary.report.total;
            if total > 0 && summary.faulted == total {
                return Err(CliError::Backend(format!(
                    "all {total} questions faulted; see the report for details"
                )));
            }
        }
        Command::Expand { trajectory } => {
            for row in cmd_expand(&trajectory, &cfg.search)? {
                let shown = if row.trajectory.is_empty() { "-" } else { &row.trajectory };
                println!("{shown}\t{}", row.status);
            }
        }
        Command::Render {
            scene,
            traj,
            out,
            width,
            height,
            fov,
            pitch,
        } => {
            let opts = RenderOptions {
                width,
                height,
                fov_deg: fov,
                pitch_deg: pitch,
            };
            for path in cmd_render(&scene, &traj, &out, &opts, &cfg.search)? {
                println!("{}", path.display());
            }
        }
        Command::GenSuite { seed, count, out } => {
            let path = cmd_gen_suite(seed.unwrap_or(cfg.seed), count, &out)?;
            println!("{}", path.display());
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
