use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nhdyn_core::scenario::{
    max_dim_from_env, run, RunOptions, ScenarioConfig, ScenarioError, REPORT_FILE,
};

#[derive(Parser)]
#[command(
    name = "nhdyn",
    version,
    about = "Heisenberg dynamics for non-self-adjoint Hamiltonians"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write CSV files plus report.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "nhdyn-out")]
        out_dir: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Adds frozen-series diagnostics for non-eigenstate initial data.
        #[arg(long)]
        exploratory: bool,
    },
    /// Check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(path: &PathBuf) -> Result<ScenarioConfig, ScenarioError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ScenarioError::Io(format!("{}: {e}", path.display())))?;
    ScenarioConfig::from_json(&text)
}

fn fail(e: ScenarioError) -> ExitCode {
    eprintln!("nhdyn: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let max_dim = match max_dim_from_env() {
        Ok(d) => d,
        Err(e) => return fail(e),
    };
    match cli.command {
        Command::Validate { config } => {
            match load(&config).and_then(|c| c.prepare(max_dim).map(|p| (c, p))) {
                Ok((_, p)) => {
                    println!(
                        "ok: dimension {}, {} grid points, tasks {:?}",
                        p.h.rows(),
                        p.grid.len(),
                        p.tasks
                    );
                    if let Some(norm) = p.input_norm.filter(|n| *n != 1.0) {
                        println!("note: initial_state has norm {norm:e} and will be normalized");
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => fail(e),
            }
        }
        Command::Run {
            config,
            out_dir,
            seed,
            exploratory,
        } => {
            let mut cfg = match load(&config) {
                Ok(c) => c,
                Err(e) => return fail(e),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            cfg.exploratory |= exploratory;
            let options = RunOptions {
                out_dir: Some(out_dir.clone()),
                max_dim,
            };
            match run(&cfg, &options) {
                Ok(report) => {
                    for (task, outcome) in [
                        ("biortho", report.biortho.as_ref().map(|o| o.is_ok())),
                        ("symmetries", report.symmetries.as_ref().map(|o| o.is_ok())),
                        ("trajectory", report.trajectory.as_ref().map(|o| o.is_ok())),
                        ("classify", report.classify.as_ref().map(|o| o.is_ok())),
                        (
                            "eigenstate_case",
                            report.eigenstate_case.as_ref().map(|o| o.is_ok()),
                        ),
                        (
                            "fermion_demo",
                            report.fermion_demo.as_ref().map(|o| o.is_ok()),
                        ),
                        (
                            "exploratory",
                            report.exploratory.as_ref().map(|o| o.is_ok()),
                        ),
                    ] {
                        if let Some(ok) = outcome {
                            println!("{task}: {}", if ok { "ok" } else { "failed" });
                        }
                    }
                    println!("report: {}", out_dir.join(REPORT_FILE).display());
                    ExitCode::from(report.exit_status as u8)
                }
                Err(e) => fail(e),
            }
        }
    }
}
