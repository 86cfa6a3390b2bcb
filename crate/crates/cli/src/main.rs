use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use foresight_bridge::{serve, ServeOptions};
use foresight_core::harness::{self, InterventionScript};
use foresight_core::world::{load_scenario, ScenarioConfig};

#[derive(Parser)]
#[command(name = "foresight", version, about = "Gaze-directed prediction correction for a highway planner")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario headless and print its metrics as JSON.
    Run {
        scenario: PathBuf,
        /// Intervention script: lines of `time vehicle_id left|right`.
        #[arg(long)]
        script: Option<PathBuf>,
        /// Write a per-tick CSV trace here.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Write the metrics JSON here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a scenario with and without a script and report the differences.
    Compare {
        scenario: PathBuf,
        #[arg(long)]
        script: PathBuf,
        /// Write the machine-readable report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Serve the simulation to WebSocket clients on `/ws`.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Real-time factor: simulated seconds per wall-clock second.
        #[arg(long, default_value_t = 1.0)]
        rtf: f64,
        #[arg(long, default_value = "scenarios")]
        scenario_dir: PathBuf,
        /// Scenario to start with (file stem); defaults to the first one.
        #[arg(long)]
        scenario: Option<String>,
    },
}

fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    load_scenario(&text).with_context(|| format!("loading {}", path.display()))
}

fn load_script(path: &Path) -> Result<InterventionScript> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    InterventionScript::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            scenario,
            script,
            trace,
            out,
        } => {
            let config = load_config(&scenario)?;
            let script = script.as_deref().map(load_script).transpose()?.unwrap_or_default();
            let metrics = harness::run(&config, &script, trace.as_deref())?;
            emit(&serde_json::to_string_pretty(&metrics)?, out.as_deref())
        }
        Command::Compare { scenario, script, out } => {
            let config = load_config(&scenario)?;
            let script = load_script(&script)?;
            let report = harness::compare(&config, &script)?;
            print!("{}", report.to_text());
            if let Some(p) = out {
                emit(&report.to_json()?, Some(&p))?;
            }
            Ok(())
        }
        Command::Serve {
            port,
            rtf,
            scenario_dir,
            scenario,
        } => {
            tracing_subscriber::fmt().with_writer(std::io::stderr).init();
            let options = ServeOptions {
                port,
                rtf,
                scenario_dir,
                scenario,
            };
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(serve(options))?;
            Ok(())
        }
    }
}
