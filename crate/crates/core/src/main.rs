use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use agejam::config::ConfigMap;
use agejam::experiment::{self, detectors, sweep, Mode, PlotKind, SweepSpec, TrainDetectorSpec};
use agejam::Error;

#[derive(Parser)]
#[command(name = "agejam", version, about = "Age of Information under jamming: sweeps, simulations and detector training")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario configuration file (key=value lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the `seed` key.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Train FNN and CNN detectors; writes accuracy.csv, profiles.conf and weight files.
    TrainDetector {
        #[command(flatten)]
        common: Common,
        /// Output directory.
        #[arg(long, default_value = "detectors")]
        out: PathBuf,
    },
    /// Evaluate a parameter grid analytically and/or by simulation.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Output CSV; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_parser = ["analytic", "simulate", "both"])]
        mode: Option<String>,
        /// Also write an SVG plot next to the CSV.
        #[arg(long)]
        svg: bool,
    },
    /// Run one scenario and compare empirical quantities with the closed form.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Plot a sweep CSV as SVG.
    Report {
        /// Sweep CSV produced by `sweep`.
        csv: PathBuf,
        /// Output SVG; defaults to the CSV path with an .svg extension.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "aoi2")]
        column: String,
        #[arg(long, default_value = "auto", value_parser = ["auto", "line", "heatmap"])]
        kind: String,
    },
}

fn load_config(common: &Common) -> agejam::Result<ConfigMap> {
    let map = match &common.config {
        Some(path) => ConfigMap::load(path).map_err(|e| Error::Config(e.to_string()))?,
        None => ConfigMap::new(),
    };
    experiment::check_keys(&map)?;
    Ok(map)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> agejam::Result<()> {
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir).map_err(|e| Error::Io {
                    path: dir.to_path_buf(),
                    source: e,
                })?;
            }
            std::fs::write(path, bytes).map_err(|e| Error::Io {
                path: path.to_path_buf(),
                source: e,
            })
        }
        None => std::io::stdout().write_all(bytes).map_err(|e| Error::Io {
            path: "<stdout>".into(),
            source: e,
        }),
    }
}

fn run(cli: Cli) -> agejam::Result<()> {
    match cli.command {
        Command::TrainDetector { common, out } => {
            let map = load_config(&common)?;
            let spec = TrainDetectorSpec::from_config(&map, common.seed)?;
            let result = experiment::run_train_detector(&spec)?;
            let files = detectors::write_train_outputs(&out, &result)?;
            eprintln!("wrote {} files to {}", files.len(), out.display());
        }
        Command::Sweep {
            common,
            out,
            mode,
            svg,
        } => {
            let map = load_config(&common)?;
            let mode = mode.map(|m| m.parse::<Mode>()).transpose()?;
            if svg && out.is_none() {
                return Err(Error::Config("--svg needs --out".into()));
            }
            let spec = SweepSpec::from_config(&map, common.seed, mode)?;
            let rows = experiment::run_sweep(&spec)?;
            emit(out.as_deref(), &sweep::sweep_csv(&rows)?)?;
            if let (true, Some(csv)) = (svg, &out) {
                let column = map.raw("sweep.plot_column").unwrap_or("aoi2");
                experiment::write_report(csv, &csv.with_extension("svg"), column, PlotKind::Auto)?;
            }
            let bad = sweep::disagreements(&rows);
            if !bad.is_empty() {
                let at: Vec<String> = bad.iter().map(|r| format!("{}={}", r.x.0.name(), r.x.1)).collect();
                return Err(Error::Mismatch(format!(
                    "simulated and analytic AoI disagree at {} grid point(s): {}",
                    bad.len(),
                    at.join(", ")
                )));
            }
        }
        Command::Simulate { common, out } => {
            let map = load_config(&common)?;
            let cfg = experiment::scenario_from_config(&map, common.seed)?;
            let rows = experiment::run_simulate(&cfg)?;
            emit(out.as_deref(), &experiment::simulate_csv(&rows)?)?;
        }
        Command::Report { csv, out, column, kind } => {
            let out = out.unwrap_or_else(|| csv.with_extension("svg"));
            experiment::write_report(&csv, &out, &column, kind.parse()?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}
