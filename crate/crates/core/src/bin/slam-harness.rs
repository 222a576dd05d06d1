use std::fs::{self, File};
use std::io::{self, BufWriter};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use slam_observer::harness::{self, SweepAxis};
use slam_observer::observer::correction_stiffness;
use slam_observer::scenario::{load_scenario, ScenarioConfig};
use slam_observer::world::sense;
use slam_observer::{ConfigError, RunError};

#[derive(Parser)]
#[command(name = "slam-harness", about = "Simulate the fast-adaptation SLAM observer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write metrics.csv into the output directory.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run one scenario per value of a parameter and print a summary table.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long)]
        axis: String,
        /// Comma-separated values; may be empty.
        #[arg(long, default_value = "", allow_hyphen_values = true)]
        values: String,
        /// Also write the summary to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and check a scenario without running it.
    Validate {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file, or `paper-sec5` for the built-in reference scenario.
    #[arg(long)]
    scenario: String,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    stride: Option<usize>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<ScenarioConfig, ConfigError> {
        let mut c = load_scenario(&self.scenario)?;
        if let Some(dt) = self.dt {
            c.dt = dt;
        }
        if let Some(d) = self.duration {
            c.duration = d;
        }
        if let Some(s) = self.seed {
            c.noise.seed = s;
        }
        if let Some(s) = self.stride {
            c.stride = s;
        }
        c.validate()?;
        Ok(c)
    }
}

enum Failure {
    Config(ConfigError),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e)
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn stability_warning(c: &ScenarioConfig) {
    let truth = c.initial_truth();
    let u = c.twist_profile.at(0.0);
    let frame = sense(&truth, &c.bias, &c.noise, &u, 0.0, &mut c.noise.source());
    if let Ok(k) = correction_stiffness(&c.initial_estimates, &frame, &c.gains) {
        let bound = 2.0 / k;
        if c.dt >= bound {
            eprintln!("warning: dt = {} exceeds the initial stability bound {bound:.3e} s", c.dt);
        }
    }
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { scenario } => {
            let c = scenario.load()?;
            stability_warning(&c);
            println!(
                "ok: {} landmarks, {} steps of {} s",
                c.landmarks.len(),
                c.step_count(),
                c.dt
            );
        }
        Command::Run { scenario, out } => {
            let c = scenario.load()?;
            stability_warning(&c);
            let records = harness::run(&c)?;
            fs::create_dir_all(&out)?;
            let path = out.join("metrics.csv");
            harness::write_csv(BufWriter::new(File::create(&path)?), &records)?;
            if let Some(last) = records.last() {
                println!(
                    "t = {}: max |e_i| = {:.3e}, max |p_i - p_hat_i| = {:.3e}, lyapunov = {:.3e}",
                    last.t,
                    last.max_e(),
                    last.max_p_err(),
                    last.lyapunov
                );
            }
            println!("wrote {} rows to {}", records.len(), path.display());
        }
        Command::Sweep {
            scenario,
            axis,
            values,
            out,
        } => {
            let c = scenario.load()?;
            let axis: SweepAxis = axis.parse()?;
            let values = values
                .split(',')
                .map(str::trim)
                .filter(|v| !v.is_empty())
                .map(|v| v.parse::<f64>().map_err(|_| ConfigError::Invalid(format!("bad sweep value `{v}`"))))
                .collect::<Result<Vec<_>, _>>()?;
            let rows = harness::sweep(&c, axis, &values)?;
            harness::write_sweep_csv(io::stdout().lock(), axis, &rows)?;
            if let Some(path) = out {
                harness::write_sweep_csv(BufWriter::new(File::create(path)?), axis, &rows)?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
