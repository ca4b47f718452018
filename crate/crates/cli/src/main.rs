use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mmwave_mac::experiment::{figure_preset, run_experiment, Engine, ExperimentSpec};
use mmwave_mac::Error;

/// Collision, throughput and delay experiments for directional mmWave networks.
#[derive(Parser)]
#[command(name = "mmwave-mac", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form analysis.
    Analyze(Common),
    /// Monte Carlo estimates of the sectored model.
    Mc(Common),
    /// Event-driven simulation on planar topologies.
    Sim(Common),
    /// Run the engine named in the config over its sweep.
    Sweep(Common),
    /// Write the CSV files of a figure preset into a directory.
    Figure {
        #[arg(long)]
        figure: String,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// TOML experiment description.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Monte Carlo trials per point.
    #[arg(long)]
    trials: Option<u64>,
    /// Simulated seconds per replication.
    #[arg(long)]
    duration: Option<f64>,
    #[arg(long)]
    replications: Option<u64>,
    /// Output file (directory for `figure`); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweep points; defaults to all cores.
    #[arg(long)]
    workers: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentSpec, Error> {
        match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
                ExperimentSpec::from_toml(&text)
                    .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
            }
            None => Ok(ExperimentSpec::default()),
        }
    }

    fn apply(&self, spec: &mut ExperimentSpec) {
        if let Some(s) = self.seed {
            spec.seed = s;
        }
        if let Some(t) = self.trials {
            spec.trials = t;
        }
        if let Some(d) = self.duration {
            spec.duration_s = d;
        }
        if let Some(r) = self.replications {
            spec.replications = r;
        }
    }
}

fn write_output(path: Option<&Path>, csv: &str) -> Result<(), Error> {
    match path {
        Some(p) => fs::write(p, csv).map_err(|e| Error::Config(format!("{}: {e}", p.display()))),
        None => {
            print!("{csv}");
            Ok(())
        }
    }
}

fn run_single(common: &Common, engine: Option<Engine>) -> Result<(), Error> {
    let mut spec = common.load()?;
    if let Some(e) = engine {
        spec.engine = e;
    }
    common.apply(&mut spec);
    let out = run_experiment(&spec)?;
    let path = common.out.clone().or(spec.output.clone());
    write_output(path.as_deref(), &out.to_csv())
}

fn run_figure(id: &str, common: &Common) -> Result<(), Error> {
    let specs = figure_preset(id)?;
    let dir = common
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from("figures"));
    fs::create_dir_all(&dir).map_err(|e| Error::Config(format!("{}: {e}", dir.display())))?;
    for mut spec in specs {
        common.apply(&mut spec);
        let out = run_experiment(&spec)?;
        let path = dir.join(format!("{}.csv", spec.name));
        write_output(Some(&path), &out.to_csv())?;
        eprintln!("wrote {}", path.display());
    }
    Ok(())
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidParameter { .. } => 2,
        Error::NoInterferenceRange { .. } | Error::Domain { .. } | Error::DegenerateDelay => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Analyze(c) | Command::Mc(c) | Command::Sim(c) | Command::Sweep(c) => c,
        Command::Figure { common, .. } => common,
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = common.workers {
        pool = pool.num_threads(n.max(1));
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker pool: {e}");
            return ExitCode::from(1);
        }
    };
    let result = pool.install(|| match &cli.command {
        Command::Analyze(c) => run_single(c, Some(Engine::Analytic)),
        Command::Mc(c) => run_single(c, Some(Engine::Montecarlo)),
        Command::Sim(c) => run_single(c, Some(Engine::Desim)),
        Command::Sweep(c) => run_single(c, None),
        Command::Figure { figure, common } => run_figure(figure, common),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
