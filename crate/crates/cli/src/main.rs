use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hpsim::experiment::{gnuplot_script, run_experiment, ConfigError, CsvTable, ExperimentConfig, ExperimentKind};

#[derive(Parser)]
#[command(name = "hpsim", version, about = "Boson-to-qubit mapped circuit experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Driven harmonic oscillator on a qubit ensemble.
    Dho(RunArgs),
    /// Jaynes-Cummings vacuum Rabi oscillation, Trotterized.
    JcTrotter(RunArgs),
    /// Jaynes-Cummings evolution from synthesized three-qubit unitaries.
    JcSynth(RunArgs),
    /// Repeated bare-CZ benchmark.
    CzBenchmark(RunArgs),
    /// Time-averaged |a - b| between two columns of a CSV.
    Metrics(MetricsArgs),
    /// Write a gnuplot script for a config's output CSVs.
    PlotScript(PlotArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config (TOML). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    shots: Option<u64>,
    /// Calibration CSV, or `none` for noiseless runs.
    #[arg(long)]
    calibration: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct MetricsArgs {
    /// CSV written by one of the experiment subcommands.
    #[arg(long)]
    input: PathBuf,
    /// Reference column, e.g. `P_c` or `P_exact`.
    #[arg(long)]
    reference: String,
    /// Compared column, e.g. `P_q` or `P_noisy`.
    #[arg(long)]
    compare: String,
    /// Average separately for each value of this column, e.g. `n`.
    #[arg(long)]
    group_by: Option<String>,
}

#[derive(Args)]
struct PlotArgs {
    #[arg(long)]
    config: PathBuf,
    /// Directory holding the CSVs; the script is written there as `plot.gp`.
    #[arg(long)]
    out: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Runtime(String),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<hpsim::Error> for Failure {
    fn from(e: hpsim::Error) -> Self {
        match e {
            hpsim::Error::Config(_) | hpsim::Error::Calibration(_) => Failure::Config(e.to_string()),
            other => Failure::Runtime(other.to_string()),
        }
    }
}

fn load_config(kind: ExperimentKind, args: &RunArgs) -> Result<ExperimentConfig, Failure> {
    let mut cfg = match &args.config {
        Some(path) => {
            let cfg = ExperimentConfig::load(path)?;
            if cfg.kind != kind {
                return Err(Failure::Config(format!(
                    "{} has kind `{}`, but the subcommand is `{}`",
                    path.display(),
                    cfg.kind.as_str(),
                    kind.as_str()
                )));
            }
            cfg
        }
        None => ExperimentConfig::defaults(kind),
    };
    if let Some(seed) = args.seed {
        cfg = cfg.with_seed(seed);
    }
    if let Some(shots) = args.shots {
        cfg = cfg.with_shots(shots)?;
    }
    if let Some(cal) = &args.calibration {
        cfg = cfg.with_calibration(cal)?;
    }
    if let Some(out) = &args.out {
        cfg = cfg.with_out(out);
    }
    Ok(cfg)
}

fn run(kind: ExperimentKind, args: &RunArgs) -> Result<(), Failure> {
    let cfg = load_config(kind, args)?;
    let report = run_experiment(&cfg)?;
    for f in &report.files {
        println!("{}", f.display());
    }
    Ok(())
}

fn metrics(args: &MetricsArgs) -> Result<(), Failure> {
    let table = CsvTable::read(&args.input)?;
    let a = table.column_f64(&args.reference)?;
    let b = table.column_f64(&args.compare)?;
    let groups: Vec<String> = match &args.group_by {
        Some(col) => table.column_str(col)?.into_iter().map(str::to_string).collect(),
        None => vec![String::new(); a.len()],
    };
    if a.is_empty() {
        return Err(Failure::Runtime(format!("{} has no rows", args.input.display())));
    }
    // Group keys keep first-appearance order.
    let mut order = Vec::new();
    let mut acc: BTreeMap<&str, (f64, usize)> = BTreeMap::new();
    for ((x, y), g) in a.iter().zip(&b).zip(&groups) {
        let e = acc.entry(g.as_str()).or_insert_with(|| {
            order.push(g.as_str());
            (0.0, 0)
        });
        e.0 += (x - y).abs();
        e.1 += 1;
    }
    match &args.group_by {
        Some(col) => {
            println!("{col},mean_abs_difference,M");
            for g in order {
                let (s, m) = acc[g];
                println!("{g},{:.11e},{m}", s / m as f64);
            }
        }
        None => {
            let (s, m) = acc[""];
            println!("mean_abs_difference,M\n{:.11e},{m}", s / m as f64);
        }
    }
    Ok(())
}

fn plot_script(args: &PlotArgs) -> Result<(), Failure> {
    let cfg = ExperimentConfig::load(&args.config)?;
    let dir: &Path = args.out.as_deref().unwrap_or(&cfg.out);
    std::fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join("plot.gp");
    std::fs::write(&path, gnuplot_script(&cfg)).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))?;
    println!("{}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let result = match &cli.command {
        Command::Dho(a) => run(ExperimentKind::Dho, a),
        Command::JcTrotter(a) => run(ExperimentKind::JcTrotter, a),
        Command::JcSynth(a) => run(ExperimentKind::JcSynth, a),
        Command::CzBenchmark(a) => run(ExperimentKind::CzBenchmark, a),
        Command::Metrics(a) => metrics(a),
        Command::PlotScript(a) => plot_script(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
