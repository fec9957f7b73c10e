use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use setmem::analysis::step_bounds;
use setmem::cdma::{gold_family, ConvolutionMatrix};
use setmem::export;
use setmem::harness::run_scenario;
use setmem::{CVector, Complex64, Error, ExperimentConfig, Scenario};

/// Set-membership CDMA receiver experiments.
#[derive(Parser)]
#[command(name = "setmem", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Interference power tracking at the RAKE output.
    TrackInterference(ScenarioArgs),
    /// SINR convergence curves.
    Sinr(ScenarioArgs),
    /// BER and update rate against Eb/N0.
    BerSnr(ScenarioArgs),
    /// BER and update rate against the number of users.
    BerUsers(ScenarioArgs),
    /// BER and update rate against normalized Doppler.
    BerDoppler(ScenarioArgs),
    /// Write a Gold code family as CSV.
    Codes {
        #[arg(long, default_value_t = 5)]
        degree: u32,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stability limits of the estimators and bound recursion.
    BoundsReport {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Also write stability.csv into this directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ScenarioArgs {
    /// Flat TOML config; missing keys take the scenario defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    runs: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Comma-separated algorithm list, e.g. `nlms,sm-nlms-pidb`.
    #[arg(long, value_delimiter = ',')]
    algo: Option<Vec<String>>,
    /// Also write per-symbol traces of the first run.
    #[arg(long)]
    trace: bool,
    /// Override any config key, e.g. `--set alpha=5 --set fd_t=1e-3`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

fn load(path: Option<&PathBuf>, scenario: Scenario) -> setmem::Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::from_file(p, Some(scenario)),
        None => Ok(ExperimentConfig::for_scenario(scenario)),
    }
}

fn run(scenario: Scenario, args: ScenarioArgs) -> setmem::Result<()> {
    let mut cfg = load(args.config.as_ref(), scenario)?.with_overrides(&args.overrides)?;
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(runs) = args.runs {
        cfg.runs = runs;
    }
    if let Some(algos) = args.algo {
        cfg.algorithms = algos;
    }
    cfg.trace |= args.trace;
    cfg.validate()?;
    let artifact = run_scenario(&cfg)?;
    artifact.write_to(&args.out)?;
    let headline: Vec<String> = artifact.points[0]
        .lanes
        .iter()
        .map(|l| format!("{} UR={:.3}", l.algorithm, l.metrics.update_rate()))
        .collect();
    println!(
        "{scenario}: {} point(s) x {} runs, seed {}, {} files in {} [{}]",
        artifact.points.len(),
        cfg.runs,
        cfg.seed,
        artifact.files.len(),
        args.out.display(),
        headline.join(", ")
    );
    Ok(())
}

fn codes(degree: u32, out: Option<PathBuf>) -> setmem::Result<()> {
    let family = gold_family(degree)?;
    let csv = export::codes_csv(&family)?;
    match out {
        Some(path) => {
            std::fs::write(&path, csv)?;
            println!("codes: {} sequences of length {} to {}", family.len(), family[0].len(), path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn bounds_report(config: Option<PathBuf>, out: Option<PathBuf>) -> setmem::Result<()> {
    let cfg = match config {
        Some(p) => ExperimentConfig::from_file(&p, None)?,
        None => ExperimentConfig::for_scenario(Scenario::SinrConvergence),
    };
    let family = gold_family(cfg.code_degree)?;
    let conv = ConvolutionMatrix::new(&family[cfg.desired_user], cfg.channel_taps)?;
    let mut e0 = CVector::zeros(cfg.channel_taps);
    e0[0] = Complex64::new(1.0, 0.0);
    let report = step_bounds(&conv, 1.0, 1.0, &e0)?;
    println!("{report}");
    println!("mu_h in use       = {:.10}", cfg.mu_h_fraction * report.mu_h_max);
    println!("mu_A in use       = {:.10}", cfg.mu_a_fraction * report.mu_a_max);
    println!("beta in use       = {}", cfg.beta);
    if let Some(dir) = out {
        std::fs::create_dir_all(&dir)?;
        std::fs::write(dir.join("stability.csv"), export::stability_csv(&report)?)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::TrackInterference(a) => run(Scenario::InterferenceTracking, a),
        Command::Sinr(a) => run(Scenario::SinrConvergence, a),
        Command::BerSnr(a) => run(Scenario::BerVsSnr, a),
        Command::BerUsers(a) => run(Scenario::BerVsUsers, a),
        Command::BerDoppler(a) => run(Scenario::BerVsDoppler, a),
        Command::Codes { degree, out } => codes(degree, out),
        Command::BoundsReport { config, out } => bounds_report(config, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                e if e.is_numerical() => 3,
                Error::Io(_) | Error::Csv(_) => 1,
                _ => 2,
            })
        }
    }
}
