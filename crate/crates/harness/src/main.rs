use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use covcrit_harness::figures::{reproduce_figure, Fidelity, FigureId};
use covcrit_harness::plot::plot_csv;
use covcrit_harness::{run_scenario, HarnessError, Kind, ScenarioConfig};

/// Simulation and analysis of a regulated excitatory/inhibitory network.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// TOML scenario file; built-in defaults for the verb when omitted.
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Override a config key, e.g. `--set params.w_ee=14`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output directory (overrides `output_dir`).
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Print the effective config and exit.
    #[arg(long)]
    dry_run: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Finite-N Glauber network.
    Simulate(ScenarioArgs),
    /// Mean-field trajectory at fixed parameters.
    Meanfield(ScenarioArgs),
    /// Activity coupled to covariance plasticity.
    Regulate(ScenarioArgs),
    /// Equilibria and their stability.
    FixedPoints(ScenarioArgs),
    /// Attractor-type map over two parameters.
    Scan(ScenarioArgs),
    /// Averaged covariance along lines of constant w_ie.
    Profile(ScenarioArgs),
    /// Reproduce one figure panel (1, 2a-c, 3a-b, 4a-c, 5, 6a-c, 7, 8a-c).
    Figure {
        id: String,
        #[arg(long, short, default_value = "figures")]
        out: PathBuf,
        /// Short runs and coarse grids.
        #[arg(long)]
        quick: bool,
        /// Exit with status 4 if any figure check fails.
        #[arg(long)]
        check: bool,
    },
    /// Render a CSV written by this tool as SVG.
    Plot {
        csv: PathBuf,
        /// Output file; defaults to the CSV path with an `.svg` extension.
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

fn scenario(kind: Kind, args: ScenarioArgs) -> Result<(), HarnessError> {
    let mut overrides = args.set;
    if let Some(out) = &args.out {
        overrides.push(format!("output_dir={:?}", out.display().to_string()));
    }
    let cfg = match &args.config {
        Some(path) => ScenarioConfig::load(path, &overrides)?,
        None => ScenarioConfig::parse(&ScenarioConfig::default_for(kind).to_toml(), &overrides)?,
    };
    if cfg.kind != kind {
        return Err(HarnessError::Config(format!(
            "config has kind = {:?} but the verb runs {:?}",
            cfg.kind, kind
        )));
    }
    if args.dry_run {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    let out = run_scenario(&cfg)?;
    for f in &out.files {
        println!("{}", out.dir.join(f).display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Simulate(a) => scenario(Kind::Simulate, a),
        Command::Meanfield(a) => scenario(Kind::Meanfield, a),
        Command::Regulate(a) => scenario(Kind::Regulate, a),
        Command::FixedPoints(a) => scenario(Kind::FixedPoints, a),
        Command::Scan(a) => scenario(Kind::Scan, a),
        Command::Profile(a) => scenario(Kind::Profile, a),
        Command::Figure { id, out, quick, check } => {
            let id: FigureId = id.parse()?;
            let fidelity = if quick { Fidelity::Quick } else { Fidelity::Full };
            let result = reproduce_figure(id, fidelity, &out)?;
            for c in &result.checks {
                println!("{} {}: {}", if c.passed { "pass" } else { "FAIL" }, c.name, c.detail);
            }
            if check && !result.all_passed() {
                return Err(HarnessError::CheckFailed(format!("figure {id}")));
            }
            Ok(())
        }
        Command::Plot { csv, out } => {
            let svg = plot_csv(&csv)?;
            let out = out.unwrap_or_else(|| csv.with_extension("svg"));
            std::fs::write(&out, svg)?;
            println!("{}", out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
