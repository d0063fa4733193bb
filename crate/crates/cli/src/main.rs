use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hyperfin_cli::{load, run, CliError, Command, Outcome};

/// Conformable-derivative financial systems: simulation, Lyapunov spectra,
/// parameter scans and attractor traces.
#[derive(Parser)]
#[command(name = "hyperfin", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate one orbit and write trajectory.csv.
    Simulate(RunArgs),
    /// Compute the Lyapunov spectrum and regime; writes spectrum.csv.
    Lyapunov(RunArgs),
    /// Sweep one parameter; writes scan.csv or bifurcation.csv.
    Scan(RunArgs),
    /// Project the post-transient orbit onto three components; writes attractor.csv.
    Attractor(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    config: Option<PathBuf>,
    /// Start from a built-in configuration (paper-sec4).
    #[arg(long)]
    preset: Option<String>,
    /// Set any scalar key, e.g. `params.k=1.5` or `orders.4=0.3`.
    #[arg(long = "override", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Directory for output files (overrides output.dir).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long)]
    plot: bool,
}

fn execute(command: Command, args: RunArgs) -> Result<Outcome, CliError> {
    let cfg = load(args.preset.as_deref(), args.config.as_deref(), &args.overrides)?;
    let mut exp = cfg.resolve()?;
    if let Some(dir) = args.out_dir {
        exp.out_dir = dir;
    }
    exp.plot |= args.plot;
    run(command, &exp)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let (command, args) = match cli.command {
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Lyapunov(a) => (Command::Lyapunov, a),
        Cmd::Scan(a) => (Command::Scan, a),
        Cmd::Attractor(a) => (Command::Attractor, a),
    };
    match execute(command, args) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
