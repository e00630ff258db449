use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use itinerant::{
    cmd_fit_rnn, cmd_report, cmd_simulate, cmd_tune, cmd_verify, exit, load, Check, CliError,
    Context, Outcome, Overrides,
};

#[derive(Parser)]
#[command(
    name = "itinerant",
    version,
    about = "Tune, simulate and verify itinerant signal classifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Experiment file (TOML).
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Output directory; overrides `output.dir`.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Root seed; overrides `seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Integration step; overrides `run.dt`.
    #[arg(long)]
    dt: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Derive gains, winding and accuracy radius for every class.
    Tune(Common),
    /// Run the bank at the true parameter; writes trajectory.csv and convergence.json.
    Simulate(Common),
    /// Check one analytic property numerically.
    Verify {
        #[arg(value_enum)]
        which: Which,
        #[command(flatten)]
        common: Common,
    },
    /// Fit sigmoid networks to the class subsystems and check the divergence bound.
    FitRnn(Common),
    /// Sweep the true parameter over its range; writes sweep.csv and report.json.
    Report(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    Pe,
    Persistency,
    Bounds,
}

fn context(c: &Common) -> Result<Context, CliError> {
    let overrides = Overrides {
        out: c.out.clone(),
        seed: c.seed,
        dt: c.dt,
    };
    Context::new(&load(&c.config, &overrides)?)
}

fn finish<T: Serialize>(o: Outcome<T>) -> u8 {
    print!("{}", o.json);
    o.code
}

fn run(cli: Cli) -> Result<u8, CliError> {
    Ok(match &cli.command {
        Command::Tune(c) => finish(cmd_tune(&context(c)?)?),
        Command::Simulate(c) => finish(cmd_simulate(&context(c)?)?),
        Command::Verify { which, common } => {
            let check = match which {
                Which::Pe => Check::Pe,
                Which::Persistency => Check::Persistency,
                Which::Bounds => Check::Bounds,
            };
            finish(cmd_verify(&context(common)?, check)?)
        }
        Command::FitRnn(c) => finish(cmd_fit_rnn(&context(c)?)?),
        Command::Report(c) => finish(cmd_report(&context(c)?)?),
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                exit::USAGE
            } else {
                exit::OK
            });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("itinerant: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
