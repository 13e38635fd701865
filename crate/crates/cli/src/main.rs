use std::path::PathBuf;
use std::process::ExitCode;

use agebench_cli::presets::{preset, PRESET_NAMES};
use agebench_cli::{run, CliError, Command, ExperimentSpec};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "agebench", version, about = "Age of information in bufferless preemptive queues")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Analytic violation probabilities and moments.
    Analyze(RunArgs),
    /// Simulate and compare against the analytic values.
    Simulate(RunArgs),
    /// Optimal rate allocation at a fixed budget.
    Optimize(RunArgs),
    /// Optimal against equal allocation over a range of budgets.
    Sweep(RunArgs),
    /// Print a built-in spec as JSON.
    Preset {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(PRESET_NAMES))]
        name: String,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Experiment spec (JSON).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    spec: Option<PathBuf>,
    /// Built-in spec instead of a file.
    #[arg(long, value_parser = clap::builder::PossibleValuesParser::new(PRESET_NAMES))]
    preset: Option<String>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Overrides the simulation seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn execute(command: Command, args: RunArgs) -> Result<Vec<String>, CliError> {
    let spec = match (&args.spec, &args.preset) {
        (Some(path), _) => ExperimentSpec::load(path)?,
        (None, Some(name)) => preset(name)?,
        (None, None) => unreachable!("clap requires one of --spec and --preset"),
    };
    run(command, &spec, &args.out, args.seed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Analyze(a) => (Command::Analyze, a),
        Cmd::Simulate(a) => (Command::Simulate, a),
        Cmd::Optimize(a) => (Command::Optimize, a),
        Cmd::Sweep(a) => (Command::Sweep, a),
        Cmd::Preset { name } => {
            println!("{}", preset(&name).expect("validated by clap").to_json());
            return ExitCode::SUCCESS;
        }
    };
    match execute(command, args) {
        Ok(report) => {
            for line in report {
                println!("{line}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
