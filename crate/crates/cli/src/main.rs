use clap::{Args, Parser, Subcommand};
use ecs_core::DEFAULT_BUDGET;
use ecs_kit::commands::{self, read_file, BarcodeFlags, ModuleFlags};
use ecs_kit::roundtrip::{self, parse_range, CorpusSpec};
use ecs_kit::{CliError, Outcome};
use std::io::Write;
use std::process::ExitCode;

/// Exact exterior critical series of barcodes and grid persistence modules.
#[derive(Parser)]
#[command(name = "ecs-kit", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Commands on barcode files.
    #[command(subcommand)]
    Barcode(BarcodeCommand),
    /// Commands on grid module files.
    #[command(subcommand)]
    Module(ModuleCommand),
    /// Check reconstruction on a seeded random corpus.
    Roundtrip(RoundtripArgs),
}

#[derive(Args, Clone)]
struct Limits {
    /// Highest exterior power in the series (default: all).
    #[arg(long)]
    p_max: Option<usize>,
    /// Cap on the projected number of terms or basis elements.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
}

#[derive(Subcommand)]
enum BarcodeCommand {
    /// Series of a barcode; with no flags, its exterior critical series.
    Invariants {
        input: String,
        #[arg(long)]
        birth: bool,
        #[arg(long)]
        death: bool,
        #[arg(long)]
        critical: bool,
        #[arg(long)]
        lifespan: bool,
        #[arg(long)]
        drift: bool,
        #[arg(long)]
        ecs: bool,
        #[command(flatten)]
        limits: Limits,
    },
    /// Barcode whose exterior critical series is the input.
    Reconstruct {
        input: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: usize,
    },
    /// Compare the series of two barcodes.
    Compare {
        a: String,
        b: String,
        #[command(flatten)]
        limits: Limits,
    },
}

#[derive(Subcommand)]
enum ModuleCommand {
    /// Invariants of a module; with no flags, its exterior critical series.
    Invariants {
        input: String,
        #[arg(long)]
        hilbert: bool,
        #[arg(long)]
        rank_invariant: bool,
        #[arg(long)]
        onset: bool,
        #[arg(long)]
        critical: bool,
        #[arg(long)]
        ecs: bool,
        #[command(flatten)]
        limits: Limits,
    },
    /// Compare Hilbert functions, rank invariants and series of two modules.
    Compare {
        a: String,
        b: String,
        #[command(flatten)]
        limits: Limits,
    },
}

#[derive(Args)]
struct RoundtripArgs {
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    max_bars: usize,
    /// Birth range LO:HI.
    #[arg(long, default_value = "-8:8", allow_hyphen_values = true)]
    grade_range: String,
    /// Lifespan range LO:HI, lifespans in (LO, HI].
    #[arg(long, default_value = "0:8")]
    lifespan_range: String,
    /// Largest denominator of generated rationals.
    #[arg(long, default_value_t = 4)]
    max_denominator: i64,
}

fn dispatch(cli: Cli) -> Result<Outcome, CliError> {
    match cli.command {
        Command::Barcode(BarcodeCommand::Invariants { input, birth, death, critical, lifespan, drift, ecs, limits }) => {
            let flags = BarcodeFlags { birth, death, critical, lifespan, drift, ecs, p_max: limits.p_max, budget: limits.budget };
            commands::barcode_invariants(&read_file(&input)?, &flags)
        }
        Command::Barcode(BarcodeCommand::Reconstruct { input, budget }) => {
            commands::barcode_reconstruct(&read_file(&input)?, budget)
        }
        Command::Barcode(BarcodeCommand::Compare { a, b, limits }) => {
            commands::barcode_compare(&read_file(&a)?, &read_file(&b)?, limits.p_max, limits.budget)
        }
        Command::Module(ModuleCommand::Invariants { input, hilbert, rank_invariant, onset, critical, ecs, limits }) => {
            let flags = ModuleFlags { hilbert, rank_invariant, onset, critical, ecs, p_max: limits.p_max, budget: limits.budget };
            commands::module_invariants(&read_file(&input)?, &flags)
        }
        Command::Module(ModuleCommand::Compare { a, b, limits }) => {
            commands::module_compare(&read_file(&a)?, &read_file(&b)?, limits.p_max, limits.budget)
        }
        Command::Roundtrip(args) => {
            let spec = CorpusSpec {
                count: args.count,
                seed: args.seed,
                max_bars: args.max_bars,
                grades: parse_range(&args.grade_range)?,
                lifespans: parse_range(&args.lifespan_range)?,
                max_denominator: args.max_denominator,
            };
            roundtrip::run(&spec)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(out) => {
            let _ = std::io::stdout().write_all(out.stdout.as_bytes());
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("ecs-kit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
