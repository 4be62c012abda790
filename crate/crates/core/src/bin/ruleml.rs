use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ruleml::miner::Algorithm;
use ruleml::service::cli::{self, CliError, EXIT_USAGE};

#[derive(Parser)]
#[command(
    name = "ruleml",
    version,
    about = "Association-rule learning engine and daemon"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Serve the request protocol over a unix socket or TCP.
    Serve {
        #[arg(long)]
        store: PathBuf,
        /// Socket path, or tcp:HOST:PORT.
        #[arg(long)]
        listen: String,
    },
    /// Mine rules from a data file.
    Mine {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        minsup: f64,
        #[arg(long)]
        minconf: f64,
        #[arg(long, default_value = "apriori")]
        algo: Algorithm,
        #[arg(long)]
        stats: bool,
    },
    /// Replay a sensor/action trace and score predictions.
    Replay {
        #[arg(long)]
        trace: PathBuf,
        #[arg(long)]
        bins: PathBuf,
        #[arg(long)]
        minsup: f64,
        #[arg(long)]
        minconf: f64,
        #[arg(long, default_value = "apriori")]
        algo: Algorithm,
        /// Regenerate every N learned rows instead of after each one.
        #[arg(long)]
        regen_every: Option<usize>,
    },
    /// Generate a seeded synthetic trace plus its frequency sidecar.
    GenTrace {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        len: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Summarize one stored application without modifying the store.
    Inspect {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        app: String,
    },
}

fn run(command: Command) -> Result<(), CliError> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match command {
        Command::Serve { store, listen } => cli::cmd_serve(&store, &listen, &mut out),
        Command::Mine {
            data,
            minsup,
            minconf,
            algo,
            stats,
        } => cli::cmd_mine(
            &data,
            cli::thresholds(minsup, minconf)?,
            algo,
            stats,
            &mut out,
        ),
        Command::Replay {
            trace,
            bins,
            minsup,
            minconf,
            algo,
            regen_every,
        } => cli::cmd_replay(
            &trace,
            &bins,
            cli::thresholds(minsup, minconf)?,
            algo,
            regen_every,
            &mut out,
        ),
        Command::GenTrace {
            spec,
            seed,
            len,
            out: path,
        } => cli::cmd_gen_trace(&spec, seed, len, &path, &mut out),
        Command::Inspect { store, app } => cli::cmd_inspect(&store, &app, &mut out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = io::stdout().flush();
            eprintln!("{e}");
            ExitCode::from(e.exit)
        }
    }
}
