use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use interim_cli::commands::{
    cmd_check, cmd_compare, cmd_paper_example, cmd_scan, cmd_solve, cmd_verify, read_problem, read_profile, CliError,
    Settings, DEFAULT_BUDGET,
};
use interim_cli::number::Number;
use interim_cli::report::Report;

#[derive(Parser)]
#[command(name = "interim", version, about = "Interim cores of games and economies with asymmetric information")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Core concept: interim, private, weak-interim-private, fine or
    /// weak-core, optionally `name@epsilon`. Repeat or comma-separate for compare.
    #[arg(long, value_delimiter = ',')]
    concept: Vec<String>,
    /// Blocking tolerance ε (defaults to 0 for economies).
    #[arg(long)]
    epsilon: Option<Number>,
    /// Grid step.
    #[arg(long, default_value = "0.25")]
    resolution: Number,
    /// Maximum number of grid profiles.
    #[arg(long, default_value_t = DEFAULT_BUDGET)]
    budget: usize,
    /// Information-sharing groups for `fine`, e.g. "1,2;3" (default: everyone pools).
    #[arg(long)]
    share: Option<String>,
    /// Print the JSON report instead of text.
    #[arg(long)]
    json: bool,
    /// Also write the JSON report to this file (atomically).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn settings(&self) -> Settings {
        Settings {
            concepts: self.concept.clone(),
            epsilon: self.epsilon,
            resolution: self.resolution,
            budget: self.budget,
            share: self.share.clone(),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Is a profile in the core?
    Check {
        file: PathBuf,
        /// Profile, inline ("1; a:1|b:1; 1") or a file path.
        #[arg(long)]
        profile: String,
        #[command(flatten)]
        common: Common,
    },
    /// Core membership of every grid profile.
    Scan {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Construct and certify a core profile.
    Solve {
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Verdicts under several concepts, with inclusion checks.
    Compare {
        file: PathBuf,
        /// A single profile; the whole grid when omitted.
        #[arg(long)]
        profile: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Reproduce the built-in three-player example.
    PaperExample {
        #[command(flatten)]
        common: Common,
    },
    /// Re-check the certificates in a JSON report.
    Verify {
        report: PathBuf,
        #[command(flatten)]
        common: Common,
    },
}

fn read(path: &PathBuf) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn run(command: Command, echo: &[String]) -> Result<(Report, Common), CliError> {
    Ok(match command {
        Command::Check { file, profile, common } => {
            let problem = read_problem(&read(&file)?)?;
            let x = read_profile(&problem, &profile)?;
            (cmd_check(echo, &problem, &x, &common.settings())?, common)
        }
        Command::Scan { file, common } => {
            let problem = read_problem(&read(&file)?)?;
            (cmd_scan(echo, &problem, &common.settings())?, common)
        }
        Command::Solve { file, common } => {
            let problem = read_problem(&read(&file)?)?;
            (cmd_solve(echo, &problem, &common.settings())?, common)
        }
        Command::Compare { file, profile, common } => {
            let problem = read_problem(&read(&file)?)?;
            let x = profile.map(|p| read_profile(&problem, &p)).transpose()?;
            (cmd_compare(echo, &problem, x.as_ref(), &common.settings())?, common)
        }
        Command::PaperExample { common } => (cmd_paper_example(echo, &common.settings())?, common),
        Command::Verify { report, common } => (cmd_verify(echo, &read(&report)?)?, common),
    })
}

fn main() -> ExitCode {
    let echo: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    match run(cli.command, &echo) {
        Ok((report, common)) => {
            if common.json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.to_text());
            }
            if let Some(path) = &common.out {
                if let Err(e) = report.write_atomic(path) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(report.exit_status as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_status() as u8)
        }
    }
}
