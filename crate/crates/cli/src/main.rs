//! `nilgrade`: grading tables, flags, rates, rare-event sweeps and release checks.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use nilgrade::verify::Suite;

#[derive(Debug, Parser)]
#[command(
    name = "nilgrade",
    version,
    about = "Graded small-noise asymptotics for nilpotent diffusions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Grading table of all words over {0..m} up to length r.
    Grade {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        r: usize,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// α-flag and block structures of an algebra file.
    Flag {
        #[arg(long)]
        algebra: PathBuf,
        /// Word length; defaults to the nilpotency length.
        #[arg(long)]
        r: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rate function from a JSON config; writes rate.json and rate.csv.
    Rate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// ε-sweep with grade fit, or the solvable sandwich; writes CSV and JSON.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Run the numbered release checks and print a PASS/FAIL table.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SuiteArg {
    Algebra,
    Paths,
    Rates,
    Sweeps,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Algebra => Suite::Algebra,
            SuiteArg::Paths => Suite::Paths,
            SuiteArg::Rates => Suite::Rates,
            SuiteArg::Sweeps => Suite::Sweeps,
            SuiteArg::All => Suite::All,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Grade { m, r, out } => commands::grade(m, r, out.as_deref()),
        Command::Flag { algebra, r, out } => commands::flag(&algebra, r, out.as_deref()),
        Command::Rate { config, out_dir } => commands::rate(&config, &out_dir),
        Command::Sweep { config, out_dir } => commands::sweep(&config, &out_dir),
        Command::Verify { suite } => commands::verify(suite.into()),
    };
    match res {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
