use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cbmkit::fixtures::emit_fixtures;
use cbmkit::{run_text, Overrides, Report};

#[derive(Parser)]
#[command(name = "cbmkit", version, about = "Checks complemented Brunn-Minkowski and isoperimetric inequalities on scenario files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every check of a scenario.
    Verify {
        scenario: PathBuf,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write check,name,lhs,rhs,slack,pass rows.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Cell size of the voxel oracle.
        #[arg(long)]
        oracle_h: Option<f64>,
        /// Number of grid directions.
        #[arg(long)]
        grid: Option<usize>,
        /// Dump voxel masks of voxel-path checks as PGM into this directory.
        #[arg(long, num_args = 0..=1, default_missing_value = "masks")]
        dump_masks: Option<PathBuf>,
    },
    /// Write the bundled scenarios and their expected CSV reports.
    Fixtures { dir: PathBuf },
    /// Run only the profile searches of a scenario.
    Profile {
        scenario: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        grid: Option<usize>,
    },
}

fn config_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn execute(path: &PathBuf, overrides: Overrides, out: Option<PathBuf>, csv: Option<PathBuf>) -> ExitCode {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return config_error(format!("{}: {e}", path.display())),
    };
    let report: Report = match run_text(&text, &overrides) {
        Ok(r) => r,
        Err(e) => return config_error(e),
    };
    let json = serde_json::to_string_pretty(&report).expect("report serializes");
    match out {
        Some(p) => {
            if let Err(e) = std::fs::write(&p, json + "\n") {
                return config_error(format!("{}: {e}", p.display()));
            }
        }
        None => println!("{json}"),
    }
    if let Some(p) = csv {
        let body = match report.to_csv() {
            Ok(b) => b,
            Err(e) => return config_error(e),
        };
        if let Err(e) = std::fs::write(&p, body) {
            return config_error(format!("{}: {e}", p.display()));
        }
    }
    let s = &report.summary;
    eprintln!("{} passed, {} failed, {} diagnostics ({} failing)", s.passed, s.failed, s.diagnostics, s.diagnostic_failures);
    ExitCode::from(report.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify { scenario, out, csv, oracle_h, grid, dump_masks } => {
            let o = Overrides { grid, oracle_h, dump_masks, profile_only: false };
            execute(&scenario, o, out, csv)
        }
        Command::Profile { scenario, out, grid } => {
            let o = Overrides { grid, profile_only: true, ..Overrides::default() };
            execute(&scenario, o, out, None)
        }
        Command::Fixtures { dir } => match emit_fixtures(&dir) {
            Ok(files) => {
                for f in files {
                    println!("{}", dir.join(f).display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => config_error(e),
        },
    }
}
