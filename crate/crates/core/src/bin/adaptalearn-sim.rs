use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use adaptalearn::sim::{self, TraceScript};
use clap::{Parser, Subcommand};

/// Replays learner behavior traces against the adaptation stack on a simulated clock.
#[derive(Parser)]
#[command(name = "adaptalearn-sim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replay a trace script and check its expectations.
    Replay { script: PathBuf },
    /// Run the embedded golden settlement rows.
    VerifyTable1,
    /// Print a deterministic random trace script.
    Gen {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        events: usize,
    },
}

/// Writes to stdout; a closed pipe is not an error.
fn out(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match cli.command {
        Command::Replay { script } => {
            let text = match std::fs::read_to_string(&script) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("{}: {e}", script.display());
                    return ExitCode::from(2);
                }
            };
            let parsed: TraceScript = match text.parse() {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("{}: {e}", script.display());
                    return ExitCode::from(2);
                }
            };
            match sim::replay(&parsed) {
                Ok(report) => {
                    out(&report.to_string());
                    ExitCode::from(report.exit_code() as u8)
                }
                Err(e) => {
                    eprintln!("replay failed: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Command::VerifyTable1 => match sim::verify_table1() {
            Ok(report) => {
                out(&report.to_string());
                ExitCode::from(report.exit_code() as u8)
            }
            Err(e) => {
                eprintln!("verify-table1 failed: {e}");
                ExitCode::from(2)
            }
        },
        Command::Gen { seed, events } => {
            out(&sim::gen_trace_text(seed, events));
            ExitCode::SUCCESS
        }
    }
}
