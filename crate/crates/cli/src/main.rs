use std::process::ExitCode;

use clap::Parser;
use seam_cli::{run, Cli, Command};

fn main() -> ExitCode {
    let Cli { command } = Cli::parse();
    let Command::Run(args) = command;
    match run(&args) {
        Ok(outcome) => {
            if let Some(s) = &outcome.summary {
                for w in &s.warnings {
                    eprintln!("warning: {w}");
                }
                let error = s
                    .error_l2
                    .map_or(String::new(), |e| format!(", relative L2 error {e:.3e}"));
                println!(
                    "{} {}: {} dofs, reduction {}{error}, wrote {}",
                    s.problem,
                    s.mode,
                    s.dofs,
                    s.reduction,
                    args.out.display()
                );
            }
            if let Some(b) = &outcome.bench {
                println!(
                    "bench: hifi {:.4} s, online {:.4} s, speedup {:.1}x",
                    b.hifi.median_s, b.online.median_s, b.speedup
                );
            }
            if let Some(t) = &outcome.selftest {
                println!(
                    "hw-selftest: {} cases, worst margins {:.3e} / {:.3e}, {}",
                    t.cases.len(),
                    t.worst_frobenius_margin,
                    t.worst_interval_margin,
                    if t.passed { "passed" } else { "FAILED" }
                );
                if !t.passed {
                    return ExitCode::from(3);
                }
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
