use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let outcome = multitree_cli::run(std::env::args_os());
    if outcome.code == multitree_cli::EXIT_INPUT {
        let _ = std::io::stderr().write_all(outcome.report.as_bytes());
    } else {
        let _ = std::io::stdout().write_all(outcome.report.as_bytes());
    }
    ExitCode::from(outcome.code as u8)
}
