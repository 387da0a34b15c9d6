use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(groupshuffle::cli::run(std::env::args()) as u8)
}
