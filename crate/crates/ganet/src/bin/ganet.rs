use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(ganet::cli::run(std::env::args()) as u8)
}
