use std::process::ExitCode;

fn main() -> ExitCode {
    bellchain::cli::run()
}
