use std::process::ExitCode;

fn main() -> ExitCode {
    roughpaths::cli::run()
}
