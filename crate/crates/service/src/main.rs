use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(bldd_service::cli::run(std::env::args_os()))
}
