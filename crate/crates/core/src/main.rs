use std::process::ExitCode;

fn main() -> ExitCode {
    nlqw_core::cli::main_with_args(std::env::args_os())
}
