use std::process::ExitCode;

fn main() -> ExitCode {
    heisenberg_analysis::harness::cli::main_with_args(std::env::args_os())
}
