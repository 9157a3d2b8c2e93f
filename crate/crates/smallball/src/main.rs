use std::process::ExitCode;

fn main() -> ExitCode {
    smallball::cli::main_with_args(std::env::args_os())
}
