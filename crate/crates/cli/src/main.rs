use std::process::ExitCode;

fn main() -> ExitCode {
    hfv::cli::main_with(std::env::args_os())
}
