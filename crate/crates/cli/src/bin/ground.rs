use std::process::ExitCode;

fn main() -> ExitCode {
    dc_cli::ground_cli(std::env::args_os())
}
