use std::process::ExitCode;

fn main() -> ExitCode {
    dc_cli::dcs_cli(std::env::args_os())
}
