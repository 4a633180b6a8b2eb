use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(grf_homog::run(std::env::args_os()).code())
}
