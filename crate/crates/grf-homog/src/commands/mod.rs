pub mod brf;
pub mod catalog;
pub mod flow;
pub mod kobayashi;
pub mod stability;
pub mod verify;

use crate::cli::Command;
use crate::error::{CliResult, ExitStatus};

pub fn dispatch(cmd: &Command) -> CliResult<ExitStatus> {
    match cmd {
        Command::Verify(a) => verify::run(a),
        Command::Brf(a) => brf::run(a),
        Command::Flow(a) => flow::run(a),
        Command::Stability(a) => stability::run(a),
        Command::Kobayashi(a) => kobayashi::run(a),
        Command::Catalog(c) => catalog::run(c),
    }
}
