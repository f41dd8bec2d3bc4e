use std::io;
use std::process::ExitCode;

use amex_mcts::cli::{dispatch, parse_args};

fn main() -> ExitCode {
    let config = match parse_args(std::env::args()) {
        Ok(config) => config,
        Err(e) => e.exit(),
    };
    let code = dispatch(&config, &mut io::stdout().lock(), &mut io::stderr().lock());
    ExitCode::from(code as u8)
}
