use std::process::ExitCode;

use clap::Parser;
use socialnet_cli::{run, Cli, Status};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { Status::Failed.into() } else { Status::Ok.into() };
        }
    };
    run(cli).into()
}
