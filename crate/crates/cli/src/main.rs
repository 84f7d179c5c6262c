mod args;
mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::Cli;
use commands::Context;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version go to stdout and succeed; everything else is a usage error.
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            if ok {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{}", e.render().ansi());
            return ExitCode::from(1);
        }
    };
    let ctx = Context { seed: cli.seed, verbose: cli.verbose };
    match commands::run(&ctx, cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("htelog: error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
