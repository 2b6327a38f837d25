mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            log::warn!("could not configure the thread pool: {e}");
        }
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 3 when a numerical routine failed, 2 for everything attributable to input.
fn exit_code(e: &anyhow::Error) -> u8 {
    let numerical = e.chain().any(|c| c.downcast_ref::<gsig::Error>().is_some_and(gsig::Error::is_numerical));
    if numerical {
        3
    } else {
        2
    }
}
