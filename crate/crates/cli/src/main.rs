mod args;
mod commands;
mod io;

use clap::Parser;

/// 2 input error, 3 numerical failure, 4 invariant violation or anything unexpected.
fn exit_code(e: &anyhow::Error) -> i32 {
    for cause in e.chain() {
        if cause.is::<io::InvariantViolation>() {
            return 4;
        }
        if let Some(ge) = cause.downcast_ref::<gammabs::Error>() {
            let mut root = ge;
            while let gammabs::Error::Context { source, .. } = root {
                root = source;
            }
            return match root {
                gammabs::Error::Pole { .. } | gammabs::Error::Singularity { .. } => 3,
                r if r.is_numerical() => 3,
                _ => 2,
            };
        }
        if cause.is::<io::InputError>() || cause.is::<std::io::Error>() || cause.is::<csv::Error>() || cause.is::<serde_json::Error>() {
            return 2;
        }
    }
    4
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = args::Cli::parse();
    let code = match commands::run(cli.global, cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e:#}");
            exit_code(&e)
        }
    };
    std::process::exit(code);
}
