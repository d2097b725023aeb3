use clap::Parser;
use tracing_subscriber::EnvFilter;

fn main() {
    let cli = docspan::Cli::parse();
    let default_level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    let filter =
        EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new(default_level));
    tracing_subscriber::fmt()
        .with_env_filter(filter)
        .with_writer(std::io::stderr)
        .init();

    if let Err(e) = docspan::run(&cli) {
        eprintln!("docspan {}: {e}", cli.command.name());
        std::process::exit(e.exit_code());
    }
}
