use clap::Parser;
use hodgedirac::cli::{run, RunConfig};

fn main() {
    let config = RunConfig::parse();
    let stdout = std::io::stdout();
    if let Err(e) = run(&config, &mut stdout.lock()) {
        eprintln!("{}", e.diagnostic());
        std::process::exit(e.exit_code());
    }
}
