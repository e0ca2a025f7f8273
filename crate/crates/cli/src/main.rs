use clap::Parser;
use ignli_cli::{run, Cli};

fn main() {
    std::process::exit(run(Cli::parse()));
}
