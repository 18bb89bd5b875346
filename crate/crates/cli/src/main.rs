use clap::Parser;
use enclose_cli::{run, Cli};

fn main() {
    env_logger::init();
    let cli = Cli::parse();
    std::process::exit(run(&cli));
}
