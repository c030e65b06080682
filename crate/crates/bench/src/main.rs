use clap::Parser;
use synchem_bench::{categorize, execute, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = execute(cli) {
        let category = categorize(&e);
        eprintln!("error[{}]: {e:#}", category.name());
        std::process::exit(category.exit_code());
    }
}
