use clap::Parser;

use singscat_cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    let report = execute(&cli);
    for text in &report.stdout {
        println!("{text}");
    }
    for e in &report.errors {
        eprintln!("error: {e}");
    }
    std::process::exit(report.exit_code);
}
