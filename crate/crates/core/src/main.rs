use clap::Parser;

use anderson::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let code = run(&cli, std::io::stdout().lock());
    std::process::exit(code);
}
