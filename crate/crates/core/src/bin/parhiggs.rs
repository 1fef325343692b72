use clap::Parser;

fn main() {
    let cli = parhiggs::cli::Cli::parse();
    std::process::exit(parhiggs::cli::main_with(cli));
}
