use clap::Parser;

fn main() {
    let cli = pype::cli::Cli::parse();
    std::process::exit(pype::cli::run(cli));
}
