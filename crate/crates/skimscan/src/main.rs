use clap::Parser;

fn main() {
    let cli = skimscan::cli::Cli::parse();
    if let Err(e) = skimscan::cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
