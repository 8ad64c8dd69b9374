use clap::Parser;

fn main() {
    let cli = waffle::cli::Cli::parse();
    if let Err(e) = waffle::cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
