use clap::Parser;

fn main() {
    let args = cocyclelab::cli::Args::parse();
    std::process::exit(cocyclelab::cli::main_with(args));
}
