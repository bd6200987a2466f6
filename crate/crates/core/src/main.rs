use clap::Parser;

fn main() {
    let code = curvlab::cli::main_with(curvlab::cli::Args::parse());
    std::process::exit(code);
}
