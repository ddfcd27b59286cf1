fn main() {
    std::process::exit(pseudomoment_cli::run(std::env::args_os()));
}
