fn main() {
    std::process::exit(molevo::harness::cli::run_cli(std::env::args_os()));
}
