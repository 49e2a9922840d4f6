fn main() {
    std::process::exit(plasmon_cli::run_from_args(std::env::args_os()));
}
