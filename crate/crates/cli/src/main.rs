fn main() {
    std::process::exit(hbnoma_cli::run_cli(std::env::args_os()));
}
