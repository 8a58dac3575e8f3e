fn main() {
    std::process::exit(normcircle_cli::run_from(std::env::args_os()));
}
