fn main() {
    std::process::exit(bfw::cli::run_with_args(std::env::args_os()));
}
