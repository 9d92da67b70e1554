fn main() {
    std::process::exit(monores::cli::main_with_args(std::env::args_os()));
}
