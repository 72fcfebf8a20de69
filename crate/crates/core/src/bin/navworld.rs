fn main() {
    std::process::exit(navworld::cli::main_with_args(std::env::args_os()));
}
