fn main() {
    std::process::exit(symmconv::cli::main_with_args(std::env::args_os()));
}
