fn main() {
    std::process::exit(orthoglass::cli::main_with_args(std::env::args_os()));
}
