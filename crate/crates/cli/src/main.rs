fn main() {
    std::process::exit(hypervec_cli::cli::main_with_args(std::env::args_os()));
}
