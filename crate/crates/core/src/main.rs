fn main() {
    std::process::exit(ecq_core::cli::main_with_args(std::env::args_os()));
}
