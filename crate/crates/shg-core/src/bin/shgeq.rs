fn main() {
    std::process::exit(shg_core::cli::main_with_args(std::env::args_os()));
}
