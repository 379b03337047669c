fn main() {
    std::process::exit(wcounts_core::cli::main_with_args(std::env::args_os()));
}
