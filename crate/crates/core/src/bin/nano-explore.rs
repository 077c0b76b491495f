fn main() {
    std::process::exit(nano_explore::cli::main_with_args(std::env::args_os()));
}
