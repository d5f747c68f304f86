fn main() {
    std::process::exit(proxemo::cli::main_with_args(std::env::args_os()));
}
