fn main() {
    std::process::exit(latentreg::cli::main_with_args(std::env::args_os()));
}
