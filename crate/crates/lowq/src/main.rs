fn main() {
    std::process::exit(lowq::cli::main_with(std::env::args_os()));
}
