fn main() {
    std::process::exit(pumbo::cli::run(std::env::args_os()));
}
