fn main() {
    std::process::exit(mild_ns::cli::run(std::env::args_os()));
}
