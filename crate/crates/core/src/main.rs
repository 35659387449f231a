fn main() {
    std::process::exit(sparsedn::cli::run(std::env::args_os()));
}
