fn main() {
    std::process::exit(maxdir::cli::run(std::env::args()));
}
