fn main() {
    std::process::exit(bekolle::cli::run());
}
