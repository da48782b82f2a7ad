fn main() {
    std::process::exit(taf::cli::run());
}
