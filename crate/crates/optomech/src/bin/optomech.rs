fn main() {
    std::process::exit(optomech::cli::run());
}
