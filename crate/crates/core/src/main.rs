fn main() {
    std::process::exit(qbatt::cli::run());
}
