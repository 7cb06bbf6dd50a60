fn main() {
    std::process::exit(critval::cli::run());
}
