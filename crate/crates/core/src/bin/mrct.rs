fn main() {
    std::process::exit(mrct::cli::main());
}
