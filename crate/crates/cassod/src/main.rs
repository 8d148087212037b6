fn main() {
    std::process::exit(cassod::cli::main());
}
