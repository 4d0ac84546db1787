fn main() {
    std::process::exit(revolve::cli::main());
}
