fn main() {
    std::process::exit(efdt::cli::main());
}
