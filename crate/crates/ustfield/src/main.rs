fn main() {
    std::process::exit(ustfield::cli::main_with(std::env::args().collect()));
}
