fn main() {
    let code = kemeny_cli::run(std::env::args());
    std::process::exit(code);
}
