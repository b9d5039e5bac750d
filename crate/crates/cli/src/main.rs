fn main() {
    std::process::exit(csltl_cli::run(std::env::args()));
}
