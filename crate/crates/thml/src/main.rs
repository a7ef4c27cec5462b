fn main() {
    std::process::exit(thml::cli::run_main(std::env::args()));
}
