fn main() {
    std::process::exit(fragility::cli::run(std::env::args_os()));
}
