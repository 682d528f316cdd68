fn main() {
    std::process::exit(metaforecast::cli::run(std::env::args_os()));
}
