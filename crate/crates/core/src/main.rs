fn main() {
    std::process::exit(hyperquant::cli::run(std::env::args_os()));
}
