fn main() {
    std::process::exit(support_signal::cli::run(std::env::args_os()));
}
