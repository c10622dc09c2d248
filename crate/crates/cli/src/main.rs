fn main() {
    std::process::exit(chorex_cli::run(std::env::args_os()));
}
