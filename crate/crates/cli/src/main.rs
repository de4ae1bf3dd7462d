fn main() {
    std::process::exit(unpin_cli::run(std::env::args_os()));
}
