fn main() {
    std::process::exit(uldl_cli::run(std::env::args_os()));
}
