fn main() {
    std::process::exit(hhbar_cli::run(std::env::args_os()));
}
