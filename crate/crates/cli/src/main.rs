fn main() {
    std::process::exit(fracdml_cli::run(std::env::args_os()));
}
