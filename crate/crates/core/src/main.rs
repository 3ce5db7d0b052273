fn main() {
    std::process::exit(jrsa_core::cli::run(std::env::args_os()));
}
