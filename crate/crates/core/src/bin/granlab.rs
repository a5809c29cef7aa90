fn main() {
    std::process::exit(granular_lab::cli::run(std::env::args_os()));
}
