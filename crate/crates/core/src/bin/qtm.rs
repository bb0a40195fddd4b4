fn main() {
    std::process::exit(qtm::cli::run_command(std::env::args_os()));
}
