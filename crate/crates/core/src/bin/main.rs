fn main() {
    std::process::exit(onebit_detect::cli::run_command(std::env::args_os()));
}
