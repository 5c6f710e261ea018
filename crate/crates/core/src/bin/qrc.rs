fn main() {
    std::process::exit(qrc_core::cli::run_command(std::env::args_os()));
}
