fn main() -> std::process::ExitCode {
    refgov::cli::run(std::env::args_os())
}
