fn main() -> std::process::ExitCode {
    fosgd::cli::main_with_args(std::env::args_os())
}
