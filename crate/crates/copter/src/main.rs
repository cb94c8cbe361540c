fn main() -> std::process::ExitCode {
    copter::cli::init_logging();
    copter::cli::dispatch(std::env::args_os())
}
