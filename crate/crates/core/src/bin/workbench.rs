fn main() -> std::process::ExitCode {
    multiplant::cli::main()
}
