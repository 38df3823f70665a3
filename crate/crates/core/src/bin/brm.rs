fn main() -> std::process::ExitCode {
    brm::cli::main()
}
