fn main() -> std::process::ExitCode {
    mbsketch::cli::main()
}
