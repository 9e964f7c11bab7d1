fn main() -> std::process::ExitCode {
    condcop::cli::main()
}
