fn main() -> std::process::ExitCode {
    perchlab::cli::main_entry()
}
