use std::process::ExitCode;

fn main() -> ExitCode {
    chorup::cli::main()
}
