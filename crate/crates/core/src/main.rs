use std::process::ExitCode;

fn main() -> ExitCode {
    bernoulli_dynamics::cli::main()
}
