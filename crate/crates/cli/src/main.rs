use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let (code, out) = reducts_cli::run(std::env::args_os());
    // a closed pipe (`| head`) is not an error worth reporting
    let _ = if code == reducts_cli::EXIT_ERROR {
        writeln!(std::io::stderr(), "{out}")
    } else {
        writeln!(std::io::stdout(), "{out}")
    };
    ExitCode::from(code)
}
