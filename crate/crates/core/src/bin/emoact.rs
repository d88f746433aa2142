use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let stdin = std::io::stdin();
    let mut stdout = std::io::stdout().lock();
    let mut stderr = std::io::stderr().lock();
    let code = emoact::cli::main_with(
        std::env::args_os(),
        &mut stdin.lock(),
        &mut stdout,
        &mut stderr,
    );
    let _ = stdout.flush();
    ExitCode::from(code as u8)
}
