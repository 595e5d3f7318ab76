use std::process::ExitCode;

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let stdout = std::io::stdout();
    match accumtest::cli::run(&argv, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("accumtest: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
