use std::process::ExitCode;

fn main() -> ExitCode {
    let result = lorlab_cli::configure_threads()
        .and_then(|()| lorlab_cli::run(std::env::args().collect(), &mut std::io::stdout().lock()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = e.to_string();
            eprintln!("lorlab: {}", msg.trim_end());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
