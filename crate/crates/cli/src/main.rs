use std::process::ExitCode;

fn main() -> ExitCode {
    let matches = qfc_cli::cli::command().get_matches();
    let result = qfc_cli::cli::resolve(&matches)
        .and_then(|inv| qfc_cli::run_with_threads(&inv.config, inv.threads));
    match result {
        Ok(report) => {
            for line in &report.summary {
                println!("{line}");
            }
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
