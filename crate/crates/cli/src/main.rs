use std::io::Write;
use std::process::ExitCode;

use swarmbandit_cli::{parse_args, run_experiment, runner, CliError};

fn main() -> ExitCode {
    let result = parse_args(std::env::args_os()).and_then(|spec| {
        let report = run_experiment(&spec, true)?;
        let summary = runner::summary_csv(&spec, &report);
        std::io::stdout()
            .write_all(summary.as_bytes())
            .map_err(|e| CliError::io("<stdout>".as_ref(), e))?;
        Ok(())
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Clap(e)) => {
            let _ = e.print();
            ExitCode::from(e.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("swarmbandit: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
