use std::process::ExitCode;

use hill_spectra::acceptance::run_all;

fn main() -> ExitCode {
    let quick = std::env::args().any(|a| a == "--quick") || std::env::var_os("HILL_SPECTRA_QUICK").is_some();
    let outcomes = run_all(quick, |o| println!("{o}"));
    let failed = outcomes.iter().filter(|o| !o.pass).count();
    println!("acceptance: {} passed, {failed} failed", outcomes.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
