//! Runs every acceptance criterion and prints one PASS/FAIL line for each.
//! Exits non-zero when any criterion fails. `--only 3,7` restricts the run.

use std::process::ExitCode;

use pca_core::verify::{run_check, CHECKS};

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let only: Option<Vec<u8>> = args
        .iter()
        .position(|a| a == "--only")
        .and_then(|i| args.get(i + 1))
        .map(|list| {
            list.split(',')
                .filter_map(|s| s.trim().parse().ok())
                .collect()
        });
    // libtest flags such as --list are accepted and ignored
    if args.iter().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut failed = 0;
    for id in 1..=CHECKS.len() as u8 {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let report = run_check(id);
        println!("{report}");
        failed += usize::from(!report.passed);
    }
    println!("acceptance: {failed} failing");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
