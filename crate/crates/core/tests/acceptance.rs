//! Runs every acceptance criterion, printing one line each, and fails if any
//! criterion fails.

use pseudomoment::verify::{run, VerifyConfig};

#[test]
fn acceptance_criteria() {
    let report = run(&VerifyConfig::default(), |o| println!("{}", o.line()));
    let failed = report.failures();
    println!(
        "{} of {} criteria passed",
        report.outcomes.len() - failed.len(),
        report.outcomes.len()
    );
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
