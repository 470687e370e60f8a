//! The acceptance gate: runs every criterion at full scale and prints one
//! pass/fail line per criterion. A separate fast-level run checks the smoke
//! configuration stays within its time budget.

use wrtlab::acceptance::{print_report, run_acceptance_suite, AcceptanceLevel};

#[test]
fn acceptance_full() {
    let report = run_acceptance_suite(AcceptanceLevel::Full, None);
    let mut out = Vec::new();
    print_report(&report, &mut out).unwrap();
    print!("{}", String::from_utf8_lossy(&out));
    assert!(report.pass, "acceptance suite failed; see report above");
}

#[test]
fn acceptance_fast_within_budget() {
    let started = std::time::Instant::now();
    let report = run_acceptance_suite(AcceptanceLevel::Fast, None);
    let elapsed = started.elapsed();
    let mut out = Vec::new();
    print_report(&report, &mut out).unwrap();
    print!("{}", String::from_utf8_lossy(&out));
    assert!(report.pass, "fast acceptance suite failed; see report above");
    assert!(
        elapsed.as_secs_f64() < 300.0,
        "fast level took {:.1}s, budget is 300s",
        elapsed.as_secs_f64()
    );
    // the exact certificates run at every level
    for id in [1usize, 12] {
        let c = report.criteria.iter().find(|c| c.id == id).unwrap();
        assert!(c.pass, "exact criterion {id} must pass at the fast level");
    }
}
