//! Acceptance criteria 1-10, each run through the suite runner with its
//! runtime limit. Prints one line per criterion.

use std::time::Duration;

use ramond_core::suite::{run_criterion, run_suite, SuiteConfig, SuiteName};

// Criteria without a stated limit get a generous one so a regression into
// pathological runtimes still shows up.
const LIMITS: [(u8, u64); 10] = [
    (1, 1),
    (2, 1),
    (3, 30),
    (4, 30),
    (5, 60),
    (6, 120),
    (7, 60),
    (8, 60),
    (9, 60),
    (10, 300),
];

#[test]
fn acceptance() {
    let config = SuiteConfig::default();
    let mut failures = Vec::new();
    for (criterion, limit) in LIMITS {
        // the property criterion is stated for one full run of every suite
        let report = if criterion == 10 { run_suite(SuiteName::All, &config) } else { run_criterion(criterion, &config) };
        let elapsed = Duration::from_secs_f64(report.seconds);
        let in_time = elapsed < Duration::from_secs(limit);
        let ok = report.passed() && in_time;
        let ids: Vec<&str> =
            report.results.iter().filter(|r| r.criterion == criterion).map(|r| r.id.as_str()).collect();
        println!(
            "criterion {criterion:>2}: {} ({:.2}s, limit {limit}s) [{}]",
            if ok { "pass" } else { "FAIL" },
            report.seconds,
            ids.join(", ")
        );
        for r in report.results.iter().filter(|r| !r.passed) {
            println!("    {}: {}", r.id, r.detail);
        }
        if !ok {
            failures.push(criterion);
        }
    }
    assert!(failures.is_empty(), "failed criteria: {failures:?}");
}
