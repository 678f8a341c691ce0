//! Runs the full cross-validation suite and prints one line per criterion.

use optomech::validate::{run_all, Tweaks};

#[test]
fn acceptance_suite() {
    let results = run_all(&Tweaks::default());
    let mut all_passed = true;
    for r in &results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        println!(
            "criterion {:>2} [{status}] {} ({:.2} s): {}",
            r.id, r.name, r.runtime_s, r.detail
        );
        all_passed &= r.passed;
    }
    assert!(all_passed, "one or more validation criteria failed");
}
