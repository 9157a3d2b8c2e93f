//! Runs every acceptance criterion at its stated scale and prints one line
//! per criterion.
//!
//! Criterion 7 requires the decomposition inequality in its L1 form, which
//! fails on random instances; the criterion is run as stated and is expected
//! to report FAIL. Its expectation form and the three averaging facts must
//! still hold.

use smallball::constants::Constants;
use smallball::suite::{verify_all, DEFAULT_SEED};

const KNOWN_FAILURE: u32 = 7;

fn main() {
    let run = verify_all(DEFAULT_SEED, &Constants::embedded(), |r| {
        println!(
            "criterion {:>2}: {} {} [{:.2}s{}] {}",
            r.report.id,
            if r.report.pass { "PASS" } else { "FAIL" },
            r.report.name,
            r.elapsed.as_secs_f64(),
            if r.within_limit() { "" } else { ", over limit" },
            r.report.detail
        );
    });
    println!("suite runtime {:.2}s", run.elapsed.as_secs_f64());

    let report = run.report();
    assert_eq!(report.criteria.len(), 13);
    for c in &report.criteria {
        if c.id == KNOWN_FAILURE {
            assert!(!c.pass, "criterion 7 unexpectedly passed: {}", c.detail);
            assert!(c.detail.contains("(violated); expectation form"), "{}", c.detail);
            assert!(c.detail.contains("(holds); averaging facts"), "{}", c.detail);
            assert!(c.detail.ends_with("(hold)"), "{}", c.detail);
        } else {
            assert!(c.pass, "criterion {} failed: {}", c.id, c.detail);
        }
    }
    for r in &run.runs {
        assert!(r.within_limit(), "criterion {} took {:?}", r.report.id, r.elapsed);
    }
    assert!(run.within_limits());
}
