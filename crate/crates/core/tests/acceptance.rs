//! Acceptance battery: runs every criterion at its pinned tolerance and
//! prints one pass/fail line per criterion.

use fockbench_core::suite;

#[test]
fn acceptance_battery() {
    let mut all_ok = true;
    let mut lines = Vec::new();
    for (id, _name) in suite::CRITERIA {
        let start = std::time::Instant::now();
        let report = suite::run_criterion(id).expect("criterion ran");
        let line = format!("{} ({:.1}s)", report.summary(), start.elapsed().as_secs_f64());
        println!("{line}");
        if !report.passed {
            all_ok = false;
        }
        lines.push(line);
    }
    assert!(all_ok, "acceptance failures:\n{}", lines.join("\n"));
}
