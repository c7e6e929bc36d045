//! Runs the ten acceptance criteria and prints one line per criterion.

use std::process::ExitCode;
use std::time::Instant;

use mathieu_gaps::harness::checks::{acceptance, CRITERIA};

fn main() -> ExitCode {
    let start = Instant::now();
    let mut failed = 0;
    for i in 1..=CRITERIA.len() {
        let t = Instant::now();
        let r = acceptance(i);
        if !r.passed {
            failed += 1;
        }
        println!("{r} [{:.1}s]", t.elapsed().as_secs_f64());
    }
    println!(
        "acceptance: {} of {} criteria passed in {:.1}s",
        CRITERIA.len() - failed,
        CRITERIA.len(),
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
