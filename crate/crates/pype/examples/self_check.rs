//! Run the built-in cross-validation sweeps: every fast path is replayed
//! against an independent brute-force reference.
//!
//! Run with: cargo run --example self_check

fn main() {
    let reports = pype::run_all();
    for report in &reports {
        println!("{}", report.summary_line());
    }
    if reports.iter().all(|r| r.passed) {
        println!("all sweeps agree with their references");
    } else {
        std::process::exit(1);
    }
}
