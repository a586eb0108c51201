//! Runs the brute-force invariant suite on a curve.
//!
//! cargo run --release --example self_check -- 1,0,-3

use qtwist::cli::{parse_curve, quick_scales};
use qtwist::verify::verify;

fn main() -> qtwist::Result<()> {
    let curve = parse_curve(&std::env::args().nth(1).unwrap_or_else(|| "0,0,-2".into()))?;
    let report = verify(&curve, &quick_scales())?;
    for check in &report.checks {
        let mark = if check.passed { "ok  " } else { "FAIL" };
        println!("{mark} {:<22} {:>7.3}s  {}", check.name, check.seconds, check.detail);
    }
    std::process::exit(i32::from(!report.passed));
}
