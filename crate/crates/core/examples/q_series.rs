//! Truncations of the lattice series Q and their per-level subtotals.
//!
//! cargo run --release --example q_series

use qtwist::lattice::q_partial_with;
use qtwist::series::Membership;
use qtwist::Curve;

fn main() -> qtwist::Result<()> {
    for curve in [Curve::new(0, -1, 0)?, Curve::new(0, 0, -2)?] {
        println!("{curve}");
        for membership in [Membership::StrictPsi, Membership::FNonzero] {
            let mut line = Vec::new();
            for b in [1, 10, 100, 1000] {
                let r = q_partial_with(&curve, 1.0, 1.0, b, membership, false)?;
                line.push(format!("B={b}: {:.5} ({} terms, {} ties)", r.value, r.term_count, r.tie_count));
            }
            println!("  {membership:>10}  {}", line.join("  "));
        }
        let r = q_partial_with(&curve, 1.0, 1.0, 12, Membership::StrictPsi, true)?;
        let levels: Vec<String> = r
            .breakdown
            .unwrap_or_default()
            .iter()
            .map(|row| format!("t={}: {:.4}", row.key, row.value))
            .collect();
        println!("  per level: {}\n", levels.join(", "));
    }
    Ok(())
}
