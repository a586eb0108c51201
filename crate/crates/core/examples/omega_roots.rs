//! Roots of f modulo d^2, including lifts through singular roots.
//!
//! cargo run --example omega_roots -- 0,-1,0 36

use qtwist::cli::parse_curve;
use qtwist::lattice::omega_d;

fn main() -> qtwist::Result<()> {
    let mut args = std::env::args().skip(1);
    let curve = parse_curve(&args.next().unwrap_or_else(|| "0,-1,0".into()))?;
    let max_d: u64 = args.next().map_or(12, |a| a.parse().expect("bound on d"));
    println!("{curve}");
    for d in 1..=max_d {
        let roots = omega_d(&curve, d)?;
        let shown: Vec<String> = roots.residues.iter().take(12).map(u64::to_string).collect();
        let more = if roots.len() > 12 { ", ..." } else { "" };
        println!("  d = {d:>3}  |Omega| = {:>3}  {{{}{more}}}", roots.len(), shown.join(", "));
    }
    Ok(())
}
