//! Observed short vectors against the random-annulus model, and the
//! growth of sum 4^nu(t).
//!
//! cargo run --release --example annulus_heuristics

use qtwist::heuristics::{heuristic_bound_report, stats_row, AnnulusModel};
use qtwist::lattice::fit_annulus;
use qtwist::series::Membership;
use qtwist::Curve;

fn main() -> qtwist::Result<()> {
    let curve = Curve::new(0, 0, -2)?;
    let fit = fit_annulus(&curve, 40)?;
    println!("{curve}: fitted c1 = {:.4}, c2 = {:.4} over {} lattices", fit.c1, fit.c2, fit.samples);
    let model = AnnulusModel::from_fit(&fit, 1)?;

    println!("\n{:>6} {:>5} {:>9} {:>11} {:>10} {:>10}", "B", "C", "observed", "model mean", "model sd", "log(B)^4");
    for b in [50, 100, 200, 400] {
        for c in [1.5, 3.0] {
            // the fit only sees lattices whose shortest vector has F != 0
            let (row, _) = stats_row(&curve, &model, b, c, Some(Membership::FNonzero))?;
            println!(
                "{:>6} {:>5} {:>9} {:>11.2} {:>10.2} {:>10.1}",
                row.b, row.c, row.observed, row.model_mean, row.model_std, row.log4_reference
            );
        }
    }

    let report = heuristic_bound_report(5.0, 1.0, fit.c1, 1_000_000)?;
    println!("\n{:>9} {:>14} {:>14} {:>12}", "x", "bound partial", "sum 4^nu", "/ x log^3 x");
    for p in &report.checkpoints {
        println!("{:>9} {:>14.6} {:>14} {:>12.5}", p.x, p.bound_partial, p.four_nu_sum, p.four_nu_ratio);
    }
    Ok(())
}
