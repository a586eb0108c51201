//! Truncations of S and R, and the bracket S <= R <= zeta(2k) S.
//!
//! cargo run --release --example series_sandwich

use qtwist::arith::zeta;
use qtwist::series::{r_partial, s_partial, t_bounds, SumParams};
use qtwist::Curve;

fn main() -> qtwist::Result<()> {
    for curve in [Curve::new(0, -1, 0)?, Curve::new(0, 0, -2)?] {
        println!("{curve}");
        println!("  {:>4} {:>4} {:>5} {:>12} {:>12} {:>12}", "j", "k", "N", "S", "R", "zeta(2k) S");
        for (j, k) in [(1.0, 1.0), (2.0, 1.5)] {
            let z = zeta(2.0 * k, 1e-10)?;
            for n in [25, 50, 100, 200] {
                let params = SumParams::new(j, k, n)?;
                let s = s_partial(&curve, &params)?.value;
                let r = r_partial(&curve, &params)?.value;
                println!("  {j:>4} {k:>4} {n:>5} {s:>12.6} {r:>12.6} {:>12.6}", z * s);
            }
        }
        let window = curve.default_broad_window();
        let params = SumParams::new(1.0, 1.0, 100)?.with_window(window.clone());
        let (lo, hi) = t_bounds(&curve, &params)?;
        println!("  window {window}: canonical-height bracket [{lo:.6}, {hi:.6}] at N = 100\n");
    }
    Ok(())
}
