//! Which twists D y^2 = x^3 - x pick up points with small x?
//!
//! Every coprime (u, v) in the box gives x = u/v on the twist by the
//! squarefree part of F(u, v); D = 5, 6, 7 appear, 1, 2, 3 never do.
//!
//! cargo run --release --example twist_mining -- 500

use qtwist::psi::{rank_mine, RankRow};
use qtwist::Curve;

fn main() -> qtwist::Result<()> {
    let n: u64 = std::env::args().nth(1).map_or(200, |a| a.parse().expect("box bound"));
    let curve = Curve::new(0, -1, 0)?;
    let hist = rank_mine(&curve, n, None, 3)?;
    println!("{curve}, box N = {n}: {} pairs over {} twists", hist.total(), hist.distinct());

    println!("\nmost frequent twists:");
    for entry in hist.top(8) {
        let row = RankRow::from_entry(&curve, entry)?;
        let p = &row.sample_points[0];
        println!("  D = {:>8}  count {:>3}  e.g. x = {}, y = {}", row.d, row.count, p.x, p.y);
    }

    println!("\nsmall D:");
    for d in 1..=7 {
        let witnesses = hist.get(&d.into()).map(|e| e.witnesses.clone()).unwrap_or_default();
        println!("  D = {d}: {:>3} pairs, first {:?}", hist.count(d), witnesses.first());
    }
    Ok(())
}
