//! The lattices L_(alpha, d, d') and their shortest vectors, and how a
//! pair (u, v) with t^2 | F(u, v) lands in exactly one of them.
//!
//! cargo run --example lattice_reduction

use qtwist::lattice::{decompose_pair, reduced_lattices_up_to, shortest_vectors};
use qtwist::psi::classify_pair;
use qtwist::Curve;

fn main() -> qtwist::Result<()> {
    let curve = Curve::new(0, 0, -2)?;
    println!("{curve}: lattices with d d' <= 12");
    println!("  {:>5} {:>3} {:>3}  {:>10} {:>10} {:>6} {:>6}", "alpha", "d", "d'", "omega", "omega'", "|w|^2", "in Psi");
    for lat in reduced_lattices_up_to(&curve, 12)? {
        let t = lat.triple;
        println!(
            "  {:>5} {:>3} {:>3}  {:>10} {:>10} {:>6} {:>6}",
            t.alpha,
            t.d,
            t.d_prime,
            format!("{:?}", lat.omega),
            format!("{:?}", lat.omega_prime),
            lat.norm_sq,
            lat.in_psi
        );
    }

    let congruent = Curve::new(0, -1, 0)?;
    let (u, v) = (-4, 5);
    let class = classify_pair(&congruent, u, v)?;
    println!("\n{congruent}: F({u}, {v}) = {} * {}^2", class.d, class.m);
    let m = u64::try_from(&class.m).expect("small");
    for t in (1..=m).filter(|t| m % t == 0) {
        let triple = decompose_pair(&congruent, u, v, t)?;
        let lat = shortest_vectors(&congruent, &triple);
        println!("  t = {t:>2}: {triple:?}, omega = {:?}", lat.omega);
    }
    Ok(())
}
