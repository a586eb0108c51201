//! Squarefree parts, divisor sums and zeta values.
//!
//! cargo run --example factorization -- 2305843009213693951

use num_bigint::BigInt;
use qtwist::arith::{divisor_power_sum, factorize, squarefree_part, zeta};

fn main() -> qtwist::Result<()> {
    let inputs: Vec<BigInt> = match std::env::args().skip(1).collect::<Vec<_>>() {
        args if !args.is_empty() => args.iter().map(|a| a.parse().expect("an integer")).collect(),
        _ => vec![24.into(), (-8).into(), 9991.into(), "1000006000009000000".parse().unwrap()],
    };
    for n in &inputs {
        let f = factorize(n)?;
        let sq = squarefree_part(n)?;
        let factors: Vec<String> = f.factors.iter().map(|(p, e)| format!("{p}^{e}")).collect();
        println!(
            "{n} = {}{}  ->  s = {}, m = {}, sum_(e|m) e^-2 = {:.6}",
            if f.sign < 0 { "-" } else { "" },
            factors.join(" * "),
            sq.s,
            sq.m,
            divisor_power_sum(&sq.m, 2.0)?
        );
    }
    for w in [2.0, 3.0, 4.0] {
        println!("zeta({w}) = {:.12}", zeta(w, 1e-12)?);
    }
    Ok(())
}
