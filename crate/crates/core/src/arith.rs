//! Exact integer arithmetic: factorization, squarefree parts, divisor power
//! sums and values of the Riemann zeta function.
//!
//! Integers that fit in a `u64` take a native path (trial division, then
//! Brent's variant of Pollard rho with a deterministic Miller-Rabin test).
//! Larger integers run the same algorithms on `BigUint`.

use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::kahan::KahanSum;

/// Trial division runs over all primes below this bound before Pollard rho.
pub const TRIAL_BOUND: u64 = 10_000;

/// Bases for Miller-Rabin. Deterministic for every n < 3.3e24, which covers
/// all of `u64`.
const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = TRIAL_BOUND as usize;
        let mut composite = vec![false; n + 1];
        let mut primes = Vec::new();
        for i in 2..=n {
            if !composite[i] {
                primes.push(i as u64);
                let mut j = i * i;
                while j <= n {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        primes
    })
}

/// Prime factorization `n = sign * prod(p^e)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub sign: i8,
    /// Primes strictly increasing, exponents positive.
    pub factors: Vec<(BigUint, u32)>,
}

impl Factorization {
    /// Number of distinct prime divisors.
    pub fn nu(&self) -> usize {
        self.factors.len()
    }

    pub fn reconstruct(&self) -> BigInt {
        let magnitude = self
            .factors
            .iter()
            .fold(BigUint::one(), |acc, (p, e)| acc * p.pow(*e));
        if self.sign < 0 {
            -BigInt::from(magnitude)
        } else {
            BigInt::from(magnitude)
        }
    }

    pub fn squarefree(&self) -> SquarefreeDecomposition {
        let mut s = BigUint::one();
        let mut m = BigUint::one();
        for (p, e) in &self.factors {
            if e % 2 == 1 {
                s *= p;
            }
            if *e >= 2 {
                m *= p.pow(e / 2);
            }
        }
        let sign = if self.sign < 0 { Sign::Minus } else { Sign::Plus };
        SquarefreeDecomposition {
            s: BigInt::from_biguint(sign, s),
            m,
        }
    }

    /// Factorization of the square cofactor `m` where `n = s * m^2`.
    pub fn square_root_factors(&self) -> Vec<(BigUint, u32)> {
        self.factors
            .iter()
            .filter(|(_, e)| *e >= 2)
            .map(|(p, e)| (p.clone(), e / 2))
            .collect()
    }

    fn from_u64_factors(sign: i8, factors: Vec<(u64, u32)>) -> Self {
        Factorization {
            sign,
            factors: factors
                .into_iter()
                .map(|(p, e)| (BigUint::from(p), e))
                .collect(),
        }
    }
}

/// `n = s * m^2` with `s` squarefree and carrying the sign of `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquarefreeDecomposition {
    pub s: BigInt,
    pub m: BigUint,
}

pub fn factorize(n: &BigInt) -> Result<Factorization> {
    if n.is_zero() {
        return Err(Error::Zero);
    }
    let sign = if n.sign() == Sign::Minus { -1 } else { 1 };
    let magnitude = n.magnitude();
    if let Some(small) = magnitude.to_u64() {
        return Ok(Factorization::from_u64_factors(sign, factorize_u64(small)));
    }
    Ok(Factorization {
        sign,
        factors: factorize_biguint(magnitude.clone()),
    })
}

pub fn squarefree_part(n: &BigInt) -> Result<SquarefreeDecomposition> {
    factorize(n).map(|f| f.squarefree())
}

/// Factorization of a positive `u64`; returns an empty list for 1.
pub fn factorize_u64(mut n: u64) -> Vec<(u64, u32)> {
    assert!(n > 0, "factorize_u64 of zero");
    let mut out = Vec::new();
    for &p in small_primes() {
        if p * p > n {
            break;
        }
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    if n > 1 {
        let mut large = Vec::new();
        split_u64(n, &mut large);
        large.sort_unstable();
        for p in large {
            match out.last_mut() {
                Some((q, e)) if *q == p => *e += 1,
                _ => out.push((p, 1)),
            }
        }
    }
    out
}

fn split_u64(n: u64, primes: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if n < TRIAL_BOUND * TRIAL_BOUND || is_prime_u64(n) {
        primes.push(n);
        return;
    }
    let d = pollard_brent_u64(n);
    split_u64(d, primes);
    split_u64(n / d, primes);
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &MR_BASES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'bases: for &a in &MR_BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Nontrivial factor of an odd composite. Increments `c = 1, 2, ...` are
/// tried in order so the result is reproducible.
fn pollard_brent_u64(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    const BATCH: u64 = 128;
    for c in 1..n {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut x, mut y, mut ys) = (2u64, 2u64, 2u64);
        let mut g = 1;
        let mut r = 1u64;
        let mut q = 1u64;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = q.gcd(&n);
                k += BATCH;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = x.abs_diff(ys).gcd(&n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!("no factor found for composite {n}")
}

fn factorize_biguint(mut n: BigUint) -> Vec<(BigUint, u32)> {
    let mut out: Vec<(BigUint, u32)> = Vec::new();
    for &p in small_primes() {
        let pb = BigUint::from(p);
        if &pb * &pb > n {
            break;
        }
        let mut e = 0;
        loop {
            let (q, r) = n.div_rem(&pb);
            if !r.is_zero() {
                break;
            }
            n = q;
            e += 1;
        }
        if e > 0 {
            out.push((pb, e));
        }
    }
    if !n.is_one() {
        if let Some(small) = n.to_u64() {
            for (p, e) in factorize_u64(small) {
                out.push((BigUint::from(p), e));
            }
        } else {
            let mut large = Vec::new();
            split_biguint(n, &mut large);
            large.sort();
            for p in large {
                match out.last_mut() {
                    Some((q, e)) if *q == p => *e += 1,
                    _ => out.push((p, 1)),
                }
            }
        }
    }
    out
}

fn split_biguint(n: BigUint, primes: &mut Vec<BigUint>) {
    if n.is_one() {
        return;
    }
    if let Some(small) = n.to_u64() {
        let mut tmp = Vec::new();
        split_u64(small, &mut tmp);
        primes.extend(tmp.into_iter().map(BigUint::from));
        return;
    }
    if is_probable_prime(&n) {
        primes.push(n);
        return;
    }
    // rho needs about sqrt(p) steps to split p^e, so peel perfect powers first
    if let Some((root, e)) = perfect_power(&n) {
        let mut inner = Vec::new();
        split_biguint(root, &mut inner);
        for _ in 0..e {
            primes.extend(inner.iter().cloned());
        }
        return;
    }
    let d = pollard_brent_biguint(&n);
    let rest = &n / &d;
    split_biguint(d, primes);
    split_biguint(rest, primes);
}

/// Miller-Rabin over the fixed bases in `MR_BASES`; deterministic below
/// 3.3e24 and a strong probable-prime test above.
pub fn is_probable_prime(n: &BigUint) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    if n.is_even() {
        return false;
    }
    let one = BigUint::one();
    let n_minus_one = n - &one;
    let s = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> s;
    'bases: for &a in &MR_BASES {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x == one || x == n_minus_one {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == n_minus_one {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// `(r, e)` with `r^e = n` and `e >= 2` maximal among prime exponents
/// tried, when `n` (free of primes below the trial bound) is a power.
fn perfect_power(n: &BigUint) -> Option<(BigUint, u32)> {
    let max_e = (n.bits() / 13) as u32;
    for e in (2..=max_e).filter(|&e| is_prime_u64(e as u64)) {
        let r = n.nth_root(e);
        if r.pow(e) == *n {
            return Some((r, e));
        }
    }
    None
}

fn abs_diff_big(a: &BigUint, b: &BigUint) -> BigUint {
    if a > b {
        a - b
    } else {
        b - a
    }
}

fn pollard_brent_biguint(n: &BigUint) -> BigUint {
    if n.is_even() {
        return BigUint::from(2u32);
    }
    const BATCH: u64 = 128;
    let mut c = BigUint::one();
    loop {
        let f = |x: &BigUint| (x * x + &c) % n;
        let two = BigUint::from(2u32);
        let (mut x, mut y, mut ys) = (two.clone(), two.clone(), two);
        let mut g = BigUint::one();
        let mut r = 1u64;
        let mut q = BigUint::one();
        while g.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                ys = y.clone();
                for _ in 0..BATCH.min(r - k) {
                    y = f(&y);
                    q = (q * abs_diff_big(&x, &y)) % n;
                }
                g = q.gcd(n);
                k += BATCH;
            }
            r *= 2;
        }
        if &g == n {
            loop {
                ys = f(&ys);
                g = abs_diff_big(&x, &ys).gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if &g != n {
            return g;
        }
        c += 1u32;
    }
}

/// Number of distinct prime divisors of `d >= 1`.
pub fn nu(d: u64) -> usize {
    factorize_u64(d).len()
}

/// `sum_{e | m} e^(-w)` for `m >= 1`, `w > 0`.
pub fn divisor_power_sum(m: &BigUint, w: f64) -> Result<f64> {
    if m.is_zero() {
        return Err(Error::param("m", "must be at least 1"));
    }
    let n = BigInt::from(m.clone());
    let factors = factorize(&n)?.factors;
    divisor_power_sum_factored(&factors, w)
}

/// Same as [`divisor_power_sum`] from a known factorization of `m`.
///
/// Evaluated as the Euler product `prod_p (1 + p^-w + ... + p^-(e w))`.
pub fn divisor_power_sum_factored(factors: &[(BigUint, u32)], w: f64) -> Result<f64> {
    if !(w > 0.0 && w.is_finite()) {
        return Err(Error::param("w", format!("{w} is not a positive real")));
    }
    let mut total = 1.0;
    for (p, e) in factors {
        let ratio = biguint_to_f64(p).powf(-w);
        let mut local = 1.0;
        let mut power = 1.0;
        for _ in 0..*e {
            power *= ratio;
            local += power;
        }
        total *= local;
    }
    Ok(total)
}

pub(crate) fn biguint_to_f64(n: &BigUint) -> f64 {
    n.to_f64().unwrap_or(f64::INFINITY)
}

/// Enclosure of `zeta(w)` from a partial sum of `terms` terms and the
/// integral tail bounds `int_{M+1}^inf` and `int_M^inf` of `x^-w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaBracket {
    pub terms: u64,
    pub partial: f64,
    pub lower: f64,
    pub upper: f64,
}

impl ZetaBracket {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

pub fn zeta_bracket(w: f64, terms: u64) -> Result<ZetaBracket> {
    if !(w > 1.0) || !w.is_finite() {
        return Err(Error::param("w", format!("zeta({w}) diverges; need w > 1")));
    }
    if terms == 0 {
        return Err(Error::param("terms", "need at least one term"));
    }
    // smallest terms first
    let mut acc = KahanSum::new();
    for n in (1..=terms).rev() {
        acc.add((n as f64).powf(-w));
    }
    let partial = acc.value();
    let m = terms as f64;
    let tail_hi = m.powf(1.0 - w) / (w - 1.0);
    let tail_lo = (m + 1.0).powf(1.0 - w) / (w - 1.0);
    Ok(ZetaBracket {
        terms,
        partial,
        lower: partial + tail_lo,
        upper: partial + tail_hi,
    })
}

/// `zeta(w)` for real `w > 1`, accurate to `tol`.
///
/// The truncation point doubles until the tail enclosure has width at most
/// `2 tol`; the midpoint of the enclosure is returned. Tolerances below
/// roughly `1e-15` are limited by binary64 rounding of the partial sum.
pub fn zeta(w: f64, tol: f64) -> Result<f64> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::param("tol", format!("{tol} is not a positive real")));
    }
    if !(w > 1.0) || !w.is_finite() {
        return Err(Error::param("w", format!("zeta({w}) diverges; need w > 1")));
    }
    const MAX_TERMS: u64 = 1 << 27;
    let width = |m: f64| (m.powf(1.0 - w) - (m + 1.0).powf(1.0 - w)) / (w - 1.0);
    let mut terms = 16u64;
    while width(terms as f64) > 2.0 * tol {
        if terms >= MAX_TERMS {
            return Err(Error::param(
                "tol",
                format!("{tol} needs more than {MAX_TERMS} terms at w = {w}"),
            ));
        }
        terms *= 2;
    }
    Ok(zeta_bracket(w, terms)?.midpoint())
}

/// Integer square root of `n`, or `None` when `n` is not a perfect square.
pub fn exact_sqrt_u128(n: u128) -> Option<u128> {
    let r = isqrt_u128(n);
    (r * r == n).then_some(r)
}

pub fn isqrt_u128(n: u128) -> u128 {
    if n < 2 {
        return n;
    }
    let mut x = (n as f64).sqrt() as u128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// Inverse of `a` modulo `m`, if it exists.
pub fn inverse_mod(a: i128, m: u128) -> Option<u128> {
    if m == 1 {
        return Some(0);
    }
    let m_i = m as i128;
    let ext = a.rem_euclid(m_i).extended_gcd(&m_i);
    (ext.gcd == 1).then(|| ext.x.rem_euclid(m_i) as u128)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(n: i64) -> BigInt {
        BigInt::from(n)
    }

    fn as_pairs(f: &Factorization) -> Vec<(u64, u32)> {
        f.factors
            .iter()
            .map(|(p, e)| (p.to_u64().unwrap(), *e))
            .collect()
    }

    #[test]
    fn factorize_small_values() {
        let f = factorize(&big(24)).unwrap();
        assert_eq!(as_pairs(&f), vec![(2, 3), (3, 1)]);
        assert_eq!(f.sign, 1);

        let one = factorize(&big(1)).unwrap();
        assert!(one.factors.is_empty());
        assert_eq!(one.sign, 1);

        assert_eq!(as_pairs(&factorize(&big(9991)).unwrap()), vec![(97, 1), (103, 1)]);
        assert_eq!(factorize(&big(0)), Err(Error::Zero));
    }

    #[test]
    fn factorize_beyond_trial_bound() {
        // 1000003 * 1000033, both prime
        let n = 1_000_003u64 * 1_000_033;
        assert_eq!(factorize_u64(n), vec![(1_000_003, 1), (1_000_033, 1)]);
        // (2^61 - 1) is prime; its square overflows u64
        let p = BigUint::from((1u64 << 61) - 1);
        let n = BigInt::from(&p * &p * BigUint::from(12u32));
        let f = factorize(&-n.clone()).unwrap();
        assert_eq!(f.sign, -1);
        assert_eq!(f.factors.len(), 3);
        assert_eq!(f.factors[2], (p, 2));
        assert_eq!(f.reconstruct(), -n);
    }

    #[test]
    fn factorize_product_of_large_primes_in_biguint() {
        let p = BigUint::from(4_294_967_311u64);
        let q = BigUint::from(4_294_967_357u64);
        let r = BigUint::from(1_000_000_007u64);
        let n = BigInt::from(&p * &q * &r);
        let f = factorize(&n).unwrap();
        assert_eq!(f.factors, vec![(r, 1), (p, 1), (q, 1)]);
    }

    #[test]
    fn squarefree_examples() {
        let d = squarefree_part(&big(24)).unwrap();
        assert_eq!((d.s, d.m), (big(6), BigUint::from(2u32)));
        let d = squarefree_part(&big(1)).unwrap();
        assert_eq!((d.s, d.m), (big(1), BigUint::one()));
        let d = squarefree_part(&big(-8)).unwrap();
        assert_eq!((d.s, d.m), (big(-2), BigUint::from(2u32)));
        assert_eq!(squarefree_part(&big(0)), Err(Error::Zero));
    }

    #[test]
    fn divisor_power_sum_examples() {
        let ds = |m: u32| divisor_power_sum(&BigUint::from(m), 2.0).unwrap();
        assert_eq!(ds(1), 1.0);
        assert_eq!(ds(2), 1.25);
        let expected = 1.0 + 0.25 + 1.0 / 9.0 + 1.0 / 36.0;
        assert!((ds(6) - expected).abs() < 1e-15);
        assert!(divisor_power_sum(&BigUint::zero(), 2.0).is_err());
        assert!(divisor_power_sum(&BigUint::one(), 0.0).is_err());
    }

    #[test]
    fn zeta_known_constants() {
        let pi = std::f64::consts::PI;
        assert!((zeta(2.0, 1e-12).unwrap() - pi * pi / 6.0).abs() < 1e-12);
        assert!((zeta(4.0, 1e-12).unwrap() - pi.powi(4) / 90.0).abs() < 1e-12);
        assert!((zeta(3.0, 1e-12).unwrap() - 1.202_056_903_159_594_3).abs() < 1e-12);
        assert!(zeta(1.0, 1e-6).is_err());
        assert!(zeta(0.5, 1e-6).is_err());
    }

    #[test]
    fn zeta_bracket_encloses_value_at_several_cutoffs() {
        let exact = std::f64::consts::PI.powi(2) / 6.0;
        let mut previous_width = f64::INFINITY;
        for m in [1u64, 10, 100, 1000, 10_000] {
            let b = zeta_bracket(2.0, m).unwrap();
            assert!(b.partial <= exact);
            assert!(b.lower <= exact + 1e-15 && exact <= b.upper + 1e-15, "m = {m}");
            let width = b.upper - b.lower;
            assert!(width < previous_width);
            previous_width = width;
        }
    }

    #[test]
    fn zeta_improves_as_tolerance_shrinks() {
        let exact = std::f64::consts::PI.powi(4) / 90.0;
        let mut last = f64::INFINITY;
        for tol in [1e-3, 1e-6, 1e-9, 1e-12] {
            let err = (zeta(4.0, tol).unwrap() - exact).abs();
            assert!(err <= tol);
            assert!(err <= last);
            last = err;
        }
    }

    #[test]
    fn nu_and_inverse() {
        assert_eq!(nu(1), 0);
        assert_eq!(nu(60), 3);
        assert_eq!(inverse_mod(3, 25), Some(17));
        assert_eq!(inverse_mod(5, 25), None);
        assert_eq!(inverse_mod(-1, 4), Some(3));
        assert_eq!(exact_sqrt_u128(25), Some(5));
        assert_eq!(exact_sqrt_u128(24), None);
    }

    fn trial_division(mut n: u64) -> Vec<(u64, u32)> {
        let mut out = Vec::new();
        let mut p = 2;
        while p * p <= n {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            if e > 0 {
                out.push((p, e));
            }
            p += 1;
        }
        if n > 1 {
            out.push((n, 1));
        }
        out
    }

    proptest! {
        #[test]
        fn factorization_matches_trial_division(n in 1u64..5_000_000) {
            prop_assert_eq!(factorize_u64(n), trial_division(n));
        }

        #[test]
        fn factorization_reconstructs(n in any::<i64>().prop_filter("nonzero", |n| *n != 0)) {
            let f = factorize(&big(n)).unwrap();
            prop_assert_eq!(f.reconstruct(), big(n));
            for w in f.factors.windows(2) {
                prop_assert!(w[0].0 < w[1].0);
            }
            for (p, e) in &f.factors {
                prop_assert!(*e > 0);
                prop_assert!(is_probable_prime(p));
            }
        }

        #[test]
        fn squarefree_part_is_multiplicative_on_coprimes(a in 1i64..1_000_000, b in 1i64..1_000_000) {
            prop_assume!(a.gcd(&b) == 1);
            let sa = squarefree_part(&big(a)).unwrap().s;
            let sb = squarefree_part(&big(b)).unwrap().s;
            let sab = squarefree_part(&(big(a) * big(b))).unwrap().s;
            prop_assert_eq!(sab, sa * sb);
        }

        #[test]
        fn squarefree_part_ignores_square_factors(n in -1_000_000i64..1_000_000, k in 1i64..2000) {
            prop_assume!(n != 0);
            let d = squarefree_part(&big(n)).unwrap();
            let dk = squarefree_part(&(big(n) * big(k) * big(k))).unwrap();
            prop_assert_eq!(&d.s, &dk.s);
            prop_assert_eq!(BigInt::from(d.m.clone()) * BigInt::from(d.m) * &d.s, big(n));
            for (_, e) in factorize(&d.s).unwrap().factors {
                prop_assert_eq!(e, 1);
            }
        }

        #[test]
        fn nu_is_at_most_log2(d in 2u64..10_000_000) {
            prop_assert!((nu(d) as f64) <= (d as f64).log2());
        }

        #[test]
        fn divisor_power_sum_is_between_one_and_zeta(m in 1u32..100_000) {
            let value = divisor_power_sum(&BigUint::from(m), 2.0).unwrap();
            let direct: f64 = (1..=m).filter(|e| m % e == 0).map(|e| (e as f64).powi(-2)).sum();
            prop_assert!((value - direct).abs() < 1e-13);
            prop_assert!(value >= 1.0);
            prop_assert!(value < std::f64::consts::PI.powi(2) / 6.0);
            prop_assert_eq!(value == 1.0, m == 1);
        }
    }
}
