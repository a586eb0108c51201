//! The curve `y^2 = f(x)` with `f(x) = x^3 + a x^2 + b x + c`, its binary
//! quartic form `F(u, v) = v^4 f(u/v)`, naive heights and real-line windows.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Tolerance used when refining the real roots of `f`.
pub const ROOT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    a: i64,
    b: i64,
    c: i64,
    /// Real roots of `f` in increasing order; one or three entries.
    real_roots: Vec<f64>,
}

impl Curve {
    /// Validates that `f` has three distinct complex roots and locates its
    /// real roots.
    pub fn new(a: i64, b: i64, c: i64) -> Result<Self> {
        let mut curve = Curve {
            a,
            b,
            c,
            real_roots: Vec::new(),
        };
        let disc = curve.discriminant();
        if disc.is_zero() {
            return Err(Error::RepeatedRoot { a, b, c });
        }
        curve.real_roots = curve.locate_real_roots(disc.is_positive());
        Ok(curve)
    }

    pub fn coefficients(&self) -> (i64, i64, i64) {
        (self.a, self.b, self.c)
    }

    /// `18abc - 4a^3 c + a^2 b^2 - 4b^3 - 27c^2`.
    pub fn discriminant(&self) -> BigInt {
        let (a, b, c) = (BigInt::from(self.a), BigInt::from(self.b), BigInt::from(self.c));
        BigInt::from(18) * &a * &b * &c - BigInt::from(4) * a.pow(3) * &c + a.pow(2) * b.pow(2)
            - BigInt::from(4) * b.pow(3)
            - BigInt::from(27) * c.pow(2)
    }

    pub fn real_roots(&self) -> &[f64] {
        &self.real_roots
    }

    pub fn real_root_count(&self) -> usize {
        self.real_roots.len()
    }

    pub fn e_min(&self) -> f64 {
        self.real_roots[0]
    }

    pub fn e_max(&self) -> f64 {
        *self.real_roots.last().expect("a cubic has a real root")
    }

    pub fn f(&self, x: f64) -> f64 {
        ((x + self.a as f64) * x + self.b as f64) * x + self.c as f64
    }

    fn f_prime(&self, x: f64) -> f64 {
        (3.0 * x + 2.0 * self.a as f64) * x + self.b as f64
    }

    pub fn f_integer(&self, x: i64) -> BigInt {
        let x = BigInt::from(x);
        ((&x + self.a) * &x + self.b) * &x + self.c
    }

    pub fn f_rational(&self, x: &BigRational) -> BigRational {
        let coeff = |n: i64| BigRational::from_integer(BigInt::from(n));
        ((x + coeff(self.a)) * x + coeff(self.b)) * x + coeff(self.c)
    }

    /// `f(x) mod m` for `m < 2^63`.
    pub fn f_mod(&self, x: u128, m: u128) -> u128 {
        let reduce = |n: i64| (n as i128).rem_euclid(m as i128) as u128;
        let x = x % m;
        let mut acc = (x + reduce(self.a)) % m;
        acc = (acc * x % m + reduce(self.b)) % m;
        (acc * x % m + reduce(self.c)) % m
    }

    /// `f'(x) mod m` for `m < 2^63`.
    pub fn f_prime_mod(&self, x: u128, m: u128) -> u128 {
        let reduce = |n: i64| (n as i128).rem_euclid(m as i128) as u128;
        let x = x % m;
        let acc = (3 * x % m + 2 * reduce(self.a)) % m;
        (acc * x % m + reduce(self.b)) % m
    }

    /// `u^3 + a u^2 v + b u v^2 + c v^3 = v^3 f(u/v)`.
    pub fn cubic_part(&self, u: i64, v: i64) -> BigInt {
        if let Some(g) = self.cubic_part_i128(u, v) {
            return BigInt::from(g);
        }
        let (u, v) = (BigInt::from(u), BigInt::from(v));
        ((&u + &v * self.a) * &u + &v * &v * self.b) * &u + v.pow(3) * self.c
    }

    pub(crate) fn cubic_part_i128(&self, u: i64, v: i64) -> Option<i128> {
        let (u, v) = (u as i128, v as i128);
        let v2 = v.checked_mul(v)?;
        let v3 = v2.checked_mul(v)?;
        let t = u.checked_add(v.checked_mul(self.a as i128)?)?;
        let t = t.checked_mul(u)?.checked_add(v2.checked_mul(self.b as i128)?)?;
        t.checked_mul(u)?.checked_add(v3.checked_mul(self.c as i128)?)
    }

    /// `F(u, v) = v (u^3 + a u^2 v + b u v^2 + c v^3)`, exact.
    pub fn eval_form(&self, u: i64, v: i64) -> BigInt {
        if let Some(g) = self.cubic_part_i128(u, v) {
            if let Some(f) = g.checked_mul(v as i128) {
                return BigInt::from(f);
            }
        }
        self.cubic_part(u, v) * v
    }

    /// The window `(e_min - 2, e_min - 1) U (e_max + 1, e_max + 2)`: broad,
    /// bounded, and at distance at least one from every real root of `f`.
    pub fn default_broad_window(&self) -> WindowX {
        let lo = Interval::open(
            Endpoint::floor_grid(self.e_min() - 2.0),
            Endpoint::ceil_grid(self.e_min() - 1.0),
        );
        let hi = Interval::open(
            Endpoint::floor_grid(self.e_max() + 1.0),
            Endpoint::ceil_grid(self.e_max() + 2.0),
        );
        WindowX::new(vec![lo, hi]).expect("default window intervals are disjoint")
    }

    fn locate_real_roots(&self, three_real: bool) -> Vec<f64> {
        let bound = 1.0 + [self.a, self.b, self.c]
            .iter()
            .map(|n| n.unsigned_abs() as f64)
            .fold(0.0, f64::max);
        let roots = if three_real {
            // f' has two real zeros separating the three roots
            let (a, b) = (self.a as f64, self.b as f64);
            let sq = (4.0 * a * a - 12.0 * b).sqrt();
            let c1 = (-2.0 * a - sq) / 6.0;
            let c2 = (-2.0 * a + sq) / 6.0;
            vec![
                self.bisect(-bound, c1),
                self.bisect(c1, c2),
                self.bisect(c2, bound),
            ]
        } else {
            vec![self.bisect(-bound, bound)]
        };
        roots.into_iter().map(|r| self.snap_integer_root(r)).collect()
    }

    /// Root of `f` in `[lo, hi]`, given a sign change across the bracket.
    fn bisect(&self, mut lo: f64, mut hi: f64) -> f64 {
        let rising = self.f(hi) > self.f(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let y = self.f(mid);
            if y == 0.0 {
                return mid;
            }
            if (y < 0.0) == rising {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= ROOT_TOLERANCE * 1e-3 * mid.abs().max(1.0) {
                break;
            }
        }
        let mut x = 0.5 * (lo + hi);
        // Newton polish, kept inside the bracket
        for _ in 0..3 {
            let d = self.f_prime(x);
            if d == 0.0 {
                break;
            }
            let next = x - self.f(x) / d;
            if !(lo..=hi).contains(&next) {
                break;
            }
            x = next;
        }
        x
    }

    fn snap_integer_root(&self, r: f64) -> f64 {
        let n = r.round();
        if (n - r).abs() < 1e-6 && n.abs() < 9.0e15 && self.f_integer(n as i64).is_zero() {
            n
        } else {
            r
        }
    }
}

impl fmt::Display for Curve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "y^2 = x^3")?;
        for (coeff, mono) in [(self.a, "x^2"), (self.b, "x"), (self.c, "")] {
            if coeff == 0 {
                continue;
            }
            let sign = if coeff < 0 { '-' } else { '+' };
            let mag = coeff.unsigned_abs();
            if mag == 1 && !mono.is_empty() {
                write!(f, " {sign} {mono}")?;
            } else {
                write!(f, " {sign} {mag}{mono}")?;
            }
        }
        Ok(())
    }
}

/// `h(u/v) = max(1, log|u|, log|v|)` for `u/v` in lowest terms.
pub fn height_h(u: i64, v: i64) -> Result<f64> {
    if v == 0 || u.unsigned_abs().gcd(&v.unsigned_abs()) != 1 {
        return Err(Error::NotReduced { u, v });
    }
    Ok(height_unchecked(u, v))
}

pub(crate) fn height_unchecked(u: i64, v: i64) -> f64 {
    let big = u.unsigned_abs().max(v.unsigned_abs()) as f64;
    big.ln().max(1.0)
}

/// Endpoint of an open interval on the real line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    NegInf,
    Finite(BigRational),
    PosInf,
}

const GRID: i64 = 1_000_000_000_000;

impl Endpoint {
    fn floor_grid(x: f64) -> Self {
        Endpoint::Finite(BigRational::new(BigInt::from((x * GRID as f64).floor() as i64), BigInt::from(GRID)))
    }

    fn ceil_grid(x: f64) -> Self {
        Endpoint::Finite(BigRational::new(BigInt::from((x * GRID as f64).ceil() as i64), BigInt::from(GRID)))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Endpoint::NegInf => f64::NEG_INFINITY,
            Endpoint::PosInf => f64::INFINITY,
            Endpoint::Finite(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }

    fn rank(&self) -> u8 {
        match self {
            Endpoint::NegInf => 0,
            Endpoint::Finite(_) => 1,
            Endpoint::PosInf => 2,
        }
    }
}

impl PartialOrd for Endpoint {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Endpoint {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Endpoint::Finite(x), Endpoint::Finite(y)) => x.cmp(y),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl fmt::Display for Endpoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Endpoint::NegInf => write!(f, "-inf"),
            Endpoint::PosInf => write!(f, "inf"),
            Endpoint::Finite(r) => write!(f, "{r}"),
        }
    }
}

impl FromStr for Endpoint {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "-inf" => return Ok(Endpoint::NegInf),
            "inf" | "+inf" => return Ok(Endpoint::PosInf),
            _ => {}
        }
        parse_rational(s).map(Endpoint::Finite)
    }
}

/// Accepts integers, `p/q` and finite decimals such as `-2.26`.
fn parse_rational(s: &str) -> std::result::Result<BigRational, String> {
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| format!("bad numerator {p:?}"))?;
        let q: BigInt = q.trim().parse().map_err(|_| format!("bad denominator {q:?}"))?;
        if q.is_zero() {
            return Err("zero denominator".into());
        }
        return Ok(BigRational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|c| c.is_ascii_digit()) {
            return Err(format!("bad decimal {s:?}"));
        }
        let negative = int.trim_start().starts_with('-');
        let int_part: BigInt = match int.trim() {
            "" | "-" | "+" => BigInt::zero(),
            other => other.parse().map_err(|_| format!("bad decimal {s:?}"))?,
        };
        let scale = BigInt::from(10).pow(frac.len() as u32);
        let frac_part: BigInt = frac.parse().map_err(|_| format!("bad decimal {s:?}"))?;
        let magnitude = int_part.abs() * &scale + frac_part;
        let numer = if negative { -magnitude } else { magnitude };
        return Ok(BigRational::new(numer, scale));
    }
    s.parse::<BigInt>()
        .map(BigRational::from_integer)
        .map_err(|_| format!("bad number {s:?}"))
}

/// Open interval `(lo, hi)` with `lo < hi`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Endpoint,
    pub hi: Endpoint,
}

impl Interval {
    pub fn open(lo: Endpoint, hi: Endpoint) -> Self {
        Interval { lo, hi }
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        let above = match &self.lo {
            Endpoint::NegInf => true,
            Endpoint::PosInf => false,
            Endpoint::Finite(lo) => lo < x,
        };
        let below = match &self.hi {
            Endpoint::NegInf => false,
            Endpoint::PosInf => true,
            Endpoint::Finite(hi) => x < hi,
        };
        above && below
    }

    /// Membership of `u/v` without building the fraction.
    fn contains_ratio(&self, u: i64, v: i64) -> bool {
        // p/q < u/v  <=>  p v < u q   for q > 0, v > 0
        let (u, v) = if v < 0 { (-(u as i128), -(v as i128)) } else { (u as i128, v as i128) };
        let less = |r: &BigRational, a: i128, b: i128| -> bool {
            // r < a/b
            r.numer() * BigInt::from(b) < BigInt::from(a) * r.denom()
        };
        let greater = |r: &BigRational, a: i128, b: i128| -> bool {
            r.numer() * BigInt::from(b) > BigInt::from(a) * r.denom()
        };
        let above = match &self.lo {
            Endpoint::NegInf => true,
            Endpoint::PosInf => false,
            Endpoint::Finite(lo) => less(lo, u, v),
        };
        let below = match &self.hi {
            Endpoint::NegInf => false,
            Endpoint::PosInf => true,
            Endpoint::Finite(hi) => greater(hi, u, v),
        };
        above && below
    }
}

/// Finite union of disjoint open intervals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowX {
    intervals: Vec<Interval>,
}

impl WindowX {
    pub fn new(mut intervals: Vec<Interval>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::Window {
                spec: String::new(),
                reason: "no intervals".into(),
            });
        }
        for iv in &intervals {
            if iv.lo >= iv.hi {
                return Err(Error::Window {
                    spec: intervals_to_string(&intervals),
                    reason: format!("empty interval ({}, {})", iv.lo, iv.hi),
                });
            }
        }
        intervals.sort_by(|x, y| x.lo.cmp(&y.lo));
        if intervals.windows(2).any(|w| w[0].hi > w[1].lo) {
            return Err(Error::Window {
                spec: intervals_to_string(&intervals),
                reason: "intervals overlap".into(),
            });
        }
        Ok(WindowX { intervals })
    }

    pub fn whole_line() -> Self {
        WindowX {
            intervals: vec![Interval::open(Endpoint::NegInf, Endpoint::PosInf)],
        }
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    pub fn contains(&self, x: &BigRational) -> bool {
        self.intervals.iter().any(|iv| iv.contains(x))
    }

    /// Whether `u/v` lies in the window; `v` must be nonzero.
    pub fn contains_ratio(&self, u: i64, v: i64) -> bool {
        self.intervals.iter().any(|iv| iv.contains_ratio(u, v))
    }

    /// Meets both `(e_max, inf)` and `(-inf, e_min)`.
    pub fn is_broad(&self, curve: &Curve) -> bool {
        let right = self.intervals.iter().any(|iv| iv.hi.to_f64() > curve.e_max());
        let left = self.intervals.iter().any(|iv| iv.lo.to_f64() < curve.e_min());
        right && left
    }

    pub fn is_bounded(&self) -> bool {
        self.intervals
            .iter()
            .all(|iv| matches!((&iv.lo, &iv.hi), (Endpoint::Finite(_), Endpoint::Finite(_))))
    }

    /// Smallest `|f|` over a sample of the window closure; a sampled
    /// diagnostic, not a certificate.
    pub fn min_abs_f_on_closure(&self, curve: &Curve, samples: usize) -> f64 {
        let mut best = f64::INFINITY;
        for iv in &self.intervals {
            let (lo, hi) = (iv.lo.to_f64(), iv.hi.to_f64());
            if !lo.is_finite() || !hi.is_finite() {
                return 0.0;
            }
            for i in 0..=samples {
                let x = lo + (hi - lo) * i as f64 / samples as f64;
                best = best.min(curve.f(x).abs());
            }
        }
        best
    }
}

fn intervals_to_string(intervals: &[Interval]) -> String {
    intervals
        .iter()
        .map(|iv| format!("{}..{}", iv.lo, iv.hi))
        .collect::<Vec<_>>()
        .join(",")
}

impl fmt::Display for WindowX {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&intervals_to_string(&self.intervals))
    }
}

impl FromStr for WindowX {
    type Err = Error;

    /// Comma-separated open intervals `lo..hi`; endpoints are integers,
    /// fractions `p/q`, decimals, `inf` or `-inf`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = |reason: String| Error::Window {
            spec: s.to_string(),
            reason,
        };
        let mut intervals = Vec::new();
        for part in s.split(',') {
            let (lo, hi) = part
                .split_once("..")
                .ok_or_else(|| bad(format!("{part:?} is not of the form lo..hi")))?;
            let lo: Endpoint = lo.parse().map_err(bad)?;
            let hi: Endpoint = hi.parse().map_err(bad)?;
            intervals.push(Interval::open(lo, hi));
        }
        WindowX::new(intervals).map_err(|e| match e {
            Error::Window { reason, .. } => bad(reason),
            other => other,
        })
    }
}
