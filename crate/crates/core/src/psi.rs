//! The set of primitive pairs `(u, v)` with `F(u, v) != 0`, the twist each
//! pair lands on, and frequency histograms over twists.
//!
//! A pair with `v > 0` stands for the rational `x = u/v`. Its twist is the
//! squarefree part `D` of `F(u, v)`, and `(x, m / v^2)` is a point on
//! `D y^2 = f(x)` where `F(u, v) = D m^2`.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{factorize, factorize_u64, Factorization};
use crate::curve::{Curve, WindowX};
use crate::error::{Error, Result};

/// Stripes wider than this use a sieve over `u` instead of per-pair gcd.
const SIEVE_THRESHOLD: u64 = 1000;

/// Largest supported box; keeps `|u|, |v|` well inside `i64`.
pub const MAX_BOX: u64 = 1 << 40;

pub const DEFAULT_WITNESS_CAP: usize = 64;

/// `(u, v)` in lowest terms with `v > 0` and `F(u, v) != 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoprimePair {
    pub u: i64,
    pub v: i64,
    /// `F(u, v)`.
    pub value: BigInt,
}

/// `F(u, v) = d * m^2` with `d` squarefree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classification {
    pub d: BigInt,
    pub m: BigUint,
    /// Prime factorization of `m`.
    pub m_factors: Vec<(BigUint, u32)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifiedPair {
    pub pair: CoprimePair,
    pub class: Classification,
}

/// A point `(x, y)` on `d y^2 = f(x)` with `y >= 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwistPoint {
    pub d: BigInt,
    pub x: BigRational,
    pub y: BigRational,
}

impl TwistPoint {
    /// Checks `d y^2 = f(x)` in exact rational arithmetic.
    pub fn satisfies(&self, curve: &Curve) -> bool {
        let d = BigRational::from_integer(self.d.clone());
        d * &self.y * &self.y == curve.f_rational(&self.x)
    }
}

pub(crate) fn check_box(n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::param("box", "N must be at least 1"));
    }
    if n > MAX_BOX {
        return Err(Error::param("box", format!("N must be at most {MAX_BOX}")));
    }
    Ok(())
}

/// Values of `u` in `[-n, n]` coprime to `v`, ascending.
fn coprime_numerators(v: u64, n: u64) -> Vec<i64> {
    let n_i = n as i64;
    if n <= SIEVE_THRESHOLD {
        return (-n_i..=n_i)
            .filter(|u| u.unsigned_abs().gcd(&v) == 1)
            .collect();
    }
    let width = (2 * n + 1) as usize;
    let mut keep = vec![true; width];
    for (p, _) in factorize_u64(v) {
        // multiples of p in [-n, n], offset by n
        let start = (n % p) as usize;
        let mut i = start;
        while i < width {
            keep[i] = false;
            i += p as usize;
        }
    }
    keep.iter()
        .enumerate()
        .filter(|(_, k)| **k)
        .map(|(i, _)| i as i64 - n_i)
        .collect()
}

fn stripe_pairs<'a>(
    curve: &'a Curve,
    v: u64,
    n: u64,
    window: Option<&'a WindowX>,
) -> impl Iterator<Item = (i64, i64, BigInt)> + 'a {
    let v = v as i64;
    coprime_numerators(v as u64, n)
        .into_iter()
        .filter(move |u| window.is_none_or(|w| w.contains_ratio(*u, v)))
        .filter_map(move |u| {
            let g = curve.cubic_part(u, v);
            (!g.is_zero()).then_some((u, v, g))
        })
}

/// All pairs with `|u| <= n`, `0 < v <= n`, `gcd(u, v) = 1`, `F(u, v) != 0`
/// and `u/v` in `window`, ordered by `v` then `u`.
pub fn enumerate_psi(curve: &Curve, n: u64, window: Option<&WindowX>) -> Result<Vec<CoprimePair>> {
    check_box(n)?;
    let stripes: Vec<Vec<CoprimePair>> = (1..=n)
        .into_par_iter()
        .map(|v| {
            stripe_pairs(curve, v, n, window)
                .map(|(u, v, g)| CoprimePair { u, v, value: g * v })
                .collect()
        })
        .collect();
    Ok(stripes.concat())
}

/// Like [`enumerate_psi`], with each pair classified.
pub fn classify_box(curve: &Curve, n: u64, window: Option<&WindowX>) -> Result<Vec<ClassifiedPair>> {
    check_box(n)?;
    let stripes: Vec<Vec<ClassifiedPair>> = (1..=n)
        .into_par_iter()
        .map(|v| classified_stripe(curve, v, n, window))
        .collect();
    Ok(stripes.concat())
}

pub(crate) fn classified_stripe(
    curve: &Curve,
    v: u64,
    n: u64,
    window: Option<&WindowX>,
) -> Vec<ClassifiedPair> {
    let v_factors = factorize_u64(v);
    stripe_pairs(curve, v, n, window)
        .map(|(u, v, g)| {
            let class = classify_parts(&v_factors, &g);
            ClassifiedPair {
                pair: CoprimePair { u, v, value: g * v },
                class,
            }
        })
        .collect()
}

/// Squarefree decomposition of `F = v * g` from the factorization of `v > 0`
/// and the cubic part `g`, which is coprime to `v`.
fn classify_parts(v_factors: &[(u64, u32)], g: &BigInt) -> Classification {
    let g_fact = match g.magnitude().to_u64() {
        Some(small) => factorize_u64(small)
            .into_iter()
            .map(|(p, e)| (BigUint::from(p), e))
            .collect(),
        None => factorize(g).expect("g is nonzero").factors,
    };
    let mut factors: Vec<(BigUint, u32)> = v_factors
        .iter()
        .map(|&(p, e)| (BigUint::from(p), e))
        .chain(g_fact)
        .collect();
    factors.sort();
    let full = Factorization {
        sign: if g.is_negative() { -1 } else { 1 },
        factors,
    };
    let sq = full.squarefree();
    Classification {
        d: sq.s,
        m: sq.m,
        m_factors: full.square_root_factors(),
    }
}

fn check_reduced(u: i64, v: i64) -> Result<()> {
    if v == 0 || u.unsigned_abs().gcd(&v.unsigned_abs()) != 1 {
        return Err(Error::NotReduced { u, v });
    }
    Ok(())
}

/// The twist `D = s(F(u, v))` and cofactor `m` with `F(u, v) = D m^2`.
pub fn classify_pair(curve: &Curve, u: i64, v: i64) -> Result<Classification> {
    check_reduced(u, v)?;
    let (u, v) = if v < 0 { (-u, -v) } else { (u, v) };
    let g = curve.cubic_part(u, v);
    if g.is_zero() {
        return Err(Error::NotInPsi { u, v });
    }
    Ok(classify_parts(&factorize_u64(v as u64), &g))
}

/// The point `(u/v, m/v^2)` on the twist `D y^2 = f(x)` that `(u, v)` lands on.
pub fn lift_point(curve: &Curve, u: i64, v: i64) -> Result<TwistPoint> {
    let class = classify_pair(curve, u, v)?;
    Ok(point_from_class(curve, u, v, &class))
}

fn point_from_class(curve: &Curve, u: i64, v: i64, class: &Classification) -> TwistPoint {
    let v2 = BigInt::from(v) * v;
    let point = TwistPoint {
        d: class.d.clone(),
        x: BigRational::new(BigInt::from(u), BigInt::from(v)),
        y: BigRational::new(BigInt::from(class.m.clone()), v2),
    };
    assert!(point.satisfies(curve), "lifted point off its twist: {point:?}");
    point
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DEntry {
    pub d: BigInt,
    pub count: u64,
    /// First witnesses in enumeration order, up to the histogram cap.
    pub witnesses: Vec<(i64, i64)>,
}

/// How often each twist occurs over a box of pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DHistogram {
    pub n: u64,
    pub window: Option<WindowX>,
    pub witness_cap: usize,
    entries: BTreeMap<BigInt, DEntry>,
}

fn enumeration_key(w: &(i64, i64)) -> (i64, i64) {
    (w.1, w.0)
}

impl DHistogram {
    pub fn new(n: u64, window: Option<WindowX>, witness_cap: usize) -> Self {
        DHistogram {
            n,
            window,
            witness_cap,
            entries: BTreeMap::new(),
        }
    }

    pub fn record(&mut self, d: &BigInt, u: i64, v: i64) {
        let entry = self.entries.entry(d.clone()).or_insert_with(|| DEntry {
            d: d.clone(),
            count: 0,
            witnesses: Vec::new(),
        });
        entry.count += 1;
        if entry.witnesses.len() < self.witness_cap {
            entry.witnesses.push((u, v));
        }
    }

    /// Counts add; witness lists are merged in enumeration order and cut to
    /// the cap, so merging is associative and commutative.
    pub fn merge(&mut self, other: DHistogram) {
        for (d, theirs) in other.entries {
            match self.entries.get_mut(&d) {
                None => {
                    self.entries.insert(d, theirs);
                }
                Some(mine) => {
                    mine.count += theirs.count;
                    mine.witnesses.extend(theirs.witnesses);
                    mine.witnesses.sort_by_key(enumeration_key);
                    mine.witnesses.truncate(self.witness_cap);
                }
            }
        }
    }

    pub fn count(&self, d: i64) -> u64 {
        self.entries.get(&BigInt::from(d)).map_or(0, |e| e.count)
    }

    pub fn get(&self, d: &BigInt) -> Option<&DEntry> {
        self.entries.get(d)
    }

    /// Entries in increasing order of `D`.
    pub fn entries(&self) -> impl Iterator<Item = &DEntry> {
        self.entries.values()
    }

    pub fn total(&self) -> u64 {
        self.entries.values().map(|e| e.count).sum()
    }

    pub fn distinct(&self) -> usize {
        self.entries.len()
    }

    /// Entries by count descending, then `|D|` ascending, then `D > 0` first.
    pub fn ranked(&self) -> Vec<&DEntry> {
        let mut out: Vec<&DEntry> = self.entries.values().collect();
        out.sort_by(|x, y| {
            y.count
                .cmp(&x.count)
                .then_with(|| x.d.magnitude().cmp(y.d.magnitude()))
                .then_with(|| y.d.sign().cmp(&x.d.sign()))
        });
        out
    }

    pub fn top(&self, k: usize) -> Vec<&DEntry> {
        let mut ranked = self.ranked();
        ranked.truncate(k);
        ranked
    }
}

/// Twist frequencies over the box `|u| <= n`, `0 < v <= n`.
pub fn rank_mine(
    curve: &Curve,
    n: u64,
    window: Option<&WindowX>,
    witness_cap: usize,
) -> Result<DHistogram> {
    check_box(n)?;
    let partials: Vec<DHistogram> = (1..=n)
        .into_par_iter()
        .map(|v| {
            let mut h = DHistogram::new(n, None, witness_cap);
            for cp in classified_stripe(curve, v, n, window) {
                h.record(&cp.class.d, cp.pair.u, cp.pair.v);
            }
            h
        })
        .collect();
    let mut hist = DHistogram::new(n, window.cloned(), witness_cap);
    for partial in partials {
        hist.merge(partial);
    }
    Ok(hist)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointRepr {
    pub x: String,
    pub y: String,
}

/// One row of the `rank` report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankRow {
    #[serde(rename = "D", with = "crate::serde_int")]
    pub d: BigInt,
    pub count: u64,
    pub sample_witnesses: Vec<[i64; 2]>,
    pub sample_points: Vec<PointRepr>,
}

impl RankRow {
    pub fn from_entry(curve: &Curve, entry: &DEntry) -> Result<Self> {
        let mut points = Vec::with_capacity(entry.witnesses.len());
        for &(u, v) in &entry.witnesses {
            let p = lift_point(curve, u, v)?;
            points.push(PointRepr {
                x: p.x.to_string(),
                y: p.y.to_string(),
            });
        }
        Ok(RankRow {
            d: entry.d.clone(),
            count: entry.count,
            sample_witnesses: entry.witnesses.iter().map(|&(u, v)| [u, v]).collect(),
            sample_points: points,
        })
    }
}
