//! Truncated evaluation of the twist-weighted series over the box
//! `|u|, |v| <= N`:
//!
//! * `S = sum |s(F(u,v))|^-k h(u/v)^-j`
//! * `R = sum_t sum_{t^2 | F(u,v)} t^{2k} |F(u,v)|^-k h(u/v)^-j`
//!
//! Both run over all of `Psi` in the box, so each canonical pair with
//! `v > 0` also stands for `(-u, -v)` and is counted twice. The inner
//! `t`-sum of `R` is evaluated through the identity
//! `sum_{t^2 | F} t^{2k} / |F|^k = |s|^-k sum_{e | m} e^{-2k}` for
//! `F = s m^2`, since `t^2 | F` exactly when `t | m`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{biguint_to_f64, divisor_power_sum_factored};
use crate::curve::{height_unchecked, Curve, WindowX};
use crate::error::{Error, Result};
use crate::kahan::KahanSum;
use crate::psi::{check_box, classified_stripe, Classification};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SeriesKind {
    S,
    R,
    Q,
}

impl fmt::Display for SeriesKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SeriesKind::S => "S",
            SeriesKind::R => "R",
            SeriesKind::Q => "Q",
        };
        f.write_str(s)
    }
}

impl FromStr for SeriesKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "S" | "s" => Ok(SeriesKind::S),
            "R" | "r" => Ok(SeriesKind::R),
            "Q" | "q" => Ok(SeriesKind::Q),
            other => Err(Error::param("series", format!("{other:?} is not one of S, R, Q"))),
        }
    }
}

/// Which shortest vectors contribute to `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    /// `omega` is primitive and `F(omega) != 0`.
    StrictPsi,
    /// Only `F(omega) != 0`.
    FNonzero,
}

impl FromStr for Membership {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict_psi" | "strict-psi" | "strict" => Ok(Membership::StrictPsi),
            "f_nonzero" | "f-nonzero" | "fnonzero" => Ok(Membership::FNonzero),
            other => Err(Error::param(
                "membership",
                format!("{other:?} is not one of strict_psi, f_nonzero"),
            )),
        }
    }
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Membership::StrictPsi => "strict_psi",
            Membership::FNonzero => "f_nonzero",
        })
    }
}

/// Exponents, box bound and optional window for a truncated sum.
#[derive(Debug, Clone, PartialEq)]
pub struct SumParams {
    pub j: f64,
    pub k: f64,
    pub n: u64,
    pub window: Option<WindowX>,
}

impl SumParams {
    pub fn new(j: f64, k: f64, n: u64) -> Result<Self> {
        let params = SumParams { j, k, n, window: None };
        params.validate()?;
        Ok(params)
    }

    pub fn with_window(mut self, window: WindowX) -> Self {
        self.window = Some(window);
        self
    }

    pub fn validate(&self) -> Result<()> {
        validate_exponents(self.j, self.k)?;
        check_box(self.n)
    }
}

pub(crate) fn validate_exponents(j: f64, k: f64) -> Result<()> {
    if !(j >= 0.0) || !j.is_finite() {
        return Err(Error::param("j", format!("{j} is not a nonnegative real")));
    }
    if !(k > 0.5) || !k.is_finite() {
        return Err(Error::param("k", format!("{k} is not a real > 1/2")));
    }
    Ok(())
}

/// Aggregate of the terms sharing one key (a twist `D` or a level `t`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakdownRow {
    #[serde(with = "crate::serde_int")]
    pub key: BigInt,
    pub terms: u64,
    pub value: f64,
}

/// One truncated series evaluation, with every parameter that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SumReport {
    pub series: SeriesKind,
    pub curve: [i64; 3],
    pub j: f64,
    pub k: f64,
    /// Box bound `N` for S and R, level bound `B` for Q.
    pub truncation: u64,
    pub window: Option<String>,
    pub membership: Option<Membership>,
    pub value: f64,
    pub term_count: u64,
    /// Triples whose shortest vector failed the membership test (Q only).
    pub excluded_count: u64,
    /// Triples whose minimal vectors tie and disagree on membership (Q only).
    pub tie_count: u64,
    pub kahan_error_bound: f64,
    pub breakdown: Option<Vec<BreakdownRow>>,
}

impl SumReport {
    pub(crate) fn new(series: SeriesKind, curve: &Curve, j: f64, k: f64, truncation: u64) -> Self {
        let (a, b, c) = curve.coefficients();
        SumReport {
            series,
            curve: [a, b, c],
            j,
            k,
            truncation,
            window: None,
            membership: None,
            value: 0.0,
            term_count: 0,
            excluded_count: 0,
            tie_count: 0,
            kahan_error_bound: 0.0,
            breakdown: None,
        }
    }
}

/// `|s|^-k h^-j` for one pair.
pub fn s_term(class: &Classification, height: f64, j: f64, k: f64) -> f64 {
    biguint_to_f64(class.d.magnitude()).powf(-k) * height.powf(-j)
}

/// `sum_{t^2 | F} t^{2k} |F|^-k` via the divisor identity.
pub fn r_inner_sum(class: &Classification, k: f64) -> f64 {
    let sigma = divisor_power_sum_factored(&class.m_factors, 2.0 * k)
        .expect("2k is positive for valid parameters");
    biguint_to_f64(class.d.magnitude()).powf(-k) * sigma
}

/// `h^-j sum_{t^2 | F} t^{2k} |F|^-k` for one pair.
pub fn r_term(class: &Classification, height: f64, j: f64, k: f64) -> f64 {
    r_inner_sum(class, k) * height.powf(-j)
}

/// Evaluates `term` over the canonical pairs in stripe order; per-twist
/// breakdown optional.
fn box_sum(
    curve: &Curve,
    params: &SumParams,
    series: SeriesKind,
    breakdown: bool,
    term: impl Fn(&Classification, f64) -> f64 + Sync,
) -> Result<SumReport> {
    params.validate()?;
    let window = params.window.as_ref();
    let stripes: Vec<Vec<(BigInt, f64)>> = (1..=params.n)
        .into_par_iter()
        .map(|v| {
            classified_stripe(curve, v, params.n, window)
                .into_iter()
                .map(|cp| {
                    let h = height_unchecked(cp.pair.u, cp.pair.v);
                    let value = term(&cp.class, h);
                    (cp.class.d, value)
                })
                .collect()
        })
        .collect();

    let mut acc = KahanSum::new();
    let mut by_d: BTreeMap<BigInt, (u64, KahanSum)> = BTreeMap::new();
    for (d, value) in stripes.into_iter().flatten() {
        acc.add(value);
        if breakdown {
            let slot = by_d.entry(d).or_default();
            slot.0 += 2;
            slot.1.add(value);
        }
    }

    let mut report = SumReport::new(series, curve, params.j, params.k, params.n);
    report.window = params.window.as_ref().map(|w| w.to_string());
    // each canonical pair stands for (u, v) and (-u, -v)
    report.value = 2.0 * acc.value();
    report.term_count = 2 * acc.count();
    report.kahan_error_bound = 4.0 * acc.error_bound();
    if breakdown {
        report.breakdown = Some(
            by_d.into_iter()
                .map(|(key, (terms, s))| BreakdownRow {
                    key,
                    terms,
                    value: 2.0 * s.value(),
                })
                .collect(),
        );
    }
    Ok(report)
}

pub fn s_partial(curve: &Curve, params: &SumParams) -> Result<SumReport> {
    s_partial_with(curve, params, false)
}

/// [`s_partial`] with an optional per-twist breakdown.
pub fn s_partial_with(curve: &Curve, params: &SumParams, breakdown: bool) -> Result<SumReport> {
    let (j, k) = (params.j, params.k);
    box_sum(curve, params, SeriesKind::S, breakdown, |class, h| {
        s_term(class, h, j, k)
    })
}

pub fn r_partial(curve: &Curve, params: &SumParams) -> Result<SumReport> {
    r_partial_with(curve, params, false)
}

pub fn r_partial_with(curve: &Curve, params: &SumParams, breakdown: bool) -> Result<SumReport> {
    let (j, k) = (params.j, params.k);
    box_sum(curve, params, SeriesKind::R, breakdown, |class, h| {
        r_term(class, h, j, k)
    })
}

/// Bracket for the canonical-height sum over the same lifted points.
///
/// If `h/4 <= h_hat <= h` holds for every boxed pair, each term
/// `h_hat^-j` lies between `h^-j` and `4^j h^-j`, so the bracket is
/// `[S, 4^j S]`. The height comparison is only guaranteed once `|u|` or
/// `|v|` is large enough, and no explicit threshold is known, so small
/// boxes may contain exceptions.
pub fn t_bounds(curve: &Curve, params: &SumParams) -> Result<(f64, f64)> {
    let s = s_partial(curve, params)?.value;
    Ok((s, 4f64.powf(params.j) * s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::zeta;
    use crate::psi::classify_pair;

    fn congruent() -> Curve {
        Curve::new(0, -1, 0).unwrap()
    }

    fn cube_root_two() -> Curve {
        Curve::new(0, 0, -2).unwrap()
    }

    #[test]
    fn s_examples() {
        let e = congruent();
        let r = s_partial(&e, &SumParams::new(1.0, 1.0, 2).unwrap()).unwrap();
        assert!((r.value - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.term_count, 8);
        let r = s_partial(&e, &SumParams::new(0.0, 2.0, 2).unwrap()).unwrap();
        assert!((r.value - 2.0 / 9.0).abs() < 1e-15);
        // nothing in Psi for N = 1
        let r = s_partial(&e, &SumParams::new(1.0, 1.0, 1).unwrap()).unwrap();
        assert_eq!((r.value, r.term_count), (0.0, 0));
    }

    #[test]
    fn r_examples() {
        let e = congruent();
        let r = r_partial(&e, &SumParams::new(1.0, 1.0, 2).unwrap()).unwrap();
        assert!((r.value - 4.0 / 3.0).abs() < 1e-15);
        let class = classify_pair(&e, 3, 1).unwrap();
        assert!((r_inner_sum(&class, 1.0) - 5.0 / 24.0).abs() < 1e-16);
        assert!((r_inner_sum(&class, 1.0) - (1.0 / 6.0) * 1.25).abs() < 1e-16);
    }

    #[test]
    fn invalid_params_are_rejected() {
        assert!(SumParams::new(-1.0, 1.0, 2).is_err());
        assert!(SumParams::new(1.0, 0.5, 2).is_err());
        assert!(SumParams::new(1.0, f64::NAN, 2).is_err());
        assert!(SumParams::new(1.0, 1.0, 0).is_err());
        assert!(SumParams::new(0.0, 0.51, 1).is_ok());
    }

    #[test]
    fn t_bound_examples() {
        let e = congruent();
        let (lo, hi) = t_bounds(&e, &SumParams::new(1.0, 1.0, 2).unwrap()).unwrap();
        assert!((lo - 4.0 / 3.0).abs() < 1e-15 && (hi - 16.0 / 3.0).abs() < 1e-15);
        let (lo, hi) = t_bounds(&e, &SumParams::new(0.0, 1.0, 7).unwrap()).unwrap();
        assert_eq!(lo, hi);
        let (lo, hi) = t_bounds(&cube_root_two(), &SumParams::new(2.5, 1.0, 9).unwrap()).unwrap();
        assert!((hi / lo - 4f64.powf(2.5)).abs() < 1e-12);
    }

    #[test]
    fn breakdown_sums_to_total() {
        let e = cube_root_two();
        let params = SumParams::new(1.0, 1.5, 12).unwrap();
        let r = r_partial_with(&e, &params, true).unwrap();
        let rows = r.breakdown.as_ref().unwrap();
        let total: f64 = rows.iter().map(|row| row.value).sum();
        let terms: u64 = rows.iter().map(|row| row.terms).sum();
        assert!((total - r.value).abs() < 1e-12 * r.value);
        assert_eq!(terms, r.term_count);
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(serde_json::from_str::<SumReport>(&json).unwrap(), r);
    }

    #[test]
    fn sandwich_and_monotonicity() {
        for e in [congruent(), cube_root_two()] {
            for k in [0.75, 1.0, 1.5] {
                let z = zeta(2.0 * k, 1e-12).unwrap();
                let mut last = (0.0, 0.0);
                for n in [1, 2, 5, 10, 20] {
                    let p = SumParams::new(1.0, k, n).unwrap();
                    let s = s_partial(&e, &p).unwrap().value;
                    let r = r_partial(&e, &p).unwrap().value;
                    assert!(s <= r && r <= z * s, "{e} k={k} n={n}: {s} {r}");
                    assert!(s >= last.0 && r >= last.1);
                    last = (s, r);
                }
            }
        }
    }

    #[test]
    fn window_restriction_only_removes_terms() {
        let e = congruent();
        let p = SumParams::new(1.0, 1.0, 25).unwrap();
        let full = s_partial(&e, &p).unwrap();
        let windowed = s_partial(&e, &p.clone().with_window(e.default_broad_window())).unwrap();
        assert!(windowed.value > 0.0 && windowed.value <= full.value);
        assert!(windowed.term_count < full.term_count);
        assert_eq!(windowed.window.as_deref(), Some("-3..-2,2..3"));
    }

    #[test]
    fn larger_k_shrinks_sums_when_twists_exceed_one() {
        // every F(u, v) of x^3 - x has |s| >= 2
        let e = congruent();
        let hist = crate::psi::rank_mine(&e, 30, None, 0).unwrap();
        assert!(hist.ranked().iter().all(|d| d.d.magnitude() >= &2u32.into()));
        let s1 = s_partial(&e, &SumParams::new(1.0, 1.0, 30).unwrap()).unwrap().value;
        let s2 = s_partial(&e, &SumParams::new(1.0, 1.5, 30).unwrap()).unwrap().value;
        assert!(s2 < s1);
    }
}
