//! Random-lattice model experiments for the shortest vectors `omega`.
//!
//! Each `omega` of a triple with `d d' = t` lies in an annulus
//! `A_t = {C1 sqrt(t) <= |z| <= C2 t}`. The model replaces `omega` by a
//! point drawn area-uniformly in `A_t` and compares how many land inside
//! the disc `|z| <= C sqrt(t)` against the observed count.
//!
//! Draws use ChaCha8 (`rand_chacha`) seeded with the run seed; each triple
//! reads from its own stream, numbered by a SplitMix64 mix of
//! `(alpha, d, d')`, so results do not depend on evaluation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::lattice::{reduced_lattices_up_to, triples_up_to, AnnulusFit, TwistTriple};
use crate::series::Membership;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusModel {
    pub c1: f64,
    pub c2: f64,
    pub seed: u64,
}

impl AnnulusModel {
    pub fn new(c1: f64, c2: f64, seed: u64) -> Result<Self> {
        if !(c1 > 0.0 && c1.is_finite()) {
            return Err(Error::param("c1", format!("{c1} is not positive")));
        }
        if !(c2 > c1 && c2.is_finite()) {
            return Err(Error::param("c2", format!("need c2 > c1, got c1 = {c1}, c2 = {c2}")));
        }
        Ok(AnnulusModel { c1, c2, seed })
    }

    pub fn from_fit(fit: &AnnulusFit, seed: u64) -> Result<Self> {
        Self::new(fit.c1, fit.c2, seed)
    }

    pub fn inner_radius(&self, t: f64) -> f64 {
        self.c1 * t.sqrt()
    }

    pub fn outer_radius(&self, t: f64) -> f64 {
        self.c2 * t
    }

    /// `P(|z| <= C sqrt(t))` for `z` area-uniform in `A_t`.
    pub fn inside_probability(&self, t: f64, c: f64) -> f64 {
        let r1 = self.inner_radius(t).powi(2);
        let r2 = self.outer_radius(t).powi(2);
        let r = c * c * t;
        ((r - r1) / (r2 - r1)).clamp(0.0, 1.0)
    }

    /// Area-uniform point of `A_t` drawn from `rng`.
    pub fn sample<R: Rng>(&self, t: f64, rng: &mut R) -> [f64; 2] {
        let r1 = self.inner_radius(t).powi(2);
        let r2 = self.outer_radius(t).powi(2);
        let radius = (r1 + rng.gen::<f64>() * (r2 - r1)).sqrt();
        let theta = std::f64::consts::TAU * rng.gen::<f64>();
        [radius * theta.cos(), radius * theta.sin()]
    }

    /// Generator for the draw belonging to `triple`.
    pub fn stream(&self, triple: &TwistTriple) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(triple_stream_id(triple));
        rng
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn triple_stream_id(triple: &TwistTriple) -> u64 {
    splitmix64(splitmix64(splitmix64(triple.alpha) ^ triple.d) ^ triple.d_prime)
}

/// One point of a count-versus-`B` experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub b: u64,
    pub c: f64,
    /// Triples with `d d' < B` that were considered.
    pub triples: u64,
    pub observed_count: Option<u64>,
    pub model_count: Option<u64>,
    /// Exact mean and standard deviation of the model count.
    pub model_mean: Option<f64>,
    pub model_std: Option<f64>,
    /// `log(B)^4`.
    pub log4_reference: f64,
    pub seed: Option<u64>,
}

fn check_bc(b: u64, c: f64) -> Result<()> {
    if b < 2 {
        return Err(Error::param("bound", format!("B = {b} must be at least 2")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::param("c", format!("{c} is not positive")));
    }
    Ok(())
}

/// Draws one model point per triple with `d d' < B` and counts those with
/// `|z| <= C sqrt(d d')`.
pub fn random_annulus_count(
    curve: &Curve,
    model: &AnnulusModel,
    b: u64,
    c: f64,
) -> Result<ExperimentReport> {
    check_bc(b, c)?;
    let triples = triples_up_to(curve, b - 1)?;
    let hits: u64 = triples
        .par_iter()
        .map(|tr| {
            let t = tr.t() as f64;
            let z = model.sample(t, &mut model.stream(tr));
            u64::from(z[0].hypot(z[1]) <= c * t.sqrt())
        })
        .sum();
    let (mean, var) = triples.iter().fold((0.0, 0.0), |(m, v), tr| {
        let p = model.inside_probability(tr.t() as f64, c);
        (m + p, v + p * (1.0 - p))
    });
    Ok(ExperimentReport {
        b,
        c,
        triples: triples.len() as u64,
        observed_count: None,
        model_count: Some(hits),
        model_mean: Some(mean),
        model_std: Some(var.sqrt()),
        log4_reference: (b as f64).ln().powi(4),
        seed: Some(model.seed),
    })
}

/// Counts triples with `d d' < B` whose shortest vector satisfies
/// `|omega| <= C sqrt(d d')`, optionally only those passing `filter`.
pub fn observed_short_count(
    curve: &Curve,
    b: u64,
    c: f64,
    filter: Option<Membership>,
) -> Result<ExperimentReport> {
    check_bc(b, c)?;
    let lattices = reduced_lattices_up_to(curve, b - 1)?;
    let count = lattices
        .iter()
        .filter(|l| filter.is_none_or(|m| l.passes(m)))
        .filter(|l| l.norm_sq as f64 <= c * c * l.triple.t() as f64)
        .count() as u64;
    Ok(ExperimentReport {
        b,
        c,
        triples: lattices.len() as u64,
        observed_count: Some(count),
        model_count: None,
        model_mean: None,
        model_std: None,
        log4_reference: (b as f64).ln().powi(4),
        seed: None,
    })
}

/// Observed and model counts side by side, as in the `stats` table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    #[serde(rename = "B")]
    pub b: u64,
    #[serde(rename = "C")]
    pub c: f64,
    pub observed: u64,
    pub model_mean: f64,
    pub model_std: f64,
    pub log4_reference: f64,
}

pub fn stats_row(
    curve: &Curve,
    model: &AnnulusModel,
    b: u64,
    c: f64,
    filter: Option<Membership>,
) -> Result<(StatsRow, ExperimentReport)> {
    let observed = observed_short_count(curve, b, c, filter)?;
    let modelled = random_annulus_count(curve, model, b, c)?;
    let row = StatsRow {
        b,
        c,
        observed: observed.observed_count.unwrap_or(0),
        model_mean: modelled.model_mean.unwrap_or(0.0),
        model_std: modelled.model_std.unwrap_or(0.0),
        log4_reference: observed.log4_reference,
    };
    Ok((row, modelled))
}

/// `1 / (t log(t)^{j-3})`, the summand of the heuristic bound.
pub fn bound_term(t: u64, j: f64) -> f64 {
    let t = t as f64;
    1.0 / (t * t.ln().powf(j - 3.0))
}

/// `nu(t)` for every `t <= n` (index 0 unused) by a smallest-prime sieve.
pub fn nu_table(n: u64) -> Vec<u32> {
    let n = n as usize;
    let mut nu = vec![0u32; n + 1];
    for p in 2..=n {
        if nu[p] == 0 {
            let mut m = p;
            while m <= n {
                nu[m] += 1;
                m += p;
            }
        }
    }
    nu
}

/// `sum_{t <= x} 4^nu(t)`.
pub fn four_nu_sum(x: u64) -> u64 {
    nu_table(x)
        .iter()
        .skip(1)
        .map(|&k| 4u64.pow(k))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCheckpoint {
    pub x: u64,
    /// Prefactor times `sum_{2 <= t <= x} 1 / (t log(t)^{j-3})`.
    pub bound_partial: f64,
    pub four_nu_sum: u64,
    /// `four_nu_sum / (x log(x)^3)`.
    pub four_nu_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeuristicBoundReport {
    pub j: f64,
    pub k: f64,
    pub c1: f64,
    pub t_max: u64,
    /// `1 / (C1^{4k} (2k - 1))`.
    pub prefactor: f64,
    pub checkpoints: Vec<BoundCheckpoint>,
}

/// Partial sums of the heuristic bound from `t = 2` and of `sum 4^nu(t)`
/// at `x = 10, 100, ...` and at `t_max`.
pub fn heuristic_bound_report(j: f64, k: f64, c1: f64, t_max: u64) -> Result<HeuristicBoundReport> {
    if t_max < 2 {
        return Err(Error::param("t_max", "T must be at least 2"));
    }
    if !(k > 0.5) || !k.is_finite() {
        return Err(Error::param("k", format!("{k} is not a real > 1/2")));
    }
    if !j.is_finite() {
        return Err(Error::param("j", format!("{j} is not finite")));
    }
    if !(c1 > 0.0 && c1.is_finite()) {
        return Err(Error::param("c1", format!("{c1} is not positive")));
    }
    let prefactor = 1.0 / (c1.powf(4.0 * k) * (2.0 * k - 1.0));
    let nu = nu_table(t_max);
    let mut checkpoints = Vec::new();
    let mut next_mark = 10u64;
    let mut bound = crate::kahan::KahanSum::new();
    let mut four = 0u64;
    for t in 1..=t_max {
        four += 4u64.pow(nu[t as usize]);
        if t >= 2 {
            bound.add(bound_term(t, j));
        }
        if t == next_mark || t == t_max {
            let x = t as f64;
            checkpoints.push(BoundCheckpoint {
                x: t,
                bound_partial: prefactor * bound.value(),
                four_nu_sum: four,
                four_nu_ratio: four as f64 / (x * x.ln().powi(3)),
            });
            if t == next_mark {
                next_mark = next_mark.saturating_mul(10);
            }
        }
    }
    Ok(HeuristicBoundReport {
        j,
        k,
        c1,
        t_max,
        prefactor,
        checkpoints,
    })
}

/// Histogram of `|omega| / sqrt(d d')` over triples with `d d' <= b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerEdgeBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
}

pub fn inner_edge_histogram(
    curve: &Curve,
    b: u64,
    bin_width: f64,
    filter: Option<Membership>,
) -> Result<Vec<InnerEdgeBin>> {
    if !(bin_width > 0.0 && bin_width.is_finite()) {
        return Err(Error::param("bin_width", format!("{bin_width} is not positive")));
    }
    let lattices = reduced_lattices_up_to(curve, b)?;
    let mut counts: Vec<u64> = Vec::new();
    for lat in lattices.iter().filter(|l| filter.is_none_or(|m| l.passes(m))) {
        let ratio = lat.norm() / (lat.triple.t() as f64).sqrt();
        let bin = (ratio / bin_width).floor() as usize;
        if counts.len() <= bin {
            counts.resize(bin + 1, 0);
        }
        counts[bin] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| InnerEdgeBin {
            lo: i as f64 * bin_width,
            hi: (i + 1) as f64 * bin_width,
            count,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn congruent() -> Curve {
        Curve::new(0, -1, 0).unwrap()
    }

    fn cube_root_two() -> Curve {
        Curve::new(0, 0, -2).unwrap()
    }

    #[test]
    fn four_nu_examples() {
        assert_eq!(four_nu_sum(1), 1);
        assert_eq!(four_nu_sum(10), 61);
        assert_eq!(nu_table(30)[30], 3);
    }

    #[test]
    fn bound_term_example() {
        let term = bound_term(2, 4.0);
        assert!((term - 1.0 / (2.0 * 2f64.ln())).abs() < 1e-15);
        assert!((term - 0.7213).abs() < 1e-4);
    }

    #[test]
    fn bound_report_checkpoints() {
        let r = heuristic_bound_report(4.0, 1.0, 0.5, 1000).unwrap();
        let xs: Vec<u64> = r.checkpoints.iter().map(|c| c.x).collect();
        assert_eq!(xs, vec![10, 100, 1000]);
        assert_eq!(r.checkpoints[0].four_nu_sum, 61);
        assert!((r.prefactor - 16.0).abs() < 1e-12);
        let r = heuristic_bound_report(4.0, 1.0, 1.0, 2).unwrap();
        assert!((r.checkpoints[0].bound_partial - bound_term(2, 4.0)).abs() < 1e-15);
        assert!(heuristic_bound_report(4.0, 0.5, 1.0, 10).is_err());
        assert!(heuristic_bound_report(4.0, 1.0, 1.0, 1).is_err());
    }

    #[test]
    fn bound_increments_separate_convergent_from_divergent_exponents() {
        // increments over [T, 10T] on a geometric ladder of T
        let report = |j: f64| heuristic_bound_report(j, 1.0, 1.0, 1_000_000).unwrap();
        let increments = |r: &HeuristicBoundReport| -> Vec<f64> {
            r.checkpoints.windows(2).map(|w| w[1].bound_partial - w[0].bound_partial).collect()
        };
        let conv = increments(&report(5.0));
        assert!(conv.windows(2).all(|w| w[1] < w[0]), "{conv:?}");
        let div = increments(&report(3.0));
        assert!(div.windows(2).all(|w| w[1] >= w[0]), "{div:?}");
    }

    #[test]
    fn area_uniform_sampling_matches_second_moment() {
        let model = AnnulusModel::new(0.5, 1.5, 7).unwrap();
        let t = 9.0;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws: Vec<f64> = (0..100_000)
            .map(|_| {
                let z = model.sample(t, &mut rng);
                z[0] * z[0] + z[1] * z[1]
            })
            .collect();
        let n = draws.len() as f64;
        let mean = draws.iter().sum::<f64>() / n;
        let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let expected = (model.c1.powi(2) * t + model.c2.powi(2) * t * t) / 2.0;
        assert!((mean - expected).abs() <= 3.0 * (var / n).sqrt(), "{mean} vs {expected}");
        for _ in 0..1000 {
            let z = model.sample(t, &mut rng);
            let r = z[0].hypot(z[1]);
            assert!(r >= model.inner_radius(t) - 1e-12 && r <= model.outer_radius(t) + 1e-12);
        }
    }

    #[test]
    fn model_counts_are_seeded_and_monotone_in_c() {
        let e = congruent();
        let model = AnnulusModel::new(0.3, 1.1, 42).unwrap();
        let a = random_annulus_count(&e, &model, 30, 0.8).unwrap();
        let b = random_annulus_count(&e, &model, 30, 0.8).unwrap();
        assert_eq!(a, b);
        let mut last = 0;
        for c in [0.2, 0.4, 0.8, 1.6, 3.2] {
            let r = random_annulus_count(&e, &model, 30, c).unwrap();
            assert!(r.model_count.unwrap() >= last);
            last = r.model_count.unwrap();
        }
        let other_seed = AnnulusModel::new(0.3, 1.1, 43).unwrap();
        let c = random_annulus_count(&e, &other_seed, 200, 0.8).unwrap();
        let d = random_annulus_count(&e, &model, 200, 0.8).unwrap();
        assert_eq!(c.model_mean, d.model_mean);
        assert_eq!(c.triples, d.triples);
    }

    #[test]
    fn single_triple_cases() {
        let e = cube_root_two();
        let model = AnnulusModel::new(0.5, 1.5, 1).unwrap();
        let r = random_annulus_count(&e, &model, 2, 1.0).unwrap();
        assert_eq!(r.triples, 1);
        assert!(r.model_count.unwrap() <= 1);

        let r = observed_short_count(&e, 2, 1.0, None).unwrap();
        assert_eq!(r.observed_count, Some(1));
        let r = observed_short_count(&congruent(), 2, 1.0, Some(Membership::StrictPsi)).unwrap();
        assert_eq!(r.observed_count, Some(0));
        assert!(observed_short_count(&e, 1, 1.0, None).is_err());
        assert!(AnnulusModel::new(1.0, 1.0, 0).is_err());
    }

    #[test]
    fn observed_counts_grow_with_b() {
        let e = congruent();
        let mut last = 0;
        for b in [2, 5, 10, 20, 40, 80] {
            let n = observed_short_count(&e, b, 1.0, Some(Membership::FNonzero)).unwrap().observed_count.unwrap();
            assert!(n >= last);
            last = n;
        }
    }

    #[test]
    fn inner_edge_histogram_counts_all_triples() {
        let e = cube_root_two();
        let bins = inner_edge_histogram(&e, 30, 0.25, None).unwrap();
        let total: u64 = bins.iter().map(|b| b.count).sum();
        assert_eq!(total as usize, triples_up_to(&e, 30).unwrap().len());
    }
}
