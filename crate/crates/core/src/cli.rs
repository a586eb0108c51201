//! The `qtwist` command line: argument parsing, validation, dispatch and
//! JSON / CSV rendering.
//!
//! Exit status is 0 on success, 1 when the mathematics rejects an input
//! (or `verify` finds a counterexample) and 2 for configuration errors,
//! including curves with a repeated root.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::curve::{Curve, WindowX};
use crate::error::{Error, Result};
use crate::heuristics::{
    heuristic_bound_report, inner_edge_histogram, stats_row, AnnulusModel, StatsRow,
};
use crate::lattice::{
    decompose_pair, fit_annulus, omega_d, q_partial_with, q_term, reduced_lattices_up_to,
    shortest_vectors, ReducedLattice, TwistTriple, Vector, MAX_D,
};
use crate::psi::{classify_pair, rank_mine, RankRow, DEFAULT_WITNESS_CAP};
use crate::series::{r_partial_with, s_partial_with, Membership, SeriesKind, SumParams, SumReport};
use crate::verify::{verify, VerifyScales};

pub const THREADS_ENV: &str = "QTWIST_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "qtwist", version, about = "Quadratic twists, truncated series and twist lattices")]
pub struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,

    #[arg(long, global = true, value_enum, default_value = "json")]
    pub format: Format,

    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct CurveArg {
    /// Coefficients `a,b,c` of `x^3 + a x^2 + b x + c`.
    #[arg(long, allow_hyphen_values = true, default_value = "0,-1,0")]
    pub curve: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Truncated S, R or Q series.
    Sum {
        #[command(flatten)]
        curve: CurveArg,
        #[arg(long, default_value = "S")]
        series: SeriesKind,
        #[arg(long, default_value_t = 1.0)]
        j: f64,
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        /// Box bound N (S and R).
        #[arg(long = "box", default_value_t = 10)]
        n: u64,
        /// Level bound B (Q).
        #[arg(long, default_value_t = 10)]
        bound: u64,
        /// `lo..hi,...` open intervals, or `broad` for the default broad set.
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
        #[arg(long, default_value = "strict_psi")]
        membership: Membership,
        /// Include per-twist (S, R) or per-level (Q) subtotals.
        #[arg(long)]
        breakdown: bool,
    },
    /// Most frequent twists D in the box, with witnesses and points.
    Rank {
        #[command(flatten)]
        curve: CurveArg,
        #[arg(long = "box", default_value_t = 100)]
        n: u64,
        #[arg(long, allow_hyphen_values = true)]
        window: Option<String>,
        #[arg(long, default_value_t = 20)]
        top: usize,
        #[arg(long, default_value_t = DEFAULT_WITNESS_CAP)]
        witness_cap: usize,
    },
    /// Roots of f modulo d^2.
    Omega {
        #[command(flatten)]
        curve: CurveArg,
        #[arg(long)]
        d: u64,
    },
    /// Reduced basis of one lattice, or of every lattice with d d' <= bound.
    Reduce {
        #[command(flatten)]
        curve: CurveArg,
        #[arg(long, requires_all = ["d", "d_prime"], conflicts_with = "bound")]
        alpha: Option<u64>,
        #[arg(long)]
        d: Option<u64>,
        #[arg(long)]
        d_prime: Option<u64>,
        #[arg(long)]
        bound: Option<u64>,
        #[arg(long, default_value_t = 1.0)]
        j: f64,
        #[arg(long, default_value_t = 1.0)]
        k: f64,
    },
    /// The triple (alpha, d, d') whose lattice holds (u, v) at level t.
    Decompose {
        #[command(flatten)]
        curve: CurveArg,
        #[arg(long, allow_hyphen_values = true)]
        u: i64,
        #[arg(long)]
        v: i64,
        /// Level; every t with t^2 | F(u, v) when omitted.
        #[arg(long)]
        t: Option<u64>,
    },
    /// Random-annulus experiments and heuristic bound diagnostics.
    Stats {
        #[command(flatten)]
        curve: CurveArg,
        #[arg(long, value_enum, default_value = "annulus")]
        kind: StatsKind,
        /// Level bounds B (annulus) or the single bound (inner-edge).
        #[arg(long, value_delimiter = ',', default_values_t = [10u64, 20, 40, 80])]
        b: Vec<u64>,
        /// Disc radii factors C.
        #[arg(long, value_delimiter = ',', default_values_t = [1.0f64])]
        c: Vec<f64>,
        /// Annulus constants; fitted over d d' <= fit-bound when omitted.
        #[arg(long)]
        c1: Option<f64>,
        #[arg(long)]
        c2: Option<f64>,
        #[arg(long, default_value_t = 40)]
        fit_bound: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Count only shortest vectors of this kind.
        #[arg(long)]
        membership: Option<Membership>,
        #[arg(long, default_value_t = 4.0)]
        j: f64,
        #[arg(long, default_value_t = 1.0)]
        k: f64,
        /// Largest t of the bound diagnostic.
        #[arg(long, default_value_t = 100_000)]
        t_max: u64,
        #[arg(long, default_value_t = 0.25)]
        bin_width: f64,
    },
    /// Runs the invariant suite against brute-force oracles.
    Verify {
        #[command(flatten)]
        curve: CurveArg,
        /// Smaller problem sizes for a fast smoke run.
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        rel_tol: Option<f64>,
        #[arg(long)]
        zeta_tol: Option<f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StatsKind {
    Annulus,
    Bound,
    InnerEdge,
}

/// Validated settings shared by every subcommand.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub curve: Curve,
    pub threads: Option<usize>,
    pub format: Format,
    pub output: Option<PathBuf>,
}

pub fn parse_curve(spec: &str) -> Result<Curve> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let coeffs: Vec<i64> = parts
        .iter()
        .map(|p| p.parse::<i64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::param("curve", format!("{spec:?}: {e}")))?;
    match coeffs[..] {
        [a, b, c] => Curve::new(a, b, c),
        _ => Err(Error::param("curve", format!("{spec:?} is not of the form a,b,c"))),
    }
}

/// `broad` selects the curve's default broad window.
pub fn parse_window(curve: &Curve, spec: Option<&str>) -> Result<Option<WindowX>> {
    match spec {
        None => Ok(None),
        Some("broad") => Ok(Some(curve.default_broad_window())),
        Some(s) => s.parse().map(Some),
    }
}

impl RunConfig {
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        if cli.threads == Some(0) {
            return Err(Error::param("threads", "must be at least 1"));
        }
        let spec = match &cli.command {
            Command::Sum { curve, .. }
            | Command::Rank { curve, .. }
            | Command::Omega { curve, .. }
            | Command::Reduce { curve, .. }
            | Command::Decompose { curve, .. }
            | Command::Stats { curve, .. }
            | Command::Verify { curve, .. } => &curve.curve,
        };
        Ok(RunConfig {
            curve: parse_curve(spec)?,
            threads: cli.threads,
            format: cli.format,
            output: cli.output.clone(),
        })
    }
}

/// Column-oriented view of a report for CSV output.
struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

struct Rendered {
    json: Value,
    table: Table,
    /// Nonzero exit status despite a complete report (failed `verify`).
    failure: Option<String>,
}

fn to_json<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("reports serialize")
}

fn opt<T: ToString>(x: &Option<T>) -> String {
    x.as_ref().map(ToString::to_string).unwrap_or_default()
}

fn vec_str(w: Vector) -> String {
    format!("({}, {})", w[0], w[1])
}

fn sum_table(report: &SumReport) -> Table {
    if let Some(rows) = &report.breakdown {
        return Table {
            header: vec!["key", "terms", "value"],
            rows: rows
                .iter()
                .map(|r| vec![r.key.to_string(), r.terms.to_string(), r.value.to_string()])
                .collect(),
        };
    }
    let [a, b, c] = report.curve;
    Table {
        header: vec![
            "series", "a", "b", "c", "j", "k", "truncation", "window", "membership", "value",
            "term_count", "excluded_count", "tie_count", "kahan_error_bound",
        ],
        rows: vec![vec![
            report.series.to_string(),
            a.to_string(),
            b.to_string(),
            c.to_string(),
            report.j.to_string(),
            report.k.to_string(),
            report.truncation.to_string(),
            opt(&report.window),
            opt(&report.membership),
            report.value.to_string(),
            report.term_count.to_string(),
            report.excluded_count.to_string(),
            report.tie_count.to_string(),
            report.kahan_error_bound.to_string(),
        ]],
    }
}

/// One row of the `reduce` report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReduceRow {
    pub alpha: u64,
    pub d: u64,
    pub d_prime: u64,
    pub omega: Vector,
    pub omega_prime: Vector,
    pub norm_sq: u128,
    pub in_psi: bool,
    pub f_nonzero: bool,
    pub tie_changes_membership: bool,
    /// `(t / |omega|^2)^{2k} / max(1, log t)^j`.
    pub term_value: f64,
}

impl ReduceRow {
    pub fn new(lat: &ReducedLattice, j: f64, k: f64) -> Self {
        ReduceRow {
            alpha: lat.triple.alpha,
            d: lat.triple.d,
            d_prime: lat.triple.d_prime,
            omega: lat.omega,
            omega_prime: lat.omega_prime,
            norm_sq: lat.norm_sq,
            in_psi: lat.in_psi,
            f_nonzero: lat.f_nonzero,
            tie_changes_membership: lat.tie_changes_membership,
            term_value: q_term(lat, j, k),
        }
    }
}

/// One row of the `decompose` report.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecomposeRow {
    pub u: i64,
    pub v: i64,
    pub t: u64,
    pub alpha: u64,
    pub d: u64,
    pub d_prime: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub curve: [i64; 3],
    pub model: AnnulusModel,
    /// Bound of the fit, when the constants were fitted.
    pub fit_bound: Option<u64>,
    pub membership: Option<Membership>,
    pub rows: Vec<StatsRow>,
    /// Model counts of the seeded draw, aligned with `rows`.
    pub model_counts: Vec<u64>,
}

fn curve_array(curve: &Curve) -> [i64; 3] {
    let (a, b, c) = curve.coefficients();
    [a, b, c]
}

fn divisors_of_square_root(curve: &Curve, u: i64, v: i64) -> Result<Vec<u64>> {
    let class = classify_pair(curve, u, v)?;
    let mut divisors = vec![1u64];
    for (p, e) in &class.m_factors {
        let Ok(p) = u64::try_from(p) else { continue };
        let mut next = Vec::new();
        for &d in &divisors {
            let mut q = d;
            for _ in 0..=*e {
                if q > MAX_D {
                    break;
                }
                next.push(q);
                q = q.saturating_mul(p);
            }
        }
        divisors = next;
    }
    divisors.sort_unstable();
    Ok(divisors)
}

fn dispatch(cfg: &RunConfig, command: &Command) -> Result<Rendered> {
    let curve = &cfg.curve;
    match command {
        Command::Sum { series, j, k, n, bound, window, membership, breakdown, .. } => {
            let report = match series {
                SeriesKind::S | SeriesKind::R => {
                    let mut params = SumParams::new(*j, *k, *n)?;
                    params.window = parse_window(curve, window.as_deref())?;
                    if *series == SeriesKind::S {
                        s_partial_with(curve, &params, *breakdown)?
                    } else {
                        r_partial_with(curve, &params, *breakdown)?
                    }
                }
                SeriesKind::Q => {
                    if window.is_some() {
                        return Err(Error::param("window", "not used by the Q series"));
                    }
                    q_partial_with(curve, *j, *k, *bound, *membership, *breakdown)?
                }
            };
            Ok(Rendered { json: to_json(&report), table: sum_table(&report), failure: None })
        }
        Command::Rank { n, window, top, witness_cap, .. } => {
            let window = parse_window(curve, window.as_deref())?;
            let hist = rank_mine(curve, *n, window.as_ref(), *witness_cap)?;
            let rows = hist
                .top(*top)
                .into_iter()
                .map(|e| RankRow::from_entry(curve, e))
                .collect::<Result<Vec<_>>>()?;
            let table = Table {
                header: vec!["D", "count", "sample_witnesses", "sample_points"],
                rows: rows
                    .iter()
                    .map(|r| {
                        let w: Vec<String> =
                            r.sample_witnesses.iter().map(|w| format!("{}/{}", w[0], w[1])).collect();
                        let p: Vec<String> =
                            r.sample_points.iter().map(|p| format!("({}, {})", p.x, p.y)).collect();
                        vec![r.d.to_string(), r.count.to_string(), w.join(";"), p.join(";")]
                    })
                    .collect(),
            };
            Ok(Rendered { json: to_json(&rows), table, failure: None })
        }
        Command::Omega { d, .. } => {
            let roots = omega_d(curve, *d)?;
            let table = Table {
                header: vec!["d", "residue"],
                rows: roots.residues.iter().map(|r| vec![d.to_string(), r.to_string()]).collect(),
            };
            Ok(Rendered { json: to_json(&roots), table, failure: None })
        }
        Command::Reduce { alpha, d, d_prime, bound, j, k, .. } => {
            crate::series::validate_exponents(*j, *k)?;
            let lattices = match (alpha, d, d_prime, bound) {
                (Some(alpha), Some(d), Some(dp), None) => {
                    vec![shortest_vectors(curve, &TwistTriple::new(curve, *alpha, *d, *dp)?)]
                }
                (None, None, None, Some(b)) => reduced_lattices_up_to(curve, *b)?,
                _ => {
                    return Err(Error::param(
                        "alpha",
                        "give either --alpha, --d, --d-prime or --bound",
                    ))
                }
            };
            let rows: Vec<ReduceRow> = lattices.iter().map(|l| ReduceRow::new(l, *j, *k)).collect();
            let table = Table {
                header: vec![
                    "alpha", "d", "d_prime", "omega", "omega_prime", "norm_sq", "in_psi", "term_value",
                ],
                rows: rows
                    .iter()
                    .map(|r| {
                        vec![
                            r.alpha.to_string(),
                            r.d.to_string(),
                            r.d_prime.to_string(),
                            vec_str(r.omega),
                            vec_str(r.omega_prime),
                            r.norm_sq.to_string(),
                            r.in_psi.to_string(),
                            r.term_value.to_string(),
                        ]
                    })
                    .collect(),
            };
            Ok(Rendered { json: to_json(&rows), table, failure: None })
        }
        Command::Decompose { u, v, t, .. } => {
            let levels = match t {
                Some(t) => vec![*t],
                None => divisors_of_square_root(curve, *u, *v)?,
            };
            let rows = levels
                .into_iter()
                .map(|t| {
                    let tr = decompose_pair(curve, *u, *v, t)?;
                    Ok(DecomposeRow { u: *u, v: *v, t, alpha: tr.alpha, d: tr.d, d_prime: tr.d_prime })
                })
                .collect::<Result<Vec<_>>>()?;
            let table = Table {
                header: vec!["u", "v", "t", "alpha", "d", "d_prime"],
                rows: rows
                    .iter()
                    .map(|r| {
                        [r.u.to_string(), r.v.to_string(), r.t.to_string(), r.alpha.to_string(), r.d.to_string(), r.d_prime.to_string()]
                            .to_vec()
                    })
                    .collect(),
            };
            Ok(Rendered { json: to_json(&rows), table, failure: None })
        }
        Command::Stats { kind, b, c, c1, c2, fit_bound, seed, membership, j, k, t_max, bin_width, .. } => {
            match kind {
                StatsKind::Annulus => {
                    let (model, fit_bound) = match (c1, c2) {
                        (Some(c1), Some(c2)) => (AnnulusModel::new(*c1, *c2, *seed)?, None),
                        (None, None) => {
                            let fit = fit_annulus(curve, *fit_bound)?;
                            (AnnulusModel::from_fit(&fit, *seed)?, Some(*fit_bound))
                        }
                        _ => return Err(Error::param("c1", "give both --c1 and --c2 or neither")),
                    };
                    let mut rows = Vec::new();
                    let mut counts = Vec::new();
                    for &bb in b {
                        for &cc in c {
                            let (row, modelled) = stats_row(curve, &model, bb, cc, *membership)?;
                            rows.push(row);
                            counts.push(modelled.model_count.unwrap_or(0));
                        }
                    }
                    let table = Table {
                        header: vec!["B", "C", "observed", "model_mean", "model_std", "log4_reference"],
                        rows: rows
                            .iter()
                            .map(|r| {
                                vec![
                                    r.b.to_string(),
                                    r.c.to_string(),
                                    r.observed.to_string(),
                                    r.model_mean.to_string(),
                                    r.model_std.to_string(),
                                    r.log4_reference.to_string(),
                                ]
                            })
                            .collect(),
                    };
                    let report = StatsReport {
                        curve: curve_array(curve),
                        model,
                        fit_bound,
                        membership: *membership,
                        rows,
                        model_counts: counts,
                    };
                    Ok(Rendered { json: to_json(&report), table, failure: None })
                }
                StatsKind::Bound => {
                    let c1 = match c1 {
                        Some(c1) => *c1,
                        None => fit_annulus(curve, *fit_bound)?.c1,
                    };
                    let report = heuristic_bound_report(*j, *k, c1, *t_max)?;
                    let table = Table {
                        header: vec!["x", "bound_partial", "four_nu_sum", "four_nu_ratio"],
                        rows: report
                            .checkpoints
                            .iter()
                            .map(|p| {
                                vec![
                                    p.x.to_string(),
                                    p.bound_partial.to_string(),
                                    p.four_nu_sum.to_string(),
                                    p.four_nu_ratio.to_string(),
                                ]
                            })
                            .collect(),
                    };
                    Ok(Rendered { json: to_json(&report), table, failure: None })
                }
                StatsKind::InnerEdge => {
                    let bound = *b.iter().max().expect("clap supplies a default");
                    let bins = inner_edge_histogram(curve, bound, *bin_width, *membership)?;
                    let table = Table {
                        header: vec!["lo", "hi", "count"],
                        rows: bins
                            .iter()
                            .map(|x| vec![x.lo.to_string(), x.hi.to_string(), x.count.to_string()])
                            .collect(),
                    };
                    let json = json!({
                        "curve": curve_array(curve),
                        "bound": bound,
                        "bin_width": bin_width,
                        "membership": membership,
                        "bins": bins,
                    });
                    Ok(Rendered { json, table, failure: None })
                }
            }
        }
        Command::Verify { quick, rel_tol, zeta_tol, .. } => {
            let mut scales = if *quick { quick_scales() } else { VerifyScales::default() };
            if let Some(t) = rel_tol {
                scales.rel_tol = *t;
            }
            if let Some(t) = zeta_tol {
                scales.zeta_tol = *t;
            }
            if !(scales.rel_tol > 0.0 && scales.zeta_tol > 0.0) {
                return Err(Error::param("rel_tol", "tolerances must be positive"));
            }
            scales.threads = cfg.threads.unwrap_or_else(rayon::current_num_threads).max(2);
            let report = verify(curve, &scales)?;
            let failure = report
                .first_failure()
                .map(|f| serde_json::to_string(f).expect("serializable"));
            let table = Table {
                header: vec!["name", "passed", "seconds", "detail"],
                rows: report
                    .checks
                    .iter()
                    .map(|c| vec![c.name.clone(), c.passed.to_string(), c.seconds.to_string(), c.detail.clone()])
                    .collect(),
            };
            Ok(Rendered { json: to_json(&report), table, failure })
        }
    }
}

pub fn quick_scales() -> VerifyScales {
    VerifyScales {
        factor_limit: 2000,
        identity_box: 30,
        sandwich_box: 40,
        regroup_box: 15,
        partition_box: 30,
        partition_t: 15,
        omega_d: 30,
        reduction_t: 20,
        multiplicative_box: 80,
        mining_box: 40,
        q_bound: 20,
        ..VerifyScales::default()
    }
}

fn write_rendered(rendered: &Rendered, format: Format, out: &mut dyn Write) -> io::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &rendered.json)?;
            writeln!(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(&rendered.table.header)?;
            for row in &rendered.table.rows {
                w.write_record(row)?;
            }
            w.flush()
        }
    }
}

fn exit_code(e: &Error) -> i32 {
    if e.is_config_error() {
        2
    } else {
        1
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let cfg = match RunConfig::from_cli(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit_code(&e);
        }
    };
    let work = || dispatch(&cfg, &cli.command);
    let result = match cfg.threads {
        Some(n) => crate::verify::with_threads(n, work).and_then(|r| r),
        None => work(),
    };
    let rendered = match result {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit_code(&e);
        }
    };
    let written = match &cfg.output {
        Some(path) => File::create(path).and_then(|mut f| write_rendered(&rendered, cfg.format, &mut f)),
        None => write_rendered(&rendered, cfg.format, out),
    };
    if let Err(e) = written {
        let _ = writeln!(err, "error: cannot write report: {e}");
        return 1;
    }
    if let Some(first) = rendered.failure {
        let _ = writeln!(err, "verification failed: {first}");
        return 1;
    }
    0
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["qtwist"];
        full.extend_from_slice(args);
        let code = run(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn sum_example() {
        let (code, out, _) =
            run_str(&["sum", "--curve", "0,-1,0", "--series", "S", "--j", "1", "--k", "1", "--box", "2"]);
        assert_eq!(code, 0);
        let report: SumReport = serde_json::from_str(&out).unwrap();
        assert!((report.value - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn omega_example() {
        let (code, out, _) = run_str(&["omega", "--curve", "0,-1,0", "--d", "2"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["residues"], json!([0, 1, 3]));
    }

    #[test]
    fn repeated_root_is_config_error() {
        let (code, _, err) = run_str(&["sum", "--curve", "0,0,0", "--box", "3"]);
        assert_eq!(code, 2);
        assert!(err.contains("repeated root"), "{err}");
    }

    #[test]
    fn config_errors_name_the_field() {
        let (code, _, err) = run_str(&["sum", "--curve", "0,-1,0", "--k", "0.5"]);
        assert_eq!(code, 2);
        assert!(err.contains("invalid k"), "{err}");
        let (code, _, err) = run_str(&["sum", "--curve", "1,2", "--box", "3"]);
        assert_eq!(code, 2);
        assert!(err.contains("curve"), "{err}");
        let (code, _, err) = run_str(&["sum", "--window", "3..1"]);
        assert_eq!(code, 2);
        assert!(err.contains("window"), "{err}");
        let (code, _, _) = run_str(&["sum", "--box", "nope"]);
        assert_eq!(code, 2);
    }

    #[test]
    fn domain_error_exits_one() {
        // (1, 1) has F = 0 on x^3 - x
        let (code, _, err) = run_str(&["decompose", "--curve", "0,-1,0", "--u", "1", "--v", "1", "--t", "1"]);
        assert_eq!(code, 1, "{err}");
    }

    #[test]
    fn decompose_lists_all_levels() {
        // F(3, 1) = 24 = 6 * 2^2
        let (code, out, _) = run_str(&["decompose", "--curve", "0,-1,0", "--u", "3", "--v", "1"]);
        assert_eq!(code, 0);
        let rows: Vec<DecomposeRow> = serde_json::from_str(&out).unwrap();
        assert_eq!(rows.iter().map(|r| r.t).collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn csv_output_has_stable_columns() {
        let (code, out, _) = run_str(&[
            "stats", "--curve", "0,0,-2", "--b", "5,10", "--c", "1", "--c1", "0.5", "--c2", "1.5", "--format", "csv",
        ]);
        assert_eq!(code, 0);
        let mut lines = out.lines();
        assert_eq!(lines.next(), Some("B,C,observed,model_mean,model_std,log4_reference"));
        assert_eq!(lines.count(), 2);
    }

    #[test]
    fn reduce_single_triple() {
        let (code, out, _) = run_str(&["reduce", "--curve", "0,0,-2", "--alpha", "3", "--d", "5", "--d-prime", "1"]);
        assert_eq!(code, 0);
        let rows: Vec<ReduceRow> = serde_json::from_str(&out).unwrap();
        assert_eq!(rows[0].omega, [3, 1]);
        assert_eq!(rows[0].norm_sq, 10);
    }
}
