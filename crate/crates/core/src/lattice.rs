//! Lattices indexed by triples `(alpha, d, d')`.
//!
//! For `alpha` a root of `f` modulo `d^2` and `gcd(d, d') = 1`, the lattice
//! `L = {(u, v) : u = alpha v mod d^2, v = 0 mod d'^2}` has determinant
//! `(d d')^2`, and every primitive `(u, v)` with `t^2 | F(u, v)` lies in
//! exactly one such lattice with `d d' = t`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{exact_sqrt_u128, factorize_u64, inverse_mod};
use crate::curve::{height_unchecked, Curve};
use crate::error::{Error, Result};
use crate::kahan::KahanSum;
use crate::psi::check_box;
use crate::series::{validate_exponents, BreakdownRow, Membership, SeriesKind, SumParams, SumReport};

/// Largest `d` handled; keeps `d^2` and lattice norms inside `i128` with room.
pub const MAX_D: u64 = 1 << 31;

/// Residues `alpha` in `[0, d^2)` with `f(alpha) = 0 mod d^2`, sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RootSet {
    pub d: u64,
    pub residues: Vec<u64>,
}

impl RootSet {
    pub fn modulus(&self) -> u128 {
        self.d as u128 * self.d as u128
    }

    pub fn len(&self) -> usize {
        self.residues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.residues.is_empty()
    }
}

/// Roots of `f` modulo `p^e`, lifted one power of `p` at a time.
///
/// A root `r` mod `p^i` with `f'(r)` a unit mod `p` has exactly one lift,
/// given by the Newton step; singular roots are lifted by checking all `p`
/// candidates `r + s p^i`.
fn roots_mod_prime_power(curve: &Curve, p: u64, e: u32) -> Vec<u128> {
    let p = p as u128;
    let mut roots: Vec<u128> = (0..p).filter(|&r| curve.f_mod(r, p) == 0).collect();
    let mut modulus = p;
    for _ in 1..e {
        let next = modulus * p;
        let mut lifted = Vec::new();
        for &r in &roots {
            let slope = curve.f_prime_mod(r, p);
            if slope != 0 {
                // r' = r - f(r) / f'(r), where f(r) is divisible by p^i
                let fr = curve.f_mod(r, next);
                let q = fr / modulus;
                let inv = inverse_mod(slope as i128, p).expect("unit slope");
                let s = (p - (q % p) * inv % p) % p;
                lifted.push(r + s * modulus);
            } else {
                for s in 0..p {
                    let cand = r + s * modulus;
                    if curve.f_mod(cand, next) == 0 {
                        lifted.push(cand);
                    }
                }
            }
        }
        roots = lifted;
        modulus = next;
        if roots.is_empty() {
            break;
        }
    }
    roots
}

/// Combines residue sets for pairwise coprime moduli by CRT.
fn crt_combine(parts: &[(u128, Vec<u128>)]) -> Vec<u128> {
    let mut acc: Vec<u128> = vec![0];
    let mut modulus: u128 = 1;
    for (m, residues) in parts {
        let inv = inverse_mod(modulus as i128, *m).expect("coprime moduli");
        let mut next = Vec::with_capacity(acc.len() * residues.len());
        for &x in &acc {
            for &r in residues {
                // y = x mod modulus, y = r mod m
                let diff = (r + m - x % m) % m;
                let step = diff * inv % m;
                next.push(x + modulus * step);
            }
        }
        acc = next;
        modulus *= m;
    }
    acc.sort_unstable();
    acc
}

/// All `alpha` mod `d^2` with `f(alpha) = 0 mod d^2`.
pub fn omega_d(curve: &Curve, d: u64) -> Result<RootSet> {
    if d == 0 || d > MAX_D {
        return Err(Error::param("d", format!("{d} is outside 1..={MAX_D}")));
    }
    let mut parts = Vec::new();
    for (p, e) in factorize_u64(d) {
        let roots = roots_mod_prime_power(curve, p, 2 * e);
        if roots.is_empty() {
            return Ok(RootSet { d, residues: Vec::new() });
        }
        parts.push(((p as u128).pow(2 * e), roots));
    }
    let residues = crt_combine(&parts).into_iter().map(|r| r as u64).collect();
    Ok(RootSet { d, residues })
}

/// Index `(alpha, d, d')` of the lattice `L_{alpha, d, d'}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TwistTriple {
    pub alpha: u64,
    pub d: u64,
    pub d_prime: u64,
}

impl TwistTriple {
    /// Checks `gcd(d, d') = 1`, `alpha < d^2` and `f(alpha) = 0 mod d^2`.
    pub fn new(curve: &Curve, alpha: u64, d: u64, d_prime: u64) -> Result<Self> {
        if d == 0 || d_prime == 0 || d > MAX_D || d_prime > MAX_D {
            return Err(Error::param("d", "d and d' must be in 1..=2^31"));
        }
        if d.gcd(&d_prime) != 1 {
            return Err(Error::param("d_prime", format!("gcd({d}, {d_prime}) != 1")));
        }
        let m = d as u128 * d as u128;
        if alpha as u128 >= m || curve.f_mod(alpha as u128, m) != 0 {
            return Err(Error::param(
                "alpha",
                format!("{alpha} is not a root of f modulo {d}^2"),
            ));
        }
        Ok(TwistTriple { alpha, d, d_prime })
    }

    /// `t = d d'`.
    pub fn t(&self) -> u64 {
        self.d * self.d_prime
    }

    pub fn contains(&self, u: i64, v: i64) -> bool {
        let m = self.d as i128 * self.d as i128;
        let mp = self.d_prime as i128 * self.d_prime as i128;
        (v as i128).rem_euclid(mp) == 0
            && (u as i128 - self.alpha as i128 * v as i128).rem_euclid(m) == 0
    }

    /// `{(d^2, 0), (alpha d'^2, d'^2)}`, of determinant `(d d')^2`.
    pub fn initial_basis(&self) -> [[i128; 2]; 2] {
        let m = self.d as i128 * self.d as i128;
        let mp = self.d_prime as i128 * self.d_prime as i128;
        [[m, 0], [self.alpha as i128 * mp, mp]]
    }
}

pub type Vector = [i64; 2];

fn dot(x: [i128; 2], y: [i128; 2]) -> i128 {
    x[0] * y[0] + x[1] * y[1]
}

pub fn norm_sq(w: Vector) -> u128 {
    let (u, v) = (w[0] as i128, w[1] as i128);
    (u * u + v * v) as u128
}

/// Lagrange-Gauss reduction. Returns `(a, b)` spanning the same lattice
/// with `|a| <= |b|` and `|<a, b>| <= |a|^2 / 2`.
pub fn gauss_reduce(mut a: [i128; 2], mut b: [i128; 2]) -> ([i128; 2], [i128; 2]) {
    if dot(a, a) > dot(b, b) {
        std::mem::swap(&mut a, &mut b);
    }
    loop {
        let aa = dot(a, a);
        // nearest integer to <a, b> / <a, a>
        let q = (2 * dot(a, b) + aa).div_euclid(2 * aa);
        b = [b[0] - q * a[0], b[1] - q * a[1]];
        if dot(b, b) >= aa {
            return (a, b);
        }
        std::mem::swap(&mut a, &mut b);
    }
}

/// Sign representative with `v > 0`, or `v = 0` and `u > 0`.
fn canonical(w: [i128; 2]) -> [i128; 2] {
    if w[1] < 0 || (w[1] == 0 && w[0] < 0) {
        [-w[0], -w[1]]
    } else {
        w
    }
}

/// Tie rule among canonical vectors of equal norm: prefer `v > 0`, then the
/// smaller `u`.
fn tie_key(w: &[i128; 2]) -> (bool, i128) {
    (w[1] == 0, w[0])
}

/// Both successive minima of the lattice of a triple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReducedLattice {
    pub triple: TwistTriple,
    /// `[omega, omega_prime]`, a basis of the lattice.
    pub basis: [Vector; 2],
    pub omega: Vector,
    pub omega_prime: Vector,
    pub norm_sq: u128,
    pub omega_prime_norm_sq: u128,
    /// `omega` primitive and `F(omega) != 0`.
    pub in_psi: bool,
    pub f_nonzero: bool,
    /// Number of minimal vectors up to sign.
    pub minimal_count: usize,
    /// Some minimal vector disagrees with `omega` on `in_psi`.
    pub tie_changes_membership: bool,
}

impl ReducedLattice {
    pub fn passes(&self, membership: Membership) -> bool {
        match membership {
            Membership::StrictPsi => self.in_psi,
            Membership::FNonzero => self.f_nonzero,
        }
    }

    pub fn norm(&self) -> f64 {
        (self.norm_sq as f64).sqrt()
    }
}

fn psi_flags(curve: &Curve, w: Vector) -> (bool, bool) {
    let f_nonzero = !curve.eval_form(w[0], w[1]).is_zero();
    let primitive = w[0].unsigned_abs().gcd(&w[1].unsigned_abs()) == 1;
    (primitive && f_nonzero, f_nonzero)
}

/// Shortest vector `omega` and shortest vector independent of it.
///
/// Among several shortest vectors, `omega` is the one with `v > 0` and
/// smallest `u`; if all have `v = 0` it is the one with `u > 0`. The same
/// rule picks `omega_prime`.
pub fn shortest_vectors(curve: &Curve, triple: &TwistTriple) -> ReducedLattice {
    let [b1, b2] = triple.initial_basis();
    let (a, b) = gauss_reduce(b1, b2);

    // In a reduced basis both minima are attained by small combinations.
    let mut candidates: Vec<[i128; 2]> = Vec::with_capacity(24);
    for m in -2i128..=2 {
        for n in -2i128..=2 {
            if m == 0 && n == 0 {
                continue;
            }
            let w = canonical([m * a[0] + n * b[0], m * a[1] + n * b[1]]);
            if !candidates.contains(&w) {
                candidates.push(w);
            }
        }
    }
    let min_norm = candidates.iter().map(|w| dot(*w, *w)).min().expect("nonempty");
    let mut minimal: Vec<[i128; 2]> = candidates
        .iter()
        .copied()
        .filter(|w| dot(*w, *w) == min_norm)
        .collect();
    minimal.sort_by_key(tie_key);
    let omega = minimal[0];

    let independent = candidates
        .iter()
        .copied()
        .filter(|w| w[0] * omega[1] - w[1] * omega[0] != 0);
    let second_norm = independent.clone().map(|w| dot(w, w)).min().expect("rank 2");
    let omega_prime = independent
        .filter(|w| dot(*w, *w) == second_norm)
        .min_by_key(tie_key)
        .expect("nonempty");

    let to_vec = |w: [i128; 2]| -> Vector { [w[0] as i64, w[1] as i64] };
    let omega_v = to_vec(omega);
    let (in_psi, f_nonzero) = psi_flags(curve, omega_v);
    let tie_changes_membership = minimal
        .iter()
        .skip(1)
        .any(|w| psi_flags(curve, to_vec(*w)).0 != in_psi);

    ReducedLattice {
        triple: *triple,
        basis: [omega_v, to_vec(omega_prime)],
        omega: omega_v,
        omega_prime: to_vec(omega_prime),
        norm_sq: min_norm as u128,
        omega_prime_norm_sq: second_norm as u128,
        in_psi,
        f_nonzero,
        minimal_count: minimal.len(),
        tie_changes_membership,
    }
}

/// The unique triple with `d d' = t` whose lattice contains `(u, v)`:
/// `d^2 = gcd(t^2, v^3 f(u/v))`, `d'^2 = gcd(t^2, v)`, `alpha = u / v mod d^2`.
pub fn decompose_pair(curve: &Curve, u: i64, v: i64, t: u64) -> Result<TwistTriple> {
    if t == 0 || t > MAX_D {
        return Err(Error::param("t", format!("{t} is outside 1..={MAX_D}")));
    }
    if v == 0 || u.unsigned_abs().gcd(&v.unsigned_abs()) != 1 {
        return Err(Error::NotReduced { u, v });
    }
    let g = curve.cubic_part(u, v);
    if g.is_zero() {
        return Err(Error::NotInPsi { u, v });
    }
    let t2 = t as u128 * t as u128;
    let f = &g * v;
    if !(&f % BigInt::from(t2)).is_zero() {
        return Err(Error::NotDivisible { u, v, t });
    }
    let d2 = g
        .abs()
        .gcd(&BigInt::from(t2))
        .to_u128()
        .expect("divides t^2");
    let dp2 = (v.unsigned_abs() as u128).gcd(&t2);
    let d = exact_sqrt_u128(d2).expect("gcd(t^2, g) is a square when t^2 | F");
    let d_prime = exact_sqrt_u128(dp2).expect("gcd(t^2, v) is a square when t^2 | F");
    let inv = inverse_mod(v as i128, d2).expect("v is a unit mod d^2");
    let alpha = ((u as i128).rem_euclid(d2 as i128) as u128 * inv) % d2;
    let triple = TwistTriple {
        alpha: alpha as u64,
        d: d as u64,
        d_prime: d_prime as u64,
    };
    debug_assert_eq!(triple.t(), t);
    debug_assert!(triple.contains(u, v));
    Ok(triple)
}

/// Root sets for every `d` in `1..=max_d`, computed in parallel.
pub fn root_sets(curve: &Curve, max_d: u64) -> Result<Vec<RootSet>> {
    (1..=max_d)
        .into_par_iter()
        .map(|d| omega_d(curve, d))
        .collect()
}

/// Every triple with `d d' = t`, ordered by `d` then `alpha`.
pub fn triples_with_t(t: u64, roots: &[RootSet]) -> Vec<TwistTriple> {
    let mut out = Vec::new();
    for d in 1..=t {
        if !t.is_multiple_of(d) {
            continue;
        }
        let d_prime = t / d;
        if d.gcd(&d_prime) != 1 {
            continue;
        }
        for &alpha in &roots[(d - 1) as usize].residues {
            out.push(TwistTriple { alpha, d, d_prime });
        }
    }
    out
}

/// Every triple with `d d' <= b`, ordered by `t`, then `d`, then `alpha`.
pub fn triples_up_to(curve: &Curve, b: u64) -> Result<Vec<TwistTriple>> {
    if b == 0 {
        return Ok(Vec::new());
    }
    let roots = root_sets(curve, b)?;
    Ok((1..=b).flat_map(|t| triples_with_t(t, &roots)).collect())
}

/// Reduced lattices for every triple with `d d' <= b`, in triple order.
pub fn reduced_lattices_up_to(curve: &Curve, b: u64) -> Result<Vec<ReducedLattice>> {
    let triples = triples_up_to(curve, b)?;
    Ok(triples
        .par_iter()
        .map(|tr| shortest_vectors(curve, tr))
        .collect())
}

/// `(t / |omega|^2)^{2k} / max(1, log t)^j`, i.e.
/// `t^{2k} |omega|^{-4k} / max(1, log t)^j`.
pub fn q_term(lattice: &ReducedLattice, j: f64, k: f64) -> f64 {
    let t = lattice.triple.t() as f64;
    let ratio = t / lattice.norm_sq as f64;
    ratio.powf(2.0 * k) / t.ln().max(1.0).powf(j)
}

/// Truncation of the `Q` series to triples with `d d' <= b`.
///
/// Terms are accumulated by `t` ascending, then `d`, then `alpha`, so
/// raising `b` only appends terms.
pub fn q_partial(
    curve: &Curve,
    j: f64,
    k: f64,
    b: u64,
    membership: Membership,
) -> Result<SumReport> {
    q_partial_with(curve, j, k, b, membership, false)
}

pub fn q_partial_with(
    curve: &Curve,
    j: f64,
    k: f64,
    b: u64,
    membership: Membership,
    breakdown: bool,
) -> Result<SumReport> {
    validate_exponents(j, k)?;
    if b == 0 || b > MAX_D {
        return Err(Error::param("bound", format!("B = {b} is outside 1..={MAX_D}")));
    }
    let lattices = reduced_lattices_up_to(curve, b)?;
    let mut acc = KahanSum::new();
    let mut excluded = 0u64;
    let mut ties = 0u64;
    let mut per_t: Vec<(u64, u64, KahanSum)> = Vec::new();
    for lat in &lattices {
        if lat.tie_changes_membership {
            ties += 1;
        }
        if !lat.passes(membership) {
            excluded += 1;
            continue;
        }
        let term = q_term(lat, j, k);
        acc.add(term);
        if breakdown {
            let t = lat.triple.t();
            match per_t.last_mut() {
                Some((last, n, s)) if *last == t => {
                    *n += 1;
                    s.add(term);
                }
                _ => {
                    let mut s = KahanSum::new();
                    s.add(term);
                    per_t.push((t, 1, s));
                }
            }
        }
    }
    let mut report = SumReport::new(SeriesKind::Q, curve, j, k, b);
    report.membership = Some(membership);
    report.value = acc.value();
    report.term_count = acc.count();
    report.excluded_count = excluded;
    report.tie_count = ties;
    report.kahan_error_bound = acc.error_bound();
    if breakdown {
        report.breakdown = Some(
            per_t
                .into_iter()
                .map(|(t, terms, s)| BreakdownRow {
                    key: BigInt::from(t),
                    terms,
                    value: s.value(),
                })
                .collect(),
        );
    }
    Ok(report)
}

/// Lattice points `(u, v)` with `|u| <= n`, `0 < v <= n`, ordered by `v`
/// then `u`.
pub fn lattice_points_in_box(triple: &TwistTriple, n: u64) -> Vec<Vector> {
    let n = n as i128;
    let m = triple.d as i128 * triple.d as i128;
    let mp = triple.d_prime as i128 * triple.d_prime as i128;
    let mut out = Vec::new();
    let mut v = mp;
    while v <= n {
        let residue = (triple.alpha as i128 * v).rem_euclid(m);
        // smallest u >= -n with u = residue mod m
        let mut u = -n + (residue + n).rem_euclid(m);
        while u <= n {
            out.push([u as i64, v as i64]);
            u += m;
        }
        v += mp;
    }
    out
}

/// `R` over the box, regrouped by lattices: for every level `t` and every
/// triple with `d d' = t`, add `t^{2k} |F|^-k h^-j` for each primitive pair
/// of the lattice in the box with `F != 0`.
pub fn r_via_lattices(curve: &Curve, params: &SumParams) -> Result<SumReport> {
    params.validate()?;
    let n = params.n;
    check_box(n)?;
    let (a, b, c) = curve.coefficients();
    // |F(u, v)| <= N^4 (1 + |a| + |b| + |c|) on the box
    let coeff_sum = 1.0 + (a.unsigned_abs() + b.unsigned_abs() + c.unsigned_abs()) as f64;
    let f_max = (n as f64).powi(4) * coeff_sum;
    let t_max = f_max.sqrt().floor() as u64 + 1;
    if t_max > MAX_D {
        return Err(Error::param("box", format!("N = {n} is too large for the lattice route")));
    }
    let roots = root_sets(curve, t_max)?;
    let window = params.window.as_ref();
    let (j, k) = (params.j, params.k);

    let per_t: Vec<Vec<f64>> = (1..=t_max)
        .into_par_iter()
        .map(|t| {
            let tf = t as f64;
            let mut terms = Vec::new();
            for triple in triples_with_t(t, &roots) {
                // v must be a positive multiple of d'^2 inside the box
                if triple.d_prime as u128 * triple.d_prime as u128 > n as u128 {
                    continue;
                }
                for [u, v] in lattice_points_in_box(&triple, n) {
                    if u.unsigned_abs().gcd(&(v as u64)) != 1 {
                        continue;
                    }
                    if let Some(w) = window {
                        if !w.contains_ratio(u, v) {
                            continue;
                        }
                    }
                    let f = curve.eval_form(u, v);
                    if f.is_zero() {
                        continue;
                    }
                    let f_abs = f.magnitude().to_f64().unwrap_or(f64::INFINITY);
                    let h = height_unchecked(u, v);
                    terms.push((tf * tf / f_abs).powf(k) * h.powf(-j));
                }
            }
            terms
        })
        .collect();

    let acc: KahanSum = per_t.into_iter().flatten().collect();
    let mut report = SumReport::new(SeriesKind::R, curve, j, k, n);
    report.window = params.window.as_ref().map(|w| w.to_string());
    report.value = 2.0 * acc.value();
    report.term_count = 2 * acc.count();
    report.kahan_error_bound = 4.0 * acc.error_bound();
    Ok(report)
}

/// Annulus constants `c1 = min |omega| / sqrt(t)`, `c2 = max |omega| / t`
/// over triples with `t <= max_t` and `F(omega) != 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusFit {
    pub c1: f64,
    pub c2: f64,
    pub max_t: u64,
    pub samples: usize,
}

pub fn fit_annulus(curve: &Curve, max_t: u64) -> Result<AnnulusFit> {
    let lattices = reduced_lattices_up_to(curve, max_t)?;
    let mut c1 = f64::INFINITY;
    let mut c2 = 0.0f64;
    let mut samples = 0;
    for lat in lattices.iter().filter(|l| l.f_nonzero) {
        let t = lat.triple.t() as f64;
        let r = lat.norm();
        c1 = c1.min(r / t.sqrt());
        c2 = c2.max(r / t);
        samples += 1;
    }
    if samples == 0 {
        return Err(Error::param("max_t", format!("no triple with F(omega) != 0 up to {max_t}")));
    }
    Ok(AnnulusFit {
        c1,
        c2,
        max_t,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn congruent() -> Curve {
        Curve::new(0, -1, 0).unwrap()
    }

    fn cube_root_two() -> Curve {
        Curve::new(0, 0, -2).unwrap()
    }

    fn brute_roots(curve: &Curve, d: u64) -> Vec<u64> {
        let m = (d * d) as u128;
        (0..m).filter(|&x| curve.f_mod(x, m) == 0).map(|x| x as u64).collect()
    }

    #[test]
    fn omega_examples() {
        assert_eq!(omega_d(&congruent(), 2).unwrap().residues, vec![0, 1, 3]);
        assert_eq!(omega_d(&congruent(), 3).unwrap().residues, vec![0, 1, 8]);
        assert_eq!(omega_d(&congruent(), 6).unwrap().len(), 9);
        assert_eq!(omega_d(&cube_root_two(), 5).unwrap().residues, vec![3]);
        assert_eq!(omega_d(&cube_root_two(), 1).unwrap().residues, vec![0]);
        assert!(omega_d(&congruent(), 0).is_err());
    }

    #[test]
    fn omega_matches_brute_force_for_small_d() {
        for e in [congruent(), cube_root_two(), Curve::new(1, -7, 12).unwrap()] {
            for d in 1..=30 {
                assert_eq!(omega_d(&e, d).unwrap().residues, brute_roots(&e, d), "{e}, d = {d}");
            }
        }
    }

    #[test]
    fn shortest_vector_examples() {
        let e = cube_root_two();
        let unit = shortest_vectors(&e, &TwistTriple::new(&e, 0, 1, 1).unwrap());
        assert_eq!(unit.omega, [0, 1]);
        assert_eq!(unit.omega_prime, [1, 0]);
        assert_eq!(unit.norm_sq, 1);
        assert_eq!(unit.minimal_count, 2);

        let lat = shortest_vectors(&e, &TwistTriple::new(&e, 3, 5, 1).unwrap());
        assert_eq!(lat.omega, [3, 1]);
        assert_eq!(lat.norm_sq, 10);
        assert!(lat.in_psi);

        let e = congruent();
        let lat = shortest_vectors(&e, &TwistTriple::new(&e, 3, 2, 1).unwrap());
        assert_eq!(lat.omega, [-1, 1]);
        assert_eq!(lat.norm_sq, 2);
        assert!(!lat.in_psi && !lat.f_nonzero);
        assert_eq!(lat.omega_prime, [2, 2]);
        assert_eq!(lat.omega_prime_norm_sq, 8);
        let [w1, w2] = lat.basis;
        assert_eq!((w1[0] * w2[1] - w1[1] * w2[0]).abs(), 4);
    }

    #[test]
    fn triple_validation() {
        let e = congruent();
        assert!(TwistTriple::new(&e, 2, 2, 1).is_err());
        assert!(TwistTriple::new(&e, 1, 2, 4).is_err());
        assert!(TwistTriple::new(&e, 4, 2, 1).is_err());
        assert!(TwistTriple::new(&e, 3, 2, 3).is_ok());
    }

    #[test]
    fn decompose_examples() {
        let e = cube_root_two();
        assert_eq!(
            decompose_pair(&e, 3, 1, 5).unwrap(),
            TwistTriple { alpha: 3, d: 5, d_prime: 1 }
        );
        let e = congruent();
        let tr = decompose_pair(&e, 3, 1, 2).unwrap();
        assert_eq!(tr, TwistTriple { alpha: 3, d: 2, d_prime: 1 });
        assert!(tr.contains(3, 1));
        assert!(omega_d(&e, 2).unwrap().residues.contains(&tr.alpha));
        assert_eq!(
            decompose_pair(&e, 5, 7, 1).unwrap(),
            TwistTriple { alpha: 0, d: 1, d_prime: 1 }
        );
        assert_eq!(
            decompose_pair(&e, 3, 1, 3),
            Err(Error::NotDivisible { u: 3, v: 1, t: 3 })
        );
        assert!(matches!(decompose_pair(&e, 1, 1, 1), Err(Error::NotInPsi { .. })));
        // v carries the d' part: F(1, 4) = 4 * (1 - 16) = -60, so 2^2 | F
        assert_eq!(
            decompose_pair(&e, 1, 4, 2).unwrap(),
            TwistTriple { alpha: 0, d: 1, d_prime: 2 }
        );
    }

    #[test]
    fn q_examples() {
        let q = q_partial(&cube_root_two(), 1.0, 1.0, 1, Membership::StrictPsi).unwrap();
        assert_eq!(q.value, 1.0);
        assert_eq!(q.term_count, 1);
        for membership in [Membership::StrictPsi, Membership::FNonzero] {
            let q = q_partial(&congruent(), 1.0, 1.0, 1, membership).unwrap();
            assert_eq!(q.value, 0.0);
            assert_eq!(q.excluded_count, 1);
        }
        let e = cube_root_two();
        let lat = shortest_vectors(&e, &TwistTriple::new(&e, 3, 5, 1).unwrap());
        let expected = 25.0 / (5f64.ln() * 100.0);
        assert!((q_term(&lat, 1.0, 1.0) - expected).abs() < 1e-15);
        assert!((expected - 0.15534).abs() < 1e-5);
    }

    #[test]
    fn q_breakdown_matches_total() {
        let q = q_partial_with(&congruent(), 1.0, 1.0, 30, Membership::FNonzero, true).unwrap();
        let rows = q.breakdown.as_ref().unwrap();
        let total: f64 = rows.iter().map(|r| r.value).sum();
        assert!((total - q.value).abs() <= 1e-12 * q.value);
        assert!(rows.windows(2).all(|w| w[0].key < w[1].key));
    }

    #[test]
    fn lattice_route_matches_box_route_small() {
        use crate::series::r_partial;
        for e in [congruent(), cube_root_two()] {
            for (j, k) in [(1.0, 1.0), (0.0, 1.0), (2.0, 1.5)] {
                let p = SumParams::new(j, k, 12).unwrap();
                let direct = r_partial(&e, &p).unwrap();
                let regrouped = r_via_lattices(&e, &p).unwrap();
                assert!(
                    (direct.value - regrouped.value).abs() <= 1e-12 * direct.value,
                    "{e}: {} vs {}",
                    direct.value,
                    regrouped.value
                );
            }
        }
        let p = SumParams::new(1.0, 1.0, 2).unwrap();
        let r = r_via_lattices(&congruent(), &p).unwrap();
        assert!((r.value - 4.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn lattice_points_respect_congruences() {
        let e = congruent();
        let tr = TwistTriple::new(&e, 3, 2, 3).unwrap();
        let pts = lattice_points_in_box(&tr, 40);
        let brute: Vec<Vector> = (1..=40i64)
            .flat_map(|v| (-40..=40i64).map(move |u| [u, v]))
            .filter(|&[u, v]| tr.contains(u, v))
            .collect();
        assert_eq!(pts, brute);
    }

    #[test]
    fn annulus_fit_is_consistent() {
        let fit = fit_annulus(&cube_root_two(), 20).unwrap();
        assert!(fit.c1 > 0.0 && fit.c1 <= 1.0);
        assert!(fit.c2 >= 1.0 && fit.c2 <= (2.0 / 3f64.sqrt()).sqrt() + 1e-12);
    }

    proptest! {
        #[test]
        fn gauss_reduction_is_reduced(a0 in -10_000i128..10_000, a1 in -10_000i128..10_000, b0 in -10_000i128..10_000, b1 in -10_000i128..10_000) {
            let det = a0 * b1 - a1 * b0;
            prop_assume!(det != 0);
            let (a, b) = gauss_reduce([a0, a1], [b0, b1]);
            prop_assert_eq!((a[0] * b[1] - a[1] * b[0]).abs(), det.abs());
            prop_assert!(dot(a, a) <= dot(b, b));
            prop_assert!(2 * dot(a, b).abs() <= dot(a, a));
        }

        #[test]
        fn omega_is_multiplicative(d1 in 1u64..40, d2 in 1u64..40) {
            prop_assume!(d1.gcd(&d2) == 1);
            let e = congruent();
            let o1 = omega_d(&e, d1).unwrap();
            let o2 = omega_d(&e, d2).unwrap();
            let o12 = omega_d(&e, d1 * d2).unwrap();
            prop_assert_eq!(o12.len(), o1.len() * o2.len());
            for &r in &o12.residues {
                prop_assert!(o1.residues.contains(&(r % (d1 * d1))));
                prop_assert!(o2.residues.contains(&(r % (d2 * d2))));
            }
        }
    }
}
