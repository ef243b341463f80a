//! Divergence-constrained exponent programs.
//!
//! `F(P₁,P₂,α,λ) = min αD(Q₁‖P₁) + D(Q₂‖P₂)` over `GJS(Q₁,Q₂,α) ≤ λ`, its
//! three-distribution relative `K`, the lattice version `F_n`, and the
//! finite-length slack terms that accompany the second-order thresholds.
//!
//! The continuous programs are solved through their Lagrangian. Writing
//! `GJS(Q₁,Q₂,α) = min_R αD(Q₁‖R) + D(Q₂‖R)` turns the penalized objective
//! into a jointly convex function of `(Q₁, Q₂, R)` whose block minimizers
//! are explicit: `Qᵢ ∝ Pᵢ^s R^{1−s}` with `s = 1/(1+μ)`, and `R` the
//! `α`-mixture of the `Qᵢ`. Alternating these updates solves the inner
//! problem; an outer bisection on `s` moves the constraint onto `λ`.

use serde::{Deserialize, Serialize};

use crate::distributions::{check_same_alphabet, enumerate_counts, lattice_pair_cells, training_length, Distribution};
use crate::divergences::{gjs_counts, gjs_slices, kl_slices, moments, tilted};
use crate::parallel::map_indexed;
use crate::{Error, Result};

/// Largest number of lattice cells [`exponent_fn`] will visit.
pub const LATTICE_BUDGET: f64 = 1e8;

const INNER_TOL: f64 = 1e-14;
const INNER_MAX_ITERS: usize = 1_000_000;
const CONSTRAINT_TOL: f64 = 1e-10;
const LATTICE_SLACK: f64 = 1e-12;

/// Optimal value and minimizers of an exponent program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentSolution {
    /// Optimal value in nats; `+∞` when the constraint set misses the
    /// common support.
    pub value: f64,
    /// `(Q₁, Q₂)` for `F` and `F_n`, `(Q₁, Q₂, Q₃)` for `K`.
    pub minimizers: Vec<Distribution>,
    /// One Lagrange multiplier per GJS constraint (empty for lattice solutions).
    pub multipliers: Vec<f64>,
    pub converged: bool,
    /// Largest violation among the stationarity and complementary-slackness conditions.
    pub residual: f64,
}

impl ExponentSolution {
    fn trivial(value: f64, minimizers: Vec<Distribution>, constraints: usize) -> Self {
        ExponentSolution {
            value,
            minimizers,
            multipliers: vec![0.0; constraints],
            converged: true,
            residual: 0.0,
        }
    }
}

/// Finite-length slack terms for thresholds and error bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlackTerms {
    pub tau_n: f64,
    pub rho_n: f64,
    pub eta_n: f64,
    pub eta_n_m: f64,
    pub gutman_correction: f64,
}

fn check_inputs(alpha: f64, lambda: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("α must be positive and finite, got {alpha}")));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::domain(format!("λ must be nonnegative and finite, got {lambda}")));
    }
    Ok(())
}

fn overlaps(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).any(|(&x, &y)| x > 0.0 && y > 0.0)
}

/// GJS between two distributions with disjoint supports.
fn gjs_disjoint(alpha: f64) -> f64 {
    alpha * ((1.0 + alpha) / alpha).ln() + (1.0 + alpha).ln()
}

/// Normalized `exp(Σ wₖ ln vₖ)`, restricted to coordinates where every
/// factor with positive weight is positive.
fn geometric_mix(factors: &[(f64, &[f64])], out: &mut [f64]) {
    let mut top = f64::NEG_INFINITY;
    for (x, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for &(w, v) in factors {
            if w == 0.0 {
                continue;
            }
            if v[x] <= 0.0 {
                acc = f64::NEG_INFINITY;
                break;
            }
            acc += w * v[x].ln();
        }
        *o = acc;
        top = top.max(acc);
    }
    let mut z = 0.0;
    for o in out.iter_mut() {
        *o = if *o == f64::NEG_INFINITY { 0.0 } else { (*o - top).exp() };
        z += *o;
    }
    for o in out.iter_mut() {
        *o /= z;
    }
}

fn mix_into(a: &[f64], b: &[f64], alpha: f64, out: &mut [f64]) -> f64 {
    let mut delta: f64 = 0.0;
    for x in 0..out.len() {
        let m = (alpha * a[x] + b[x]) / (1.0 + alpha);
        delta = delta.max((m - out[x]).abs());
        out[x] = m;
    }
    delta
}

fn to_dist(v: &[f64]) -> Distribution {
    // the solver keeps its iterates normalized
    Distribution::from_weights(v.to_vec()).expect("solver iterate is a valid distribution")
}

struct PairState {
    q1: Vec<f64>,
    q2: Vec<f64>,
    r: Vec<f64>,
    inner_ok: bool,
}

impl PairState {
    fn new(p1: &[f64], p2: &[f64], alpha: f64) -> Self {
        let mut r = vec![0.0; p1.len()];
        mix_into(p1, p2, alpha, &mut r);
        PairState {
            q1: p1.to_vec(),
            q2: p2.to_vec(),
            r,
            inner_ok: true,
        }
    }

    /// Alternating block minimization at fixed `s`, warm-started from `self.r`.
    fn solve(&mut self, p1: &[f64], p2: &[f64], alpha: f64, s: f64) -> f64 {
        self.inner_ok = false;
        for _ in 0..INNER_MAX_ITERS {
            geometric_mix(&[(s, p1), (1.0 - s, &self.r)], &mut self.q1);
            geometric_mix(&[(s, p2), (1.0 - s, &self.r)], &mut self.q2);
            if mix_into(&self.q1, &self.q2, alpha, &mut self.r) < INNER_TOL {
                self.inner_ok = true;
                break;
            }
        }
        gjs_slices(&self.q1, &self.q2, alpha)
    }

    fn mixture_residual(&self, alpha: f64) -> f64 {
        let mut r = self.r.clone();
        mix_into(&self.q1, &self.q2, alpha, &mut r)
    }
}

/// Result of driving a monotone constraint map `s ↦ g(s)` onto `λ`.
struct Bisection {
    s: f64,
    hit: bool,
}

/// Finds `s ∈ (0, 1]` with `g(s) = λ` for nondecreasing `g` with `g(1) > λ`.
fn bisect_s(lambda: f64, mut g: impl FnMut(f64) -> f64) -> Bisection {
    let mut hi = 1.0;
    let mut lo = 0.5;
    loop {
        let v = g(lo);
        if (v - lambda).abs() <= CONSTRAINT_TOL {
            return Bisection { s: lo, hit: true };
        }
        if v < lambda {
            break;
        }
        hi = lo;
        lo *= 0.5;
        if lo < 1e-12 {
            return Bisection { s: lo, hit: false };
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let v = g(mid);
        if (v - lambda).abs() <= CONSTRAINT_TOL {
            return Bisection { s: mid, hit: true };
        }
        if v < lambda {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    // settle on the feasible side
    g(lo);
    Bisection { s: lo, hit: false }
}

/// Exponent `F(P₁,P₂,α,λ)`.
pub fn exponent_f(p1: &Distribution, p2: &Distribution, alpha: f64, lambda: f64) -> Result<ExponentSolution> {
    check_same_alphabet(p1, p2)?;
    check_inputs(alpha, lambda)?;
    let (a, b) = (p1.probs(), p2.probs());
    let trivial = || ExponentSolution::trivial(0.0, vec![p1.clone(), p2.clone()], 1);
    if a == b || lambda >= gjs_slices(a, b, alpha) {
        return Ok(trivial());
    }
    if !overlaps(a, b) {
        return Ok(ExponentSolution {
            value: f64::INFINITY,
            minimizers: vec![p1.clone(), p2.clone()],
            multipliers: vec![f64::INFINITY],
            converged: true,
            residual: 0.0,
        });
    }
    if lambda == 0.0 {
        let gamma = alpha / (1.0 + alpha);
        let q = tilted(p1, p2, gamma)?;
        return Ok(ExponentSolution {
            value: alpha * kl_slices(q.probs(), a) + kl_slices(q.probs(), b),
            minimizers: vec![q.clone(), q],
            multipliers: vec![f64::INFINITY],
            converged: true,
            residual: 0.0,
        });
    }

    let mut state = PairState::new(a, b, alpha);
    let found = bisect_s(lambda, |s| state.solve(a, b, alpha, s));
    let g = gjs_slices(&state.q1, &state.q2, alpha);
    let mu = (1.0 - found.s) / found.s;
    let residual = state.mixture_residual(alpha).max((mu * (g - lambda)).abs());
    let value = alpha * kl_slices(&state.q1, a) + kl_slices(&state.q2, b);
    let converged = found.hit && state.inner_ok;
    if !converged {
        log::warn!("exponent F did not converge: |GJS − λ| = {:.3e}", (g - lambda).abs());
    }
    Ok(ExponentSolution {
        value,
        minimizers: vec![to_dist(&state.q1), to_dist(&state.q2)],
        multipliers: vec![mu],
        converged,
        residual,
    })
}

struct TripleState {
    q: [Vec<f64>; 3],
    r2: Vec<f64>,
    r3: Vec<f64>,
    inner_ok: bool,
}

impl TripleState {
    fn new(pj: &[f64], pi: &[f64], pk: &[f64], alpha: f64) -> Self {
        let mut r2 = vec![0.0; pj.len()];
        let mut r3 = vec![0.0; pj.len()];
        mix_into(pi, pj, alpha, &mut r2);
        mix_into(pk, pj, alpha, &mut r3);
        TripleState {
            q: [pj.to_vec(), pi.to_vec(), pk.to_vec()],
            r2,
            r3,
            inner_ok: true,
        }
    }

    /// Block minimization at fixed `(s₂, s₃)`; returns the two constraint values.
    fn solve(&mut self, p: [&[f64]; 3], alpha: f64, s2: f64, s3: f64) -> (f64, f64) {
        let (mu2, mu3) = ((1.0 - s2) / s2, (1.0 - s3) / s3);
        let z = 1.0 + mu2 + mu3;
        self.inner_ok = false;
        for _ in 0..INNER_MAX_ITERS {
            let [q1, q2, q3] = &mut self.q;
            geometric_mix(&[(1.0 / z, p[0]), (mu2 / z, &self.r2), (mu3 / z, &self.r3)], q1);
            geometric_mix(&[(s2, p[1]), (1.0 - s2, &self.r2)], q2);
            geometric_mix(&[(s3, p[2]), (1.0 - s3, &self.r3)], q3);
            let d2 = mix_into(q2, q1, alpha, &mut self.r2);
            let d3 = mix_into(q3, q1, alpha, &mut self.r3);
            if d2.max(d3) < INNER_TOL {
                self.inner_ok = true;
                break;
            }
        }
        self.constraints(alpha)
    }

    fn constraints(&self, alpha: f64) -> (f64, f64) {
        (
            gjs_slices(&self.q[1], &self.q[0], alpha),
            gjs_slices(&self.q[2], &self.q[0], alpha),
        )
    }
}

/// Exponent `K(P_j,P_i,P_k,α,λ) = min D(Q₁‖P_j) + αD(Q₂‖P_i) + αD(Q₃‖P_k)`
/// over `GJS(Q₂,Q₁,α) ≤ λ` and `GJS(Q₃,Q₁,α) ≤ λ`.
///
/// The two multipliers are found by coordinate-wise bisection on the dual.
pub fn exponent_k(
    pj: &Distribution,
    pi: &Distribution,
    pk: &Distribution,
    alpha: f64,
    lambda: f64,
) -> Result<ExponentSolution> {
    check_same_alphabet(pj, pi)?;
    check_same_alphabet(pj, pk)?;
    check_inputs(alpha, lambda)?;
    let p = [pj.probs(), pi.probs(), pk.probs()];
    let originals = || vec![pj.clone(), pi.clone(), pk.clone()];
    if gjs_slices(p[1], p[0], alpha) <= lambda && gjs_slices(p[2], p[0], alpha) <= lambda {
        return Ok(ExponentSolution::trivial(0.0, originals(), 2));
    }
    let blocked = |a: &[f64], b: &[f64]| !overlaps(a, b) && lambda < gjs_disjoint(alpha);
    if blocked(p[0], p[1]) || blocked(p[0], p[2]) || (lambda == 0.0 && !overlaps3(p)) {
        return Ok(ExponentSolution {
            value: f64::INFINITY,
            minimizers: originals(),
            multipliers: vec![f64::INFINITY; 2],
            converged: true,
            residual: 0.0,
        });
    }
    if lambda == 0.0 {
        let w = 1.0 / (1.0 + 2.0 * alpha);
        let mut q = vec![0.0; pj.alphabet_size()];
        geometric_mix(&[(w, p[0]), (alpha * w, p[1]), (alpha * w, p[2])], &mut q);
        let value = kl_slices(&q, p[0]) + alpha * (kl_slices(&q, p[1]) + kl_slices(&q, p[2]));
        let q = to_dist(&q);
        return Ok(ExponentSolution {
            value,
            minimizers: vec![q.clone(), q.clone(), q],
            multipliers: vec![f64::INFINITY; 2],
            converged: true,
            residual: 0.0,
        });
    }

    let mut st = TripleState::new(p[0], p[1], p[2], alpha);
    let (mut s2, mut s3) = (1.0_f64, 1.0_f64);
    let mut converged = false;
    for _ in 0..500 {
        s2 = coordinate(&mut st, p, alpha, lambda, s3, true);
        s3 = coordinate(&mut st, p, alpha, lambda, s2, false);
        let (g2, g3) = st.solve(p, alpha, s2, s3);
        let slack_ok = |s: f64, g: f64| (g - lambda).abs() <= 1e-9 || (s == 1.0 && g <= lambda);
        if slack_ok(s2, g2) && slack_ok(s3, g3) && st.inner_ok {
            converged = true;
            break;
        }
    }
    let (g2, g3) = st.constraints(alpha);
    let (mu2, mu3) = ((1.0 - s2) / s2, (1.0 - s3) / s3);
    let mut r2 = st.r2.clone();
    let mut r3 = st.r3.clone();
    let residual = mix_into(&st.q[1], &st.q[0], alpha, &mut r2)
        .max(mix_into(&st.q[2], &st.q[0], alpha, &mut r3))
        .max((mu2 * (g2 - lambda)).abs())
        .max((mu3 * (g3 - lambda)).abs());
    let value = kl_slices(&st.q[0], p[0]) + alpha * kl_slices(&st.q[1], p[1]) + alpha * kl_slices(&st.q[2], p[2]);
    if !converged {
        log::warn!("exponent K did not converge (residual {residual:.3e})");
    }
    Ok(ExponentSolution {
        value,
        minimizers: st.q.iter().map(|q| to_dist(q)).collect(),
        multipliers: vec![mu2, mu3],
        converged,
        residual,
    })
}

fn overlaps3(p: [&[f64]; 3]) -> bool {
    (0..p[0].len()).any(|x| p[0][x] > 0.0 && p[1][x] > 0.0 && p[2][x] > 0.0)
}

/// Best `s` for one constraint with the other multiplier held fixed.
fn coordinate(st: &mut TripleState, p: [&[f64]; 3], alpha: f64, lambda: f64, other: f64, second: bool) -> f64 {
    let pick = |g: (f64, f64)| if second { g.0 } else { g.1 };
    let mut eval = |s: f64| {
        let g = if second {
            st.solve(p, alpha, s, other)
        } else {
            st.solve(p, alpha, other, s)
        };
        pick(g)
    };
    if eval(1.0) <= lambda {
        return 1.0;
    }
    bisect_s(lambda, eval).s
}

/// Lattice exponent `F_n`: the minimum of `F`'s objective over pairs of
/// types with denominators `N = ⌈αn⌉` and `n`.
///
/// Exhaustive; refuses when the lattice exceeds [`LATTICE_BUDGET`] cells.
/// Ties are broken towards the lexicographically first pair. A pair is
/// feasible when its GJS is at most `λ + 1e-12`, which absorbs rounding in
/// the `λ = 0` case.
pub fn exponent_fn(p1: &Distribution, p2: &Distribution, alpha: f64, lambda: f64, n: u64) -> Result<ExponentSolution> {
    check_same_alphabet(p1, p2)?;
    check_inputs(alpha, lambda)?;
    let big_n = training_length(alpha, n)?;
    let k = p1.alphabet_size();
    let cells = lattice_pair_cells(big_n, n, k);
    if cells > LATTICE_BUDGET {
        return Err(Error::BudgetExceeded {
            cells,
            budget: LATTICE_BUDGET,
        });
    }
    let train = enumerate_counts(big_n, k);
    let test = enumerate_counts(n, k);
    let freqs = |c: &[u64], m: u64| -> Vec<f64> { c.iter().map(|&v| v as f64 / m as f64).collect() };
    let test_cost: Vec<f64> = test.iter().map(|c| kl_slices(&freqs(c, n), p2.probs())).collect();

    let per_row = map_indexed(train.len(), |i| {
        let c1 = &train[i];
        let head = alpha * kl_slices(&freqs(c1, big_n), p1.probs());
        if !head.is_finite() {
            return None;
        }
        let mut best: Option<(f64, usize)> = None;
        for (j, c2) in test.iter().enumerate() {
            let v = head + test_cost[j];
            if best.is_some_and(|(b, _)| v >= b) || !v.is_finite() {
                continue;
            }
            if gjs_counts(c1, big_n, c2, n, alpha) <= lambda + LATTICE_SLACK {
                best = Some((v, j));
            }
        }
        best
    });
    let mut best: Option<(f64, usize, usize)> = None;
    for (i, row) in per_row.into_iter().enumerate() {
        if let Some((v, j)) = row {
            if best.is_none_or(|(b, _, _)| v < b) {
                best = Some((v, i, j));
            }
        }
    }
    Ok(match best {
        Some((value, i, j)) => ExponentSolution {
            value,
            minimizers: vec![to_dist(&freqs(&train[i], big_n)), to_dist(&freqs(&test[j], n))],
            multipliers: Vec::new(),
            converged: true,
            residual: 0.0,
        },
        None => ExponentSolution {
            value: f64::INFINITY,
            minimizers: vec![p1.clone(), p2.clone()],
            multipliers: Vec::new(),
            converged: true,
            residual: 0.0,
        },
    })
}

/// Slack terms at test length `n` for an `M`-ary problem over `|X|` symbols.
///
/// `ρ_n` needs the dispersion of `(P₁, P₂)` to be positive.
pub fn slack_terms(
    n: u64,
    alpha: f64,
    alphabet_size: usize,
    m: usize,
    p1: &Distribution,
    p2: &Distribution,
) -> Result<SlackTerms> {
    if n < 2 {
        return Err(Error::domain("slack terms need n ≥ 2"));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("α must be positive and finite, got {alpha}")));
    }
    if alphabet_size == 0 || m == 0 {
        return Err(Error::domain("alphabet size and M must be positive"));
    }
    let mp = moments(p1, p2, alpha)?;
    if mp.v <= 0.0 {
        return Err(Error::domain("ρ_n undefined: zero dispersion"));
    }
    let (nf, k, mf) = (n as f64, alphabet_size as f64, m as f64);
    let tau_n = 2.0 * (1.0 + alpha * alpha) * k / (2.0 * alpha * alpha * nf * nf);
    let rho_n = 6.0 * mp.t / (nf * mp.v.powi(3)).sqrt() + tau_n;
    let eta_n = k * (nf + 1.0).ln() / nf + 2.0 * k * (1.0 + alpha * nf).ln() / (alpha * nf);
    let eta_n_m = mf * k * (nf * alpha + 1.0).ln() / (nf * alpha) + k * (nf + 1.0).ln() / nf;
    let gutman_correction = gutman_correction(n, alpha, alphabet_size);
    Ok(SlackTerms {
        tau_n,
        rho_n,
        eta_n,
        eta_n_m,
        gutman_correction,
    })
}

/// `|X|·ln((1+α)n + 1)/n`.
pub(crate) fn gutman_correction(n: u64, alpha: f64, alphabet_size: usize) -> f64 {
    let nf = n as f64;
    alphabet_size as f64 * ((1.0 + alpha) * nf + 1.0).ln() / nf
}

fn grid_points(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 0.5) {
        return Err(Error::domain(format!("grid step must lie in (0, 0.5], got {step}")));
    }
    let m = (1.0 / step).round() as usize;
    Ok((0..=m).map(|i| i as f64 / m as f64).collect())
}

fn bern(q: f64) -> [f64; 2] {
    [1.0 - q, q]
}

fn check_bernoulli(ps: &[f64]) -> Result<()> {
    match ps.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        Some(p) => Err(Error::domain(format!("Bernoulli parameter {p} outside [0, 1]"))),
        None => Ok(()),
    }
}

/// Brute-force `F` for Bernoulli sources: scans all parameter pairs on a
/// grid of the given step.
pub fn grid_exponent_f(p1: f64, p2: f64, alpha: f64, lambda: f64, step: f64) -> Result<f64> {
    check_bernoulli(&[p1, p2])?;
    check_inputs(alpha, lambda)?;
    let grid = grid_points(step)?;
    let (b1, b2) = (bern(p1), bern(p2));
    let cost2: Vec<f64> = grid.iter().map(|&q| kl_slices(&bern(q), &b2)).collect();
    let rows = map_slice_min(&grid, |&q1| {
        let head = alpha * kl_slices(&bern(q1), &b1);
        let mut best = f64::INFINITY;
        for (j, &q2) in grid.iter().enumerate() {
            let v = head + cost2[j];
            if v < best && gjs_slices(&bern(q1), &bern(q2), alpha) <= lambda {
                best = v;
            }
        }
        best
    });
    Ok(rows)
}

/// Brute-force `K` for Bernoulli sources on a grid.
///
/// For fixed `Q₁` the two constraints decouple, so the scan over triples
/// reduces to two scans over pairs without changing the grid minimum.
pub fn grid_exponent_k(pj: f64, pi: f64, pk: f64, alpha: f64, lambda: f64, step: f64) -> Result<f64> {
    check_bernoulli(&[pj, pi, pk])?;
    check_inputs(alpha, lambda)?;
    let grid = grid_points(step)?;
    let (bj, bi, bk) = (bern(pj), bern(pi), bern(pk));
    let cost_i: Vec<f64> = grid.iter().map(|&q| alpha * kl_slices(&bern(q), &bi)).collect();
    let cost_k: Vec<f64> = grid.iter().map(|&q| alpha * kl_slices(&bern(q), &bk)).collect();
    Ok(map_slice_min(&grid, |&q1| {
        let head = kl_slices(&bern(q1), &bj);
        let side = |cost: &[f64]| {
            grid.iter()
                .zip(cost)
                .filter(|(&q, _)| gjs_slices(&bern(q), &bern(q1), alpha) <= lambda)
                .map(|(_, &c)| c)
                .fold(f64::INFINITY, f64::min)
        };
        head + side(&cost_i) + side(&cost_k)
    }))
}

fn map_slice_min(grid: &[f64], f: impl Fn(&f64) -> f64 + Sync + Send) -> f64 {
    crate::parallel::map_slice(grid, f).into_iter().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divergences::{gjs, renyi, triple_div};

    fn b(p: f64) -> Distribution {
        Distribution::bernoulli(p).unwrap()
    }

    fn d(v: &[f64]) -> Distribution {
        Distribution::new(v.to_vec()).unwrap()
    }

    #[test]
    fn f_vanishes_above_gjs() {
        let (p1, p2) = (b(0.2), b(0.4));
        let g = gjs(&p1, &p2, 2.0).unwrap();
        for lambda in [g, g + 0.1, 5.0] {
            let s = exponent_f(&p1, &p2, 2.0, lambda).unwrap();
            assert_eq!(s.value, 0.0);
            assert_eq!(s.minimizers, vec![p1.clone(), p2.clone()]);
        }
        let p = d(&[0.2, 0.3, 0.5]);
        assert_eq!(exponent_f(&p, &p, 1.0, 0.0).unwrap().value, 0.0);
    }

    #[test]
    fn f_at_zero_is_renyi_with_tilted_minimizer() {
        let (p1, p2) = (d(&[0.1, 0.6, 0.3]), d(&[0.5, 0.2, 0.3]));
        let s = exponent_f(&p1, &p2, 2.0, 0.0).unwrap();
        let gamma = 2.0 / 3.0;
        assert!((s.value - renyi(gamma, &p1, &p2).unwrap()).abs() < 1e-13);
        let t = tilted(&p1, &p2, gamma).unwrap();
        assert_eq!(s.minimizers[0], t);
        assert_eq!(s.minimizers[1], t);
    }

    #[test]
    fn f_near_zero_approaches_closed_form() {
        let (p1, p2) = (b(0.2), b(0.4));
        let zero = exponent_f(&p1, &p2, 2.0, 0.0).unwrap();
        let s = exponent_f(&p1, &p2, 2.0, 1e-9).unwrap();
        assert!(s.converged);
        assert!(s.value <= zero.value);
        assert!(zero.value - s.value < 1e-3);
        let t = &zero.minimizers[0];
        assert!(s.minimizers[0].max_abs_diff(t) < 1e-4);
        assert!(s.minimizers[1].max_abs_diff(t) < 1e-4);
    }

    #[test]
    fn f_matches_grid_oracle() {
        let s = exponent_f(&b(0.2), &b(0.4), 2.0, 0.01).unwrap();
        assert!(s.converged);
        assert!(s.residual < 1e-8, "residual {}", s.residual);
        let grid = grid_exponent_f(0.2, 0.4, 2.0, 0.01, 1e-3).unwrap();
        assert!((s.value - grid).abs() < 1e-3, "{} vs {grid}", s.value);
        assert!(s.value <= grid + 1e-12);
    }

    #[test]
    fn f_nonincreasing_in_lambda() {
        let (p1, p2) = (d(&[0.1, 0.6, 0.3]), d(&[0.5, 0.2, 0.3]));
        let g = gjs(&p1, &p2, 1.5).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..=20 {
            let lambda = g * i as f64 / 20.0;
            let s = exponent_f(&p1, &p2, 1.5, lambda).unwrap();
            assert!(s.converged, "λ = {lambda}");
            assert!(s.value <= prev + 1e-9, "λ = {lambda}");
            if lambda > 0.0 && lambda < g {
                assert!(s.residual < 1e-8, "λ = {lambda}: residual {}", s.residual);
            }
            prev = s.value;
        }
        assert_eq!(prev, 0.0);
    }

    #[test]
    fn f_disjoint_supports_is_infinite() {
        let s = exponent_f(&b(0.0), &b(1.0), 1.0, 0.1).unwrap();
        assert_eq!(s.value, f64::INFINITY);
    }

    #[test]
    fn f_respects_zero_coordinates() {
        let (p1, p2) = (d(&[0.0, 0.5, 0.5]), d(&[0.3, 0.3, 0.4]));
        let s = exponent_f(&p1, &p2, 1.0, 0.02).unwrap();
        assert!(s.converged);
        assert_eq!(s.minimizers[0].probs()[0], 0.0);
        assert!(s.value.is_finite());
    }

    #[test]
    fn k_closed_form_and_trivial_cases() {
        let (pj, pi, pk) = (b(0.2), b(0.4), b(0.5));
        let s = exponent_k(&pj, &pi, &pk, 2.0, 0.0).unwrap();
        let t = triple_div(0.8, &pj, &pi, &pk).unwrap();
        assert!((s.value - t).abs() < 1e-13);
        let p = d(&[0.2, 0.3, 0.5]);
        for lambda in [0.0, 0.01, 1.0] {
            assert_eq!(exponent_k(&p, &p, &p, 2.0, lambda).unwrap().value, 0.0);
        }
    }

    #[test]
    fn k_matches_grid_oracle() {
        let s = exponent_k(&b(0.2), &b(0.4), &b(0.5), 2.0, 0.005).unwrap();
        assert!(s.converged);
        let grid = grid_exponent_k(0.2, 0.4, 0.5, 2.0, 0.005, 2e-3).unwrap();
        assert!((s.value - grid).abs() < 2e-3, "{} vs {grid}", s.value);
    }

    #[test]
    fn k_with_one_slack_constraint() {
        // Pk close to Pj: the third constraint is inactive at the optimum
        let s = exponent_k(&b(0.3), &b(0.6), &b(0.31), 1.0, 0.01).unwrap();
        assert!(s.converged);
        let grid = grid_exponent_k(0.3, 0.6, 0.31, 1.0, 0.01, 1e-3).unwrap();
        assert!((s.value - grid).abs() < 1e-3, "{} vs {grid}", s.value);
    }

    #[test]
    fn fn_dominates_f_and_obeys_upper_bound() {
        let (p1, p2) = (b(0.2), b(0.4));
        for (alpha, n) in [(1.0, 20), (2.0, 30), (0.5, 40)] {
            let exact = exponent_fn(&p1, &p2, alpha, 0.0, n).unwrap();
            let cont = exponent_f(&p1, &p2, alpha, 0.0).unwrap();
            assert!(exact.value >= cont.value - 1e-12);
            let big_n = training_length(alpha, n).unwrap();
            let nn = n.min(big_n) as f64;
            let log_term: f64 = (0..2).map(|x| (p1.probs()[x].powf(alpha) * p2.probs()[x]).ln()).sum();
            let bound = cont.value + (1.0 + alpha) * 2.0 * nn.ln() / nn - log_term / nn;
            assert!(exact.value <= bound, "α={alpha} n={n}");
        }
        let lam = 0.02;
        let exact = exponent_fn(&p1, &p2, 2.0, lam, 25).unwrap();
        assert!(exact.value >= exponent_f(&p1, &p2, 2.0, lam).unwrap().value - 1e-9);
    }

    #[test]
    fn fn_golden_value() {
        // independent scan of the 21 × 21 Bernoulli lattice
        let s = exponent_fn(&b(0.2), &b(0.4), 1.0, 0.0, 20).unwrap();
        assert!((s.value - 0.049_768_411_738_829_9).abs() < 1e-13, "{}", s.value);
        assert_eq!(s.minimizers[0], b(0.3));
        assert_eq!(s.minimizers[1], b(0.3));
    }

    #[test]
    fn fn_refuses_over_budget() {
        let p = Distribution::uniform(4).unwrap();
        assert!(matches!(
            exponent_fn(&p, &p, 1.0, 0.0, 1000),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn slack_term_values() {
        let (p1, p2) = (b(0.2), b(0.4));
        let s = slack_terms(5000, 2.0, 2, 2, &p1, &p2).unwrap();
        assert!((s.gutman_correction - 2.0 * 15001f64.ln() / 5000.0).abs() < 1e-15);
        let s = slack_terms(1000, 2.0, 2, 3, &p1, &p2).unwrap();
        let expect = 3.0 * 2.0 * 2001f64.ln() / 2000.0 + 2.0 * 1001f64.ln() / 1000.0;
        assert!((s.eta_n_m - expect).abs() < 1e-15);
        let mut prev: Option<SlackTerms> = None;
        for n in [100, 1000, 10_000] {
            let s = slack_terms(n, 2.0, 2, 3, &p1, &p2).unwrap();
            if let Some(p) = prev {
                assert!(s.tau_n < p.tau_n && s.rho_n < p.rho_n && s.eta_n < p.eta_n);
                assert!(s.eta_n_m < p.eta_n_m && s.gutman_correction < p.gutman_correction);
            }
            prev = Some(s);
        }
        assert!(slack_terms(100, 2.0, 2, 2, &p1, &p1).is_err());
        assert!(slack_terms(1, 2.0, 2, 2, &p1, &p2).is_err());
    }
}
