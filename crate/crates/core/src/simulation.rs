//! Monte Carlo and exact error probabilities of the type-based rules.
//!
//! Trials draw empirical types directly (see
//! [`sample_type`](crate::distributions::sample_type)); every decision rule
//! here depends on the sequences only through their types, so this is
//! equivalent to drawing sequences and much cheaper. Trial `k` of a run
//! owns the random stream `(seed, tag(k))`, which makes reports independent
//! of the execution backend and thread count.

use serde::{Deserialize, Serialize};

use crate::classifiers::{gutman_binary_from_score, gutman_multi_from_scores, unnikrishnan_from_scores, Verdict};
use crate::distributions::{
    check_same_alphabet, enumerate_counts, lattice_pair_cells, sample_type, seeded_stream, training_length, Distribution,
    EmpiricalType,
};
use crate::divergences::gjs_counts;
use crate::exponents::LATTICE_BUDGET;
use crate::parallel::map_indexed;
use crate::special::{chi2_cdf, ln_factorial, Probability};
use crate::{Error, Result};

const CHUNK: u64 = 2048;

// Stream tags: domain in the top byte, then an optional sub-index, then the trial index.
const DOMAIN_BINARY_H1: u64 = 1;
const DOMAIN_BINARY_H2: u64 = 2;
const DOMAIN_MAX_TYPE1: u64 = 3;
const DOMAIN_WEAK: u64 = 4;
const DOMAIN_MULTI: u64 = 5;

fn stream_tag(domain: u64, sub: u64, trial: u64) -> u64 {
    (domain << 56) | (sub << 40) | trial
}

/// One estimated probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub name: String,
    pub estimate: Probability,
    /// `√(p̂(1−p̂)/trials)`.
    pub stderr: f64,
    pub hits: u64,
    pub trials: u64,
}

impl Estimate {
    fn new(name: impl Into<String>, hits: u64, trials: u64) -> Self {
        let p = hits as f64 / trials as f64;
        Estimate {
            name: name.into(),
            estimate: Probability::new(p).expect("hit fraction lies in [0, 1]"),
            stderr: (p * (1.0 - p) / trials as f64).sqrt(),
            hits,
            trials,
        }
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.estimate.get()
    }
}

/// Rule used by [`mc_multi`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MultiRule {
    Unnikrishnan,
    GutmanMulti,
}

/// Parameters a report was produced with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub distributions: Vec<Distribution>,
    pub alpha: f64,
    pub n: u64,
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule: Option<MultiRule>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub estimates: Vec<Estimate>,
    /// Trials per estimate.
    pub trials: u64,
    pub seed: u64,
    pub config: RunConfig,
    /// Distribution attaining the maximum in [`max_type1_search`].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub argmax: Option<Distribution>,
    /// Trials in which the rule met a tied minimum.
    #[serde(default)]
    pub ties: u64,
}

impl SimulationReport {
    /// Looks an estimate up by name (`beta1`, `beta2`, `zeta3`, …).
    pub fn get(&self, name: &str) -> Option<&Estimate> {
        self.estimates.iter().find(|e| e.name == name)
    }
}

/// Exact error probabilities of the binary rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactReport {
    pub beta1: Probability,
    pub beta2: Probability,
    pub enumerated_cells: u64,
    /// Total probability of all enumerated pairs under each hypothesis; both equal 1 up to rounding.
    pub mass_h1: f64,
    pub mass_h2: f64,
}

fn check_run(alpha: f64, n: u64, trials: u64) -> Result<u64> {
    if trials == 0 {
        return Err(Error::domain("need at least one trial"));
    }
    if n == 0 {
        return Err(Error::domain("test length must be ≥ 1"));
    }
    training_length(alpha, n)
}

/// Counts trials `0..trials` for which `hit(k)` holds, in parallel chunks.
fn count_hits(trials: u64, hit: impl Fn(u64) -> Result<u64> + Sync + Send) -> Result<u64> {
    let chunks = trials.div_ceil(CHUNK) as usize;
    let parts = map_indexed(chunks, |c| {
        let start = c as u64 * CHUNK;
        let end = (start + CHUNK).min(trials);
        (start..end).map(&hit).sum::<Result<u64>>()
    });
    parts.into_iter().sum()
}

/// Monte Carlo type-I and type-II error probabilities of the binary rule
/// with threshold `λ`.
pub fn mc_binary(
    p1: &Distribution,
    p2: &Distribution,
    alpha: f64,
    n: u64,
    lambda: f64,
    trials: u64,
    seed: u64,
) -> Result<SimulationReport> {
    check_same_alphabet(p1, p2)?;
    let big_n = check_run(alpha, n, trials)?;
    let score = |train: &Distribution, test: &Distribution, rng: &mut _| -> Result<f64> {
        let t = sample_type(train, big_n, rng)?;
        let y = sample_type(test, n, rng)?;
        Ok(gjs_counts(t.counts(), big_n, y.counts(), n, alpha))
    };
    let beta1 = count_hits(trials, |k| {
        let mut rng = seeded_stream(seed, stream_tag(DOMAIN_BINARY_H1, 0, k));
        let g = score(p1, p1, &mut rng)?;
        Ok((gutman_binary_from_score(g, lambda) != Verdict::Hypothesis(0)) as u64)
    })?;
    let beta2 = count_hits(trials, |k| {
        let mut rng = seeded_stream(seed, stream_tag(DOMAIN_BINARY_H2, 0, k));
        let g = score(p1, p2, &mut rng)?;
        Ok((gutman_binary_from_score(g, lambda) != Verdict::Hypothesis(1)) as u64)
    })?;
    Ok(SimulationReport {
        estimates: vec![Estimate::new("beta1", beta1, trials), Estimate::new("beta2", beta2, trials)],
        trials,
        seed,
        config: RunConfig {
            distributions: vec![p1.clone(), p2.clone()],
            alpha,
            n,
            lambda,
            rule: None,
        },
        argmax: None,
        ties: 0,
    })
}

/// Log-probabilities of every count vector in `types` under `p`
/// (`−∞` for vectors that put mass outside `supp(p)`).
fn log_type_probs(types: &[Vec<u64>], total: u64, p: &[f64]) -> Vec<f64> {
    let head = ln_factorial(total);
    types
        .iter()
        .map(|c| {
            let mut acc = head;
            for (&k, &q) in c.iter().zip(p) {
                if k == 0 {
                    continue;
                }
                if q <= 0.0 {
                    return f64::NEG_INFINITY;
                }
                acc += k as f64 * q.ln() - ln_factorial(k);
            }
            acc
        })
        .collect()
}

/// Compensated (Neumaier) summation.
#[derive(Default, Clone, Copy)]
struct Kahan {
    sum: f64,
    comp: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(self) -> f64 {
        self.sum + self.comp
    }
}

/// Exact `β₁`, `β₂` of the binary rule by enumerating all pairs of training
/// and test types.
pub fn exact_binary(p1: &Distribution, p2: &Distribution, alpha: f64, n: u64, lambda: f64) -> Result<ExactReport> {
    check_same_alphabet(p1, p2)?;
    let big_n = check_run(alpha, n, 1)?;
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
    let w1 = log_type_probs(&train, big_n, p1.probs());
    let u1: Vec<f64> = log_type_probs(&test, n, p1.probs()).into_iter().map(f64::exp).collect();
    let u2: Vec<f64> = log_type_probs(&test, n, p2.probs()).into_iter().map(f64::exp).collect();

    // per training type: (β₁ part, β₂ part, H₁ mass, H₂ mass)
    let rows = map_indexed(train.len(), |i| {
        let w = w1[i].exp();
        if w == 0.0 {
            return [0.0; 4];
        }
        let mut acc = [Kahan::default(); 4];
        for (j, c2) in test.iter().enumerate() {
            let g = gjs_counts(&train[i], big_n, c2, n, alpha);
            if g > lambda {
                acc[0].add(u1[j]);
            } else {
                acc[1].add(u2[j]);
            }
            acc[2].add(u1[j]);
            acc[3].add(u2[j]);
        }
        acc.map(|a| w * a.total())
    });
    let mut tot = [Kahan::default(); 4];
    for r in rows {
        for (t, v) in tot.iter_mut().zip(r) {
            t.add(v);
        }
    }
    let [b1, b2, m1, m2] = tot.map(Kahan::total);
    Ok(ExactReport {
        beta1: Probability::new(b1.clamp(0.0, 1.0))?,
        beta2: Probability::new(b2.clamp(0.0, 1.0))?,
        enumerated_cells: (train.len() * test.len()) as u64,
        mass_h1: m1,
        mass_h2: m2,
    })
}

/// Monte Carlo error (`beta{j}`) and rejection (`zeta{j}`) probabilities of
/// an `M`-ary rule with rejection, one block of `trials` per hypothesis.
pub fn mc_multi(
    p: &[Distribution],
    alpha: f64,
    n: u64,
    lambda_tilde: f64,
    rule: MultiRule,
    trials: u64,
    seed: u64,
) -> Result<SimulationReport> {
    if p.len() < 2 {
        return Err(Error::domain("need at least two hypotheses"));
    }
    for q in &p[1..] {
        check_same_alphabet(&p[0], q)?;
    }
    let big_n = check_run(alpha, n, trials)?;
    let mut estimates = Vec::with_capacity(2 * p.len());
    let mut ties = 0;
    for j in 0..p.len() {
        let outcomes = map_indexed(trials.div_ceil(CHUNK) as usize, |c| -> Result<[u64; 3]> {
            let start = c as u64 * CHUNK;
            let end = (start + CHUNK).min(trials);
            let mut acc = [0u64; 3];
            let mut training: Vec<EmpiricalType> = Vec::with_capacity(p.len());
            for k in start..end {
                let mut rng = seeded_stream(seed, stream_tag(DOMAIN_MULTI, j as u64, k));
                training.clear();
                for q in p {
                    training.push(sample_type(q, big_n, &mut rng)?);
                }
                let y = sample_type(&p[j], n, &mut rng)?;
                let g: Vec<f64> = training
                    .iter()
                    .map(|t| gjs_counts(t.counts(), big_n, y.counts(), n, alpha))
                    .collect();
                let verdict = match rule {
                    MultiRule::Unnikrishnan => {
                        let r = unnikrishnan_from_scores(&g, lambda_tilde);
                        acc[2] += r.tie as u64;
                        r.verdict
                    }
                    MultiRule::GutmanMulti => gutman_multi_from_scores(&g, lambda_tilde),
                };
                match verdict {
                    Verdict::Reject => acc[1] += 1,
                    Verdict::Hypothesis(i) if i != j => acc[0] += 1,
                    Verdict::Hypothesis(_) => {}
                }
            }
            Ok(acc)
        });
        let mut tot = [0u64; 3];
        for o in outcomes {
            let o = o?;
            for (t, v) in tot.iter_mut().zip(o) {
                *t += v;
            }
        }
        estimates.push(Estimate::new(format!("beta{}", j + 1), tot[0], trials));
        estimates.push(Estimate::new(format!("zeta{}", j + 1), tot[1], trials));
        ties += tot[2];
    }
    if ties > 0 {
        log::info!("{ties} trials met a tied minimum");
    }
    Ok(SimulationReport {
        estimates,
        trials,
        seed,
        config: RunConfig {
            distributions: p.to_vec(),
            alpha,
            n,
            lambda: lambda_tilde,
            rule: Some(rule),
        },
        argmax: None,
        ties,
    })
}

/// Largest Monte Carlo type-I error of the binary rule over Bernoulli
/// sources `Bern(p)`, `p` on the grid `step, 2·step, … ≤ 1/2`.
///
/// Under `H₁` both the training and the test sequence follow the same
/// source, and relabelling the two symbols maps `Bern(p)` to `Bern(1−p)`
/// without changing any GJS value, so the half grid covers all sources.
/// The report's single estimate `max_beta1` is the largest one found;
/// ties go to the smallest `p`.
pub fn max_type1_search(
    alpha: f64,
    n: u64,
    lambda: f64,
    grid_step: f64,
    trials_per_point: u64,
    seed: u64,
) -> Result<SimulationReport> {
    if !(grid_step > 0.0 && grid_step < 0.5) {
        return Err(Error::domain(format!("grid step must lie in (0, 0.5), got {grid_step}")));
    }
    let big_n = check_run(alpha, n, trials_per_point)?;
    let points = ((0.5 + 1e-12) / grid_step).floor() as u64;
    let mut best: Option<(u64, f64)> = None;
    for i in 1..=points {
        let p = i as f64 * grid_step;
        let src = Distribution::bernoulli(p)?;
        let hits = count_hits(trials_per_point, |k| {
            let mut rng = seeded_stream(seed, stream_tag(DOMAIN_MAX_TYPE1, i, k));
            let t = sample_type(&src, big_n, &mut rng)?;
            let y = sample_type(&src, n, &mut rng)?;
            Ok((gjs_counts(t.counts(), big_n, y.counts(), n, alpha) > lambda) as u64)
        })?;
        if best.is_none_or(|(h, _)| hits > h) {
            best = Some((hits, p));
        }
    }
    let (hits, p) = best.expect("grid has at least one point");
    Ok(SimulationReport {
        estimates: vec![Estimate::new("max_beta1", hits, trials_per_point)],
        trials: trials_per_point,
        seed,
        config: RunConfig {
            distributions: Vec::new(),
            alpha,
            n,
            lambda,
            rule: None,
        },
        argmax: Some(Distribution::bernoulli(p)?),
        ties: 0,
    })
}

/// Distance between the law of `2n·GJS(T̂_{X₁}, T̂_Y, α)` under `H₁` and its
/// chi-squared limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakConvergence {
    pub ks_distance: f64,
    /// Degrees of freedom of the reference law: support size minus one (at least 1).
    pub dof: u32,
    /// Set when the source is a point mass and the statistic is identically zero.
    pub degenerate: bool,
    pub samples: Vec<f64>,
}

/// Kolmogorov–Smirnov distance between the empirical law of `samples` and a
/// continuous cdf. Tied samples are handled as one jump.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let m = s.len() as f64;
    let mut worst: f64 = 0.0;
    let mut i = 0;
    while i < s.len() {
        let mut j = i;
        while j < s.len() && s[j] == s[i] {
            j += 1;
        }
        let f = cdf(s[i]);
        worst = worst.max((f - i as f64 / m).abs()).max((j as f64 / m - f).abs());
        i = j;
    }
    worst
}

pub fn weak_convergence_check(p: &Distribution, alpha: f64, n: u64, trials: u64, seed: u64) -> Result<WeakConvergence> {
    let big_n = check_run(alpha, n, trials)?;
    let support = p.support().len() as u32;
    let degenerate = support < 2;
    let dof = support.saturating_sub(1).max(1);
    let samples = map_indexed(trials as usize, |k| -> Result<f64> {
        let mut rng = seeded_stream(seed, stream_tag(DOMAIN_WEAK, 0, k as u64));
        let t = sample_type(p, big_n, &mut rng)?;
        let y = sample_type(p, n, &mut rng)?;
        Ok(2.0 * n as f64 * gjs_counts(t.counts(), big_n, y.counts(), n, alpha))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let ks = ks_distance(&samples, |x| chi2_cdf(dof, x.max(0.0)).map(|p| p.get()).unwrap_or(0.0));
    if degenerate {
        log::warn!("point-mass source: the statistic is identically zero");
    }
    Ok(WeakConvergence {
        ks_distance: ks,
        dof,
        degenerate,
        samples,
    })
}
