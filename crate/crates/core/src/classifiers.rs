//! Type-based decision rules and their thresholds.
//!
//! Every rule reduces its inputs to GJS scores `g_i = GJS(T̂_{x_i}, T̂_y, α)`
//! between training and test types. The `*_from_scores` functions expose
//! that second stage directly so the simulation harness can skip building
//! sequences. Hypothesis indices are zero-based; `Verdict::Hypothesis(0)`
//! is `H₁`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::distributions::{empirical_type, training_length, Distribution, EmpiricalType, Sequence};
use crate::divergences::{gjs, gjs_counts, moments};
use crate::exponents::gutman_correction;
use crate::special::{chi2_isf, phi, std_normal_inv_cdf, Probability};
use crate::{Error, Result};

/// Ties between GJS values closer than this are treated as ties.
pub const TIE_TOLERANCE: f64 = 1e-12;

/// Output of a decision rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// Zero-based hypothesis index.
    Hypothesis(usize),
    Reject,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Hypothesis(j) => write!(f, "H{}", j + 1),
            Verdict::Reject => f.write_str("reject"),
        }
    }
}

/// A verdict together with a flag raised when the argmin was not unique.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedVerdict {
    pub verdict: Verdict,
    pub tie: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMode {
    /// `GJS + √(V/n)·Φ⁻¹(ε)` (pairwise minimum for `M > 2`).
    SecondOrder,
    /// The second-order threshold minus `|X|·ln((1+α)n+1)/n`.
    GutmanCorrected,
    /// `G⁻¹_{|X|−1}(ε)/(2n)`.
    Chi2Dual,
    Explicit,
}

/// Everything needed to pick a threshold for an `M`-ary problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifierSpec {
    pub m: usize,
    pub alpha: f64,
    pub alphabet_size: usize,
    pub threshold_mode: ThresholdMode,
    /// One target per hypothesis, or a single shared target.
    pub epsilon: Vec<Probability>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explicit_lambda: Option<Vec<f64>>,
}

impl ClassifierSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::domain("need at least two hypotheses"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(Error::domain(format!("α must be positive and finite, got {}", self.alpha)));
        }
        if self.alphabet_size < 2 {
            return Err(Error::domain("alphabet must have at least 2 symbols"));
        }
        if let Some(e) = self.epsilon.iter().find(|e| !(e.get() > 0.0 && e.get() < 1.0)) {
            return Err(Error::domain(format!("target {} outside (0, 1)", e.get())));
        }
        match (&self.threshold_mode, &self.explicit_lambda) {
            (ThresholdMode::Explicit, Some(l)) if !l.is_empty() => {
                if l.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                    return Err(Error::domain("explicit thresholds must be nonnegative"));
                }
            }
            (ThresholdMode::Explicit, _) => return Err(Error::domain("explicit mode needs explicit_lambda")),
            (_, Some(_)) => return Err(Error::domain("explicit_lambda given without explicit mode")),
            (_, None) => {
                if self.epsilon.is_empty() {
                    return Err(Error::domain("threshold mode needs at least one target ε"));
                }
            }
        }
        Ok(())
    }

    fn epsilons(&self) -> Vec<Probability> {
        if self.epsilon.len() == 1 {
            vec![self.epsilon[0]; self.m]
        } else {
            self.epsilon.clone()
        }
    }

    /// Resolves the threshold for test length `n` and generating distributions `dists`.
    pub fn threshold(&self, dists: &[Distribution], n: u64) -> Result<f64> {
        self.validate()?;
        let pick = || -> Result<f64> {
            if dists.len() != self.m {
                return Err(Error::domain(format!("expected {} distributions, got {}", self.m, dists.len())));
            }
            if self.m == 2 {
                threshold_second_order(&dists[0], &dists[1], self.alpha, n, self.epsilon[0])
            } else {
                multi_threshold(dists, self.alpha, n, &self.epsilons())
            }
        };
        match self.threshold_mode {
            ThresholdMode::SecondOrder => pick(),
            ThresholdMode::GutmanCorrected => {
                threshold_gutman_corrected(pick()?, n, self.alpha, self.alphabet_size)
            }
            ThresholdMode::Chi2Dual => threshold_chi2_dual(n, self.alphabet_size, self.epsilon[0]),
            ThresholdMode::Explicit => Ok(self.explicit_lambda.as_ref().expect("validated")[0]),
        }
    }
}

/// Second-order threshold `GJS(P₁,P₂,α) + √(V/n)·Φ⁻¹(ε)`, clamped at zero.
pub fn threshold_second_order(p1: &Distribution, p2: &Distribution, alpha: f64, n: u64, epsilon: Probability) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain("second-order threshold needs n ≥ 2"));
    }
    let q = std_normal_inv_cdf(epsilon.get())?;
    let g = gjs(p1, p2, alpha)?;
    let v = moments(p1, p2, alpha)?.v;
    if v <= 0.0 {
        return Err(Error::domain("zero dispersion: distributions are indistinguishable"));
    }
    Ok((g + (v / n as f64).sqrt() * q).max(0.0))
}

/// `λ − |X|·ln((1+α)n+1)/n`. May be negative.
pub fn threshold_gutman_corrected(lambda: f64, n: u64, alpha: f64, alphabet_size: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("n must be ≥ 1"));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("α must be positive and finite, got {alpha}")));
    }
    Ok(lambda - gutman_correction(n, alpha, alphabet_size))
}

/// `G⁻¹_{|X|−1}(ε)/(2n)`.
pub fn threshold_chi2_dual(n: u64, alphabet_size: usize, epsilon: Probability) -> Result<f64> {
    if alphabet_size < 2 || n == 0 {
        return Err(Error::domain("chi-squared threshold needs |X| ≥ 2 and n ≥ 1"));
    }
    Ok(chi2_isf(alphabet_size as u32 - 1, epsilon.get())? / (2.0 * n as f64))
}

fn shared_alphabet(seqs: &[&Sequence]) -> Result<usize> {
    if seqs.iter().any(|s| s.is_empty()) {
        return Err(Error::domain("empty sequence"));
    }
    let top = seqs.iter().flat_map(|s| s.symbols().iter()).copied().max().unwrap_or(0);
    Ok((top + 1).max(2))
}

fn types_of(training: &[&Sequence], y: &Sequence) -> Result<(Vec<EmpiricalType>, EmpiricalType)> {
    let mut all: Vec<&Sequence> = training.to_vec();
    all.push(y);
    let k = shared_alphabet(&all)?;
    let t = training.iter().map(|s| empirical_type(s, k)).collect::<Result<Vec<_>>>()?;
    Ok((t, empirical_type(y, k)?))
}

fn check_lengths(training: &[&Sequence], y: &Sequence, alpha: f64) {
    if let Ok(big_n) = training_length(alpha, y.len() as u64) {
        if training.iter().any(|s| s.len() as u64 != big_n) {
            log::warn!("training length differs from ⌈αn⌉ = {big_n} for test length {}", y.len());
        }
    }
}

/// GJS scores `GJS(T̂_{x_i}, T̂_y, α)` of each training type against the test type.
pub fn scores(training: &[EmpiricalType], y: &EmpiricalType, alpha: f64) -> Vec<f64> {
    training
        .iter()
        .map(|t| gjs_counts(t.counts(), t.n(), y.counts(), y.n(), alpha))
        .collect()
}

/// Binary rule: `H₁` iff `GJS(T̂_{x₁}, T̂_y, α) ≤ λ`.
pub fn gutman_binary_classify(x1: &Sequence, y: &Sequence, alpha: f64, lambda: f64) -> Result<Verdict> {
    check_lengths(&[x1], y, alpha);
    let (t, ty) = types_of(&[x1], y)?;
    Ok(gutman_binary_from_score(scores(&t, &ty, alpha)[0], lambda))
}

#[inline]
pub fn gutman_binary_from_score(g1: f64, lambda: f64) -> Verdict {
    if g1 <= lambda {
        Verdict::Hypothesis(0)
    } else {
        Verdict::Hypothesis(1)
    }
}

/// Pairwise structure of an `M`-tuple of distributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiStructure {
    /// `θ_j = min_{i≠j} GJS(P_i, P_j, α)`.
    pub theta: Vec<f64>,
    /// The minimizing `i` for each `j`.
    pub istar: Vec<usize>,
    /// Indices attaining `min_j θ_j`.
    pub j1: Vec<usize>,
    /// Indices of `j1` minimizing `√V(P_{i*(j)}, P_j, α)·Φ⁻¹(ε_j)`, when targets are given.
    pub j2: Option<Vec<usize>>,
}

fn argmin_set(vals: &[(usize, f64)]) -> Vec<usize> {
    let best = vals.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
    vals.iter().filter(|v| v.1 - best <= TIE_TOLERANCE).map(|v| v.0).collect()
}

/// Computes `θ_j`, `i*(j)`, `J₁` and (with `epsilon`) `J₂`.
///
/// Fails with [`Error::AssumptionViolated`] when some `i*(j)` is not unique.
pub fn multi_structure(p: &[Distribution], alpha: f64, epsilon: Option<&[Probability]>) -> Result<MultiStructure> {
    let m = p.len();
    if m < 2 {
        return Err(Error::domain("need at least two distributions"));
    }
    let mut theta = Vec::with_capacity(m);
    let mut istar = Vec::with_capacity(m);
    for j in 0..m {
        let mut g: Vec<(usize, f64)> = Vec::with_capacity(m - 1);
        for i in (0..m).filter(|&i| i != j) {
            g.push((i, gjs(&p[i], &p[j], alpha)?));
        }
        let winners = argmin_set(&g);
        if winners.len() > 1 {
            return Err(Error::AssumptionViolated(format!(
                "minimizer of θ for hypothesis {} is not unique (candidates {:?})",
                j + 1,
                winners.iter().map(|i| i + 1).collect::<Vec<_>>()
            )));
        }
        let i = winners[0];
        istar.push(i);
        theta.push(g.iter().find(|v| v.0 == i).expect("winner present").1);
    }
    let indexed: Vec<(usize, f64)> = theta.iter().copied().enumerate().collect();
    let j1 = argmin_set(&indexed);
    let j2 = match epsilon {
        None => None,
        Some(eps) => {
            let eps = broadcast(eps, m)?;
            let mut second = Vec::with_capacity(j1.len());
            for &j in &j1 {
                let v = moments(&p[istar[j]], &p[j], alpha)?.v;
                second.push((j, v.sqrt() * std_normal_inv_cdf(eps[j].get())?));
            }
            Some(argmin_set(&second))
        }
    };
    Ok(MultiStructure { theta, istar, j1, j2 })
}

fn broadcast(eps: &[Probability], m: usize) -> Result<Vec<Probability>> {
    match eps.len() {
        1 => Ok(vec![eps[0]; m]),
        l if l == m => Ok(eps.to_vec()),
        l => Err(Error::domain(format!("expected 1 or {m} targets, got {l}"))),
    }
}

/// `min_j { GJS(P_{i*(j)}, P_j, α) + √(V(P_{i*(j)}, P_j, α)/n)·Φ⁻¹(ε_j) }`, clamped at zero.
pub fn multi_threshold(p: &[Distribution], alpha: f64, n: u64, epsilon: &[Probability]) -> Result<f64> {
    if n < 2 {
        return Err(Error::domain("threshold needs n ≥ 2"));
    }
    let st = multi_structure(p, alpha, None)?;
    let eps = broadcast(epsilon, p.len())?;
    let mut best = f64::INFINITY;
    for j in 0..p.len() {
        let v = moments(&p[st.istar[j]], &p[j], alpha)?.v;
        let t = st.theta[j] + (v / n as f64).sqrt() * std_normal_inv_cdf(eps[j].get())?;
        best = best.min(t);
    }
    Ok(best.max(0.0))
}

/// Rule with rejection: `H_{i*}` for the closest training type if the
/// runner-up score is at least `λ̃`, otherwise reject.
pub fn unnikrishnan_classify(xs: &[Sequence], y: &Sequence, alpha: f64, lambda_tilde: f64) -> Result<RankedVerdict> {
    if xs.len() < 2 {
        return Err(Error::domain("need at least two training sequences"));
    }
    let refs: Vec<&Sequence> = xs.iter().collect();
    check_lengths(&refs, y, alpha);
    let (t, ty) = types_of(&refs, y)?;
    Ok(unnikrishnan_from_scores(&scores(&t, &ty, alpha), lambda_tilde))
}

pub fn unnikrishnan_from_scores(g: &[f64], lambda_tilde: f64) -> RankedVerdict {
    let mut best = 0;
    for (i, &v) in g.iter().enumerate().skip(1) {
        if v < g[best] {
            best = i;
        }
    }
    let runner_up = g
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != best)
        .map(|(_, &v)| v)
        .fold(f64::INFINITY, f64::min);
    let tie = runner_up - g[best] <= TIE_TOLERANCE;
    let verdict = if runner_up >= lambda_tilde {
        Verdict::Hypothesis(best)
    } else {
        Verdict::Reject
    };
    RankedVerdict { verdict, tie }
}

/// Gutman's `M`-ary rule with rejection.
///
/// `H₁` if every other score exceeds `λ`; otherwise `H_j` (`j ≥ 2`) if every
/// score but the `j`-th exceeds `λ` and the `j`-th does not; otherwise
/// reject. The `H₁` clause is checked first and does not look at `g₁`.
pub fn gutman_multi_classify(xs: &[Sequence], y: &Sequence, alpha: f64, lambda: f64) -> Result<Verdict> {
    if xs.len() < 2 {
        return Err(Error::domain("need at least two training sequences"));
    }
    let refs: Vec<&Sequence> = xs.iter().collect();
    check_lengths(&refs, y, alpha);
    let (t, ty) = types_of(&refs, y)?;
    Ok(gutman_multi_from_scores(&scores(&t, &ty, alpha), lambda))
}

pub fn gutman_multi_from_scores(g: &[f64], lambda: f64) -> Verdict {
    let others_exceed = |j: usize| g.iter().enumerate().all(|(i, &v)| i == j || v > lambda);
    if others_exceed(0) {
        return Verdict::Hypothesis(0);
    }
    (1..g.len())
        .find(|&j| others_exceed(j) && g[j] <= lambda)
        .map_or(Verdict::Reject, Verdict::Hypothesis)
}

/// Binary rule with rejection and per-hypothesis thresholds.
pub fn binary_reject_classify(
    x1: &Sequence,
    x2: &Sequence,
    y: &Sequence,
    alpha: f64,
    lambda1: f64,
    lambda2: f64,
) -> Result<Verdict> {
    check_lengths(&[x1, x2], y, alpha);
    let (t, ty) = types_of(&[x1, x2], y)?;
    let g = scores(&t, &ty, alpha);
    Ok(binary_reject_from_scores(g[0], g[1], lambda1, lambda2))
}

pub fn binary_reject_from_scores(g1: f64, g2: f64, lambda1: f64, lambda2: f64) -> Verdict {
    if g2 > lambda2 {
        Verdict::Hypothesis(0)
    } else if g1 > lambda1 {
        Verdict::Hypothesis(1)
    } else {
        Verdict::Reject
    }
}

/// Whether `(L₁, L₂)` satisfies `Φ(L₁/√V(P₁,P₂,α)) + Φ(L₂/√V(P₂,P₁,α)) ≤ ε`.
///
/// Any real `(L₁, L₂)` is accepted; with `ε < 1` membership needs at least
/// one negative coordinate.
pub fn second_order_region_check(
    l1: f64,
    l2: f64,
    p1: &Distribution,
    p2: &Distribution,
    alpha: f64,
    epsilon: Probability,
) -> Result<bool> {
    Ok(region_sum(l1, l2, p1, p2, alpha)? <= epsilon.get())
}

/// The left-hand side `Φ(L₁/√V₁₂) + Φ(L₂/√V₂₁)` of the region check.
pub fn region_sum(l1: f64, l2: f64, p1: &Distribution, p2: &Distribution, alpha: f64) -> Result<f64> {
    if !(l1.is_finite() && l2.is_finite()) {
        return Err(Error::domain("region coordinates must be finite"));
    }
    let v12 = moments(p1, p2, alpha)?.v;
    let v21 = moments(p2, p1, alpha)?.v;
    if v12 <= 0.0 || v21 <= 0.0 {
        return Err(Error::domain("zero dispersion in the region check"));
    }
    Ok(phi(l1 / v12.sqrt()) + phi(l2 / v21.sqrt()))
}
