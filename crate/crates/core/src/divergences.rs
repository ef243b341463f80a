//! Divergence functionals over finite alphabets.
//!
//! Conventions: natural logarithms, `0·ln 0 = 0`, and `+∞` (as
//! `f64::INFINITY`) wherever a support condition makes a divergence
//! unbounded. `gjs` is always finite because the mixture dominates both
//! arguments.

use serde::{Deserialize, Serialize};

use crate::distributions::{check_same_alphabet, Distribution};
use crate::{Error, Result};

/// Which of the two information densities `ı₁`, `ı₂` to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

/// Dispersion `v` (nats²) and third absolute moment `t` (nats³).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentPair {
    pub v: f64,
    pub t: f64,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha >= 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("α must be a nonnegative finite number, got {alpha}")))
    }
}

/// Relative entropy `D(Q‖P)`.
pub fn kl(q: &Distribution, p: &Distribution) -> Result<f64> {
    check_same_alphabet(q, p)?;
    Ok(kl_slices(q.probs(), p.probs()))
}

pub(crate) fn kl_slices(q: &[f64], p: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (&a, &b) in q.iter().zip(p) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            if a != b {
                acc += a * (a / b).ln();
            }
        }
    }
    acc.max(0.0)
}

/// Generalized Jensen-Shannon divergence
/// `α·D(P₁‖M) + D(P₂‖M)` with `M = (αP₁ + P₂)/(1 + α)`.
pub fn gjs(p1: &Distribution, p2: &Distribution, alpha: f64) -> Result<f64> {
    check_same_alphabet(p1, p2)?;
    check_alpha(alpha)?;
    Ok(gjs_slices(p1.probs(), p2.probs(), alpha))
}

/// Unchecked GJS on raw probability (or frequency) slices.
#[inline]
pub fn gjs_slices(p1: &[f64], p2: &[f64], alpha: f64) -> f64 {
    if alpha == 0.0 {
        return 0.0;
    }
    let mut acc = 0.0;
    for (&a, &b) in p1.iter().zip(p2) {
        if a == b {
            continue;
        }
        let m = (alpha * a + b) / (1.0 + alpha);
        if a > 0.0 {
            acc += alpha * a * (a / m).ln();
        }
        if b > 0.0 {
            acc += b * (b / m).ln();
        }
    }
    acc.max(0.0)
}

/// GJS between two empirical types given as count vectors.
#[inline]
pub fn gjs_counts(c1: &[u64], n1: u64, c2: &[u64], n2: u64, alpha: f64) -> f64 {
    let (n1, n2) = (n1 as f64, n2 as f64);
    let mut acc = 0.0;
    for (&k1, &k2) in c1.iter().zip(c2) {
        let a = k1 as f64 / n1;
        let b = k2 as f64 / n2;
        if a == b {
            continue;
        }
        let m = (alpha * a + b) / (1.0 + alpha);
        if k1 > 0 {
            acc += alpha * a * (a / m).ln();
        }
        if k2 > 0 {
            acc += b * (b / m).ln();
        }
    }
    acc.max(0.0)
}

#[inline]
fn density_value(side: Side, a: f64, b: f64, alpha: f64) -> f64 {
    let own = match side {
        Side::First => a,
        Side::Second => b,
    };
    if a == b {
        0.0
    } else {
        ((1.0 + alpha) * own / (alpha * a + b)).ln()
    }
}

/// Information density `ıᵢ(x) = ln((1+α)Pᵢ(x) / (αP₁(x) + P₂(x)))`.
///
/// Defined only on `supp(Pᵢ)`.
pub fn info_density(side: Side, x: usize, p1: &Distribution, p2: &Distribution, alpha: f64) -> Result<f64> {
    check_same_alphabet(p1, p2)?;
    check_alpha(alpha)?;
    if x >= p1.alphabet_size() {
        return Err(Error::domain(format!("symbol {x} outside alphabet")));
    }
    let (a, b) = (p1.probs()[x], p2.probs()[x]);
    let own = if side == Side::First { a } else { b };
    if own <= 0.0 {
        return Err(Error::domain(format!(
            "information density {side:?} evaluated at symbol {x} outside its support"
        )));
    }
    Ok(density_value(side, a, b, alpha))
}

/// Per-symbol values, `None` where undefined.
pub type Densities = Vec<Option<f64>>;

/// Both information densities over the alphabet; `None` off the relevant support.
pub fn information_densities(
    p1: &Distribution,
    p2: &Distribution,
    alpha: f64,
) -> Result<(Densities, Densities)> {
    check_same_alphabet(p1, p2)?;
    check_alpha(alpha)?;
    Ok(densities(p1.probs(), p2.probs(), alpha))
}

fn densities(p1: &[f64], p2: &[f64], alpha: f64) -> (Vec<Option<f64>>, Vec<Option<f64>>) {
    let first = p1
        .iter()
        .zip(p2)
        .map(|(&a, &b)| (a > 0.0).then(|| density_value(Side::First, a, b, alpha)))
        .collect();
    let second = p1
        .iter()
        .zip(p2)
        .map(|(&a, &b)| (b > 0.0).then(|| density_value(Side::Second, a, b, alpha)))
        .collect();
    (first, second)
}

/// Mean, variance and third absolute central moment of `f` under `p`,
/// visiting only `supp(p)`.
fn central_moments(p: &[f64], f: &[Option<f64>]) -> (f64, f64, f64) {
    let mean: f64 = p
        .iter()
        .zip(f)
        .filter(|(&w, _)| w > 0.0)
        .map(|(&w, v)| w * v.unwrap_or(0.0))
        .sum();
    let (mut var, mut third) = (0.0, 0.0);
    for (&w, v) in p.iter().zip(f) {
        if w > 0.0 {
            let d = v.unwrap_or(0.0) - mean;
            var += w * d * d;
            third += w * d.abs().powi(3);
        }
    }
    (mean, var.max(0.0), third)
}

/// `V = α·Var_{P₁}[ı₁] + Var_{P₂}[ı₂]` and `T = α·E_{P₁}|ı₁ − Eı₁|³ + E_{P₂}|ı₂ − Eı₂|³`.
pub fn moments(p1: &Distribution, p2: &Distribution, alpha: f64) -> Result<MomentPair> {
    check_same_alphabet(p1, p2)?;
    check_alpha(alpha)?;
    let (i1, i2) = densities(p1.probs(), p2.probs(), alpha);
    let (_, v1, t1) = central_moments(p1.probs(), &i1);
    let (_, v2, t2) = central_moments(p2.probs(), &i2);
    Ok(MomentPair {
        v: alpha * v1 + v2,
        t: alpha * t1 + t2,
    })
}

/// Dispersion `V(P₁, P₂, α)`.
pub fn dispersion_v(p1: &Distribution, p2: &Distribution, alpha: f64) -> Result<f64> {
    moments(p1, p2, alpha).map(|m| m.v)
}

/// Third-moment functional `T(P₁, P₂, α)`.
pub fn third_moment_t(p1: &Distribution, p2: &Distribution, alpha: f64) -> Result<f64> {
    moments(p1, p2, alpha).map(|m| m.t)
}

fn check_order(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma.is_finite() && gamma != 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "Rényi order must be positive, finite and ≠ 1 (use kl for order 1), got {gamma}"
        )))
    }
}

/// Rényi divergence `D_γ(P₁‖P₂) = (γ−1)⁻¹ ln Σ P₁^γ P₂^{1−γ}`.
pub fn renyi(gamma: f64, p1: &Distribution, p2: &Distribution) -> Result<f64> {
    check_same_alphabet(p1, p2)?;
    check_order(gamma)?;
    let mut sum = 0.0;
    for (&a, &b) in p1.probs().iter().zip(p2.probs()) {
        if a > 0.0 && b > 0.0 {
            sum += a.powf(gamma) * b.powf(1.0 - gamma);
        } else if a > 0.0 && gamma > 1.0 {
            return Ok(f64::INFINITY);
        }
    }
    if sum <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((sum.ln() / (gamma - 1.0)).max(0.0))
}

/// Tilted distribution `P^{(γ)} ∝ P₁^γ P₂^{1−γ}`, `γ ∈ [0, 1]`.
pub fn tilted(p1: &Distribution, p2: &Distribution, gamma: f64) -> Result<Distribution> {
    check_same_alphabet(p1, p2)?;
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::domain(format!("tilting parameter {gamma} outside [0, 1]")));
    }
    if gamma == 1.0 {
        return Ok(p1.clone());
    }
    if gamma == 0.0 {
        return Ok(p2.clone());
    }
    let weights: Vec<f64> = p1
        .probs()
        .iter()
        .zip(p2.probs())
        .map(|(&a, &b)| if a > 0.0 && b > 0.0 { a.powf(gamma) * b.powf(1.0 - gamma) } else { 0.0 })
        .collect();
    if weights.iter().all(|&w| w == 0.0) {
        return Err(Error::domain("tilted distribution undefined: disjoint supports"));
    }
    Distribution::from_weights(weights)
}

/// Three-way divergence `(γ−1)⁻¹ ln Σ P_j^{1−γ} P_i^{γ/2} P_k^{γ/2}`, `γ ∈ (0, 1)`.
pub fn triple_div(gamma: f64, pj: &Distribution, pi: &Distribution, pk: &Distribution) -> Result<f64> {
    check_same_alphabet(pj, pi)?;
    check_same_alphabet(pj, pk)?;
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::domain(format!("order must lie in (0, 1), got {gamma}")));
    }
    let sum: f64 = (0..pj.alphabet_size())
        .map(|x| {
            let (a, b, c) = (pj.probs()[x], pi.probs()[x], pk.probs()[x]);
            if a > 0.0 && b > 0.0 && c > 0.0 {
                a.powf(1.0 - gamma) * b.powf(0.5 * gamma) * c.powf(0.5 * gamma)
            } else {
                0.0
            }
        })
        .sum();
    if sum <= 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((sum.ln() / (gamma - 1.0)).max(0.0))
}

/// Partial derivatives of GJS with respect to each coordinate of `P₁` and `P₂`.
///
/// Coordinates outside the respective support are `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct GjsGradient {
    pub wrt_p1: Vec<Option<f64>>,
    pub wrt_p2: Vec<Option<f64>>,
}

impl GjsGradient {
    /// Whether any coordinate was excluded for lying off the support.
    pub fn has_excluded(&self) -> bool {
        self.wrt_p1.iter().chain(&self.wrt_p2).any(Option::is_none)
    }
}

/// `∂GJS/∂P₁(x) = α·ı₁(x)` and `∂GJS/∂P₂(x) = ı₂(x)`.
pub fn gjs_gradient(p1: &Distribution, p2: &Distribution, alpha: f64) -> Result<GjsGradient> {
    let (i1, i2) = information_densities(p1, p2, alpha)?;
    Ok(GjsGradient {
        wrt_p1: i1.into_iter().map(|v| v.map(|v| alpha * v)).collect(),
        wrt_p2: i2,
    })
}

/// Diagonal blocks of the GJS Hessian: `∂²/∂P₁(x)²`, `∂²/∂P₂(x)²` and the
/// mixed `∂²/∂P₁(x)∂P₂(x)`. All off-diagonal (`x ≠ x'`) entries vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct GjsHessian {
    pub d11: Vec<Option<f64>>,
    pub d22: Vec<Option<f64>>,
    pub d12: Vec<Option<f64>>,
}

pub fn gjs_hessian(p1: &Distribution, p2: &Distribution, alpha: f64) -> Result<GjsHessian> {
    check_same_alphabet(p1, p2)?;
    check_alpha(alpha)?;
    let mut h = GjsHessian {
        d11: Vec::new(),
        d22: Vec::new(),
        d12: Vec::new(),
    };
    for (&a, &b) in p1.probs().iter().zip(p2.probs()) {
        let mix = alpha * a + b;
        h.d11.push((a > 0.0).then(|| alpha * b / (a * mix)));
        h.d22.push((b > 0.0).then(|| alpha * a / (b * mix)));
        h.d12.push((a > 0.0 && b > 0.0).then(|| -alpha / mix));
    }
    Ok(h)
}

/// The `Ṽ`, `T̃` functionals for a triple `(P₁, P₂, P₃)`:
/// `Ṽ = α·Var_{P₁}[ı₁(·|1,3)] + α·Var_{P₂}[ı₁(·|2,3)] + Var_{P₃}[ı₂(·|1,3) − ı₂(·|2,3)]`
/// and `T̃` the same combination of third absolute central moments.
pub fn pairwise_moments(p1: &Distribution, p2: &Distribution, p3: &Distribution, alpha: f64) -> Result<MomentPair> {
    check_same_alphabet(p1, p2)?;
    check_same_alphabet(p1, p3)?;
    check_alpha(alpha)?;
    let (i1_13, i2_13) = densities(p1.probs(), p3.probs(), alpha);
    let (i1_23, i2_23) = densities(p2.probs(), p3.probs(), alpha);
    let diff: Vec<Option<f64>> = i2_13
        .iter()
        .zip(&i2_23)
        .map(|(a, b)| match (a, b) {
            (Some(a), Some(b)) => Some(a - b),
            _ => None,
        })
        .collect();
    let (_, v1, t1) = central_moments(p1.probs(), &i1_13);
    let (_, v2, t2) = central_moments(p2.probs(), &i1_23);
    let (_, v3, t3) = central_moments(p3.probs(), &diff);
    Ok(MomentPair {
        v: alpha * v1 + alpha * v2 + v3,
        t: alpha * t1 + alpha * t2 + t3,
    })
}
