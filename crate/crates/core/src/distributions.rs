//! Finite-alphabet distributions, empirical types and seeded sampling.
//!
//! Symbols are dense indices `0..alphabet_size`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution as _};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tolerance on `Σ p = 1` accepted by [`Distribution::new`].
pub const SUM_TOLERANCE: f64 = 1e-12;

/// A probability vector over the alphabet `[0, len)`, `len ≥ 2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Distribution(Vec<f64>);

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::domain(format!(
                "alphabet must have at least 2 symbols, got {}",
                probs.len()
            )));
        }
        if let Some(bad) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(Error::domain(format!("invalid probability entry {bad}")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::domain(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Distribution(probs))
    }

    /// Normalizes nonnegative weights into a distribution.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::domain(format!("cannot normalize weights with total {total}")));
        }
        Distribution::new(weights.into_iter().map(|w| w / total).collect())
    }

    /// `Bern(p)`: probability `p` on symbol 1, `1 − p` on symbol 0.
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::domain(format!("Bernoulli parameter {p} outside [0, 1]")));
        }
        Ok(Distribution(vec![1.0 - p, p]))
    }

    pub fn uniform(alphabet_size: usize) -> Result<Self> {
        Distribution::new(vec![1.0 / alphabet_size as f64; alphabet_size])
    }

    /// Point mass on `symbol`.
    pub fn point_mass(alphabet_size: usize, symbol: usize) -> Result<Self> {
        if symbol >= alphabet_size {
            return Err(Error::domain(format!("symbol {symbol} outside alphabet of size {alphabet_size}")));
        }
        let mut probs = vec![0.0; alphabet_size];
        probs[symbol] = 1.0;
        Distribution::new(probs)
    }

    #[inline]
    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    #[inline]
    pub fn alphabet_size(&self) -> usize {
        self.0.len()
    }

    /// Indices with positive probability.
    pub fn support(&self) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] > 0.0).collect()
    }

    pub fn has_full_support(&self) -> bool {
        self.0.iter().all(|&p| p > 0.0)
    }

    /// Largest coordinate-wise deviation from `other`.
    pub fn max_abs_diff(&self, other: &Distribution) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<f64>> for Distribution {
    type Error = Error;
    fn try_from(probs: Vec<f64>) -> Result<Self> {
        Distribution::new(probs)
    }
}

impl From<Distribution> for Vec<f64> {
    fn from(d: Distribution) -> Vec<f64> {
        d.0
    }
}

pub(crate) fn check_same_alphabet(a: &Distribution, b: &Distribution) -> Result<()> {
    if a.alphabet_size() != b.alphabet_size() {
        Err(Error::AlphabetMismatch {
            left: a.alphabet_size(),
            right: b.alphabet_size(),
        })
    } else {
        Ok(())
    }
}

/// A sequence of alphabet symbols.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Sequence(pub Vec<usize>);

impl Sequence {
    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<Vec<usize>> for Sequence {
    fn from(v: Vec<usize>) -> Self {
        Sequence(v)
    }
}

/// Symbol counts of a sequence of length `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EmpiricalType {
    counts: Vec<u64>,
    n: u64,
}

impl EmpiricalType {
    pub fn from_counts(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::domain("alphabet must have at least 2 symbols"));
        }
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(Error::domain("empirical type of an empty sequence"));
        }
        Ok(EmpiricalType { counts, n })
    }

    #[inline]
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    #[inline]
    pub fn n(&self) -> u64 {
        self.n
    }

    #[inline]
    pub fn alphabet_size(&self) -> usize {
        self.counts.len()
    }

    /// Frequencies `counts[a] / n`.
    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    pub fn to_distribution(&self) -> Distribution {
        // counts/n sums to 1 up to a few ulps, well inside SUM_TOLERANCE
        Distribution(self.frequencies())
    }
}

/// Empirical type `T̂` of `seq` over an alphabet of `alphabet_size` symbols.
pub fn empirical_type(seq: &Sequence, alphabet_size: usize) -> Result<EmpiricalType> {
    if seq.is_empty() {
        return Err(Error::domain("empirical type of an empty sequence"));
    }
    let mut counts = vec![0u64; alphabet_size];
    for &s in seq.symbols() {
        match counts.get_mut(s) {
            Some(c) => *c += 1,
            None => {
                return Err(Error::domain(format!(
                    "symbol {s} outside alphabet of size {alphabet_size}"
                )))
            }
        }
    }
    EmpiricalType::from_counts(counts)
}

/// Training-sequence length `N = ⌈αn⌉`.
pub fn training_length(alpha: f64, n: u64) -> Result<u64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("α must be positive and finite, got {alpha}")));
    }
    let len = (alpha * n as f64).ceil();
    if len < 1.0 {
        return Err(Error::domain("training length ⌈αn⌉ is zero"));
    }
    Ok(len as u64)
}

/// The random stream type used throughout the crate.
pub type StreamRng = ChaCha8Rng;

/// Counter-based stream: `(seed, stream)` fully determines the output.
///
/// Simulation trials use one stream per trial index so that results do not
/// depend on how trials are scheduled across workers.
pub fn seeded_stream(seed: u64, stream: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Draws `n` i.i.d. symbols from `dist` by inverting its cdf.
pub fn sample<R: Rng + ?Sized>(dist: &Distribution, n: usize, rng: &mut R) -> Result<Sequence> {
    if n == 0 {
        return Err(Error::domain("sample length must be ≥ 1"));
    }
    let mut cdf = Vec::with_capacity(dist.alphabet_size());
    let mut acc = 0.0;
    for &p in dist.probs() {
        acc += p;
        cdf.push(acc);
    }
    // last symbol with positive mass absorbs rounding at the top of the cdf
    let top = dist.support().last().copied().unwrap_or(0);
    let symbols = (0..n)
        .map(|_| {
            let u: f64 = rng.random::<f64>() * acc;
            cdf.iter()
                .position(|&c| u < c)
                .map(|i| if dist.probs()[i] > 0.0 { i } else { top })
                .unwrap_or(top)
        })
        .collect();
    Ok(Sequence(symbols))
}

/// Draws the empirical type of an i.i.d. length-`n` sequence directly.
///
/// Uses the chain of conditional binomials of the multinomial law, so the
/// cost is `O(|X|)` per draw instead of `O(n)`.
pub fn sample_type<R: Rng + ?Sized>(dist: &Distribution, n: u64, rng: &mut R) -> Result<EmpiricalType> {
    if n == 0 {
        return Err(Error::domain("sample length must be ≥ 1"));
    }
    let probs = dist.probs();
    let mut counts = vec![0u64; probs.len()];
    let mut remaining = n;
    let mut mass = 1.0_f64;
    let last = dist.support().last().copied().unwrap_or(probs.len() - 1);
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i == last {
            counts[i] = remaining;
            break;
        }
        if p <= 0.0 {
            continue;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let k = Binomial::new(remaining, q)
            .map_err(|e| Error::domain(format!("binomial sampler: {e}")))?
            .sample(rng);
        counts[i] = k;
        remaining -= k;
        mass -= p;
    }
    Ok(EmpiricalType { counts, n })
}

/// `(αP₁ + P₂)/(1 + α)`; `α = 0` returns `P₂`.
pub fn mixture(p1: &Distribution, p2: &Distribution, alpha: f64) -> Result<Distribution> {
    check_same_alphabet(p1, p2)?;
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("mixture weight α must be ≥ 0, got {alpha}")));
    }
    Ok(Distribution(mixture_probs(p1.probs(), p2.probs(), alpha)))
}

pub(crate) fn mixture_probs(p1: &[f64], p2: &[f64], alpha: f64) -> Vec<f64> {
    p1.iter()
        .zip(p2)
        .map(|(&a, &b)| if a == b { a } else { (alpha * a + b) / (1.0 + alpha) })
        .collect()
}

/// Whether `t` lies in the typical set `max_x |t(x) − P(x)| ≤ √(ln n / n)`.
pub fn in_typical_set(t: &EmpiricalType, p: &Distribution, n: u64) -> Result<bool> {
    if n < 2 {
        return Err(Error::domain("typical set needs n ≥ 2"));
    }
    if t.n() != n {
        return Err(Error::domain(format!("type has length {}, expected {n}", t.n())));
    }
    if t.alphabet_size() != p.alphabet_size() {
        return Err(Error::AlphabetMismatch {
            left: t.alphabet_size(),
            right: p.alphabet_size(),
        });
    }
    let radius = ((n as f64).ln() / n as f64).sqrt();
    let dev = t
        .frequencies()
        .iter()
        .zip(p.probs())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(dev <= radius)
}

/// Number of cells `(N+1)^{|X|−1}(n+1)^{|X|−1}` visited by a pair-lattice scan.
pub fn lattice_pair_cells(n_train: u64, n_test: u64, alphabet_size: usize) -> f64 {
    let e = alphabet_size as i32 - 1;
    (n_train as f64 + 1.0).powi(e) * (n_test as f64 + 1.0).powi(e)
}

/// All count vectors of length `alphabet_size` summing to `n`, in
/// lexicographic order of the leading coordinates.
pub fn enumerate_counts(n: u64, alphabet_size: usize) -> Vec<Vec<u64>> {
    fn rec(prefix: &mut Vec<u64>, left: u64, slots: usize, out: &mut Vec<Vec<u64>>) {
        if slots == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for c in 0..=left {
            prefix.push(c);
            rec(prefix, left - c, slots - 1, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if alphabet_size > 0 {
        rec(&mut Vec::with_capacity(alphabet_size), n, alphabet_size, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(v: &[usize]) -> Sequence {
        Sequence(v.to_vec())
    }

    #[test]
    fn empirical_type_counts() {
        let t = empirical_type(&seq(&[0, 1, 1, 0]), 2).unwrap();
        assert_eq!((t.counts(), t.n()), (&[2, 2][..], 4));
        let t = empirical_type(&seq(&[0, 0, 0]), 2).unwrap();
        assert_eq!((t.counts(), t.n()), (&[3, 0][..], 3));
        let t = empirical_type(&seq(&[2, 0, 1, 2]), 3).unwrap();
        assert_eq!((t.counts(), t.n()), (&[1, 1, 2][..], 4));
    }

    #[test]
    fn empirical_type_errors() {
        assert!(empirical_type(&seq(&[]), 2).is_err());
        assert!(empirical_type(&seq(&[0, 2]), 2).is_err());
    }

    #[test]
    fn distribution_validation() {
        assert!(Distribution::new(vec![1.0]).is_err());
        assert!(Distribution::new(vec![0.5, 0.6]).is_err());
        assert!(Distribution::new(vec![-0.1, 1.1]).is_err());
        assert!(Distribution::new(vec![f64::NAN, 1.0]).is_err());
        assert!(Distribution::new(vec![0.1, 0.2, 0.7]).is_ok());
    }

    #[test]
    fn sampling_point_mass_and_determinism() {
        let pm = Distribution::point_mass(2, 1).unwrap();
        let mut rng = seeded_stream(3, 0);
        assert_eq!(sample(&pm, 5, &mut rng).unwrap(), seq(&[1, 1, 1, 1, 1]));
        let t = sample_type(&pm, 50, &mut rng).unwrap();
        assert_eq!(t.counts(), &[0, 50]);

        let b = Distribution::bernoulli(0.2).unwrap();
        let a = sample(&b, 1000, &mut seeded_stream(7, 0)).unwrap();
        let c = sample(&b, 1000, &mut seeded_stream(7, 0)).unwrap();
        assert_eq!(a, c);
        let d = sample(&b, 1000, &mut seeded_stream(7, 1)).unwrap();
        assert_ne!(a, d);
        assert!(sample(&b, 0, &mut seeded_stream(7, 0)).is_err());
    }

    #[test]
    fn sampling_frequency_within_four_sigma() {
        // sd = sqrt(0.2 * 0.8 / 1e5) = 0.00126; 4 sd ≈ 0.005
        let b = Distribution::bernoulli(0.2).unwrap();
        let s = sample(&b, 100_000, &mut seeded_stream(7, 0)).unwrap();
        let t = empirical_type(&s, 2).unwrap();
        assert!((t.frequencies()[1] - 0.2).abs() <= 0.005);

        let t = sample_type(&b, 100_000, &mut seeded_stream(7, 0)).unwrap();
        assert!((t.frequencies()[1] - 0.2).abs() <= 0.005);
    }

    #[test]
    fn sample_type_skips_zero_mass_symbols() {
        let d = Distribution::new(vec![0.5, 0.0, 0.5, 0.0]).unwrap();
        let mut rng = seeded_stream(1, 2);
        for _ in 0..200 {
            let t = sample_type(&d, 17, &mut rng).unwrap();
            assert_eq!(t.counts()[1], 0);
            assert_eq!(t.counts()[3], 0);
            assert_eq!(t.n(), 17);
        }
    }

    #[test]
    fn mixture_cases() {
        let p = Distribution::new(vec![0.1, 0.3, 0.6]).unwrap();
        assert_eq!(mixture(&p, &p, 3.7).unwrap(), p);
        let q = Distribution::new(vec![0.5, 0.25, 0.25]).unwrap();
        assert_eq!(mixture(&p, &q, 0.0).unwrap(), q);
        let m = mixture(&Distribution::bernoulli(0.2).unwrap(), &Distribution::bernoulli(0.4).unwrap(), 2.0).unwrap();
        assert!((m.probs()[1] - 0.8 / 3.0).abs() < 1e-15);
        let half = mixture(&p, &q, 1.0).unwrap();
        for i in 0..3 {
            assert!((half.probs()[i] - 0.5 * (p.probs()[i] + q.probs()[i])).abs() < 1e-15);
        }
        assert!(mixture(&p, &Distribution::bernoulli(0.5).unwrap(), 1.0).is_err());
    }

    #[test]
    fn typical_set_membership() {
        let b = Distribution::bernoulli(0.2).unwrap();
        let exact = EmpiricalType::from_counts(vec![80, 20]).unwrap();
        assert!(in_typical_set(&exact, &b, 100).unwrap());
        let far = EmpiricalType::from_counts(vec![0, 100]).unwrap();
        assert!(!in_typical_set(&far, &b, 100).unwrap());
        let near = EmpiricalType::from_counts(vec![79, 21]).unwrap();
        assert!(in_typical_set(&near, &b, 100).unwrap());
        let one = EmpiricalType::from_counts(vec![1, 0]).unwrap();
        assert!(in_typical_set(&one, &b, 1).is_err());
        assert!(in_typical_set(&exact, &b, 50).is_err());
    }

    #[test]
    fn count_enumeration_sizes() {
        assert_eq!(enumerate_counts(5, 2).len(), 6);
        assert_eq!(enumerate_counts(4, 3).len(), 15);
        assert!(enumerate_counts(4, 3).iter().all(|c| c.iter().sum::<u64>() == 4));
        assert_eq!(lattice_pair_cells(100, 50, 2), 101.0 * 51.0);
    }

    #[test]
    fn training_length_uses_ceiling() {
        assert_eq!(training_length(2.0, 5000).unwrap(), 10_000);
        assert_eq!(training_length(0.5, 3).unwrap(), 2);
        assert!(training_length(0.0, 3).is_err());
    }

    proptest::proptest! {
        #[test]
        fn point_mass_types_are_the_point_mass(symbol in 0usize..4, n in 1usize..200, seed in 0u64..1000) {
            let pm = Distribution::point_mass(4, symbol).unwrap();
            let s = sample(&pm, n, &mut seeded_stream(seed, 0)).unwrap();
            let t = empirical_type(&s, 4).unwrap();
            proptest::prop_assert_eq!(t.to_distribution(), pm);
        }
    }
}
