//! Correlated source generation and crossover estimation.
//!
//! The side information is `Y = X + E` where `X ~ N(0, 1)` and `E` follows a
//! three-way mixture: `N(0, σ_e²)` with probability `q1`,
//! `N(0, σ_e² + σ_i²)` with probability `q2`, and exactly zero otherwise.
//! Setting `q1 = 1` gives the Gaussian channel, `q1 + q2 = 1` the
//! Gaussian-Bernoulli-Gaussian channel and `q1 + q2 < 1, q1·q2 = 0` the
//! Gaussian-erasure channel.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Error, Result};
use crate::par;
use crate::quantizer::QuantizerSpec;
use crate::seed;

/// Parameters of the additive error mixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationModel {
    sigma_e_sq: f64,
    sigma_i_sq: f64,
    q1: f64,
    q2: f64,
}

impl CorrelationModel {
    pub fn new(sigma_e_sq: f64, sigma_i_sq: f64, q1: f64, q2: f64) -> Result<Self> {
        let config = |field: &str, reason: String| Error::Config { field: field.into(), reason };
        if !(sigma_e_sq.is_finite() && sigma_e_sq >= 0.0) {
            return Err(config("sigma_e_sq", format!("must be nonnegative, got {sigma_e_sq}")));
        }
        if !(sigma_i_sq.is_finite() && sigma_i_sq >= 0.0) {
            return Err(config("sigma_i_sq", format!("must be nonnegative, got {sigma_i_sq}")));
        }
        for (name, q) in [("q1", q1), ("q2", q2)] {
            if !(0.0..=1.0).contains(&q) {
                return Err(config(name, format!("must be a probability, got {q}")));
            }
        }
        if q1 + q2 > 1.0 + 1e-12 {
            return Err(config("q1", format!("q1+q2 > 1 ({q1} + {q2})")));
        }
        if q2 > 0.0 && sigma_i_sq < 10.0 * sigma_e_sq {
            log::warn!("sigma_i_sq = {sigma_i_sq} is not much larger than sigma_e_sq = {sigma_e_sq}");
        }
        Ok(Self { sigma_e_sq, sigma_i_sq, q1, q2 })
    }

    /// Pure Gaussian correlation, `E ~ N(0, σ_e²)`.
    pub fn gaussian(sigma_e_sq: f64) -> Result<Self> {
        Self::new(sigma_e_sq, 0.0, 1.0, 0.0)
    }

    /// Gaussian-erasure correlation. Requires `q1·q2 = 0` and `q1 + q2 < 1`.
    pub fn gaussian_erasure(sigma_e_sq: f64, sigma_i_sq: f64, q1: f64, q2: f64) -> Result<Self> {
        if q1 * q2 != 0.0 {
            return Err(Error::Config { field: "q1".into(), reason: "GE channel needs q1*q2 = 0".into() });
        }
        if q1 + q2 >= 1.0 {
            return Err(Error::Config { field: "q1".into(), reason: "GE channel needs q1+q2 < 1".into() });
        }
        Self::new(sigma_e_sq, sigma_i_sq, q1, q2)
    }

    /// The noiseless channel `E = 0`.
    pub fn noiseless() -> Self {
        Self { sigma_e_sq: 0.0, sigma_i_sq: 0.0, q1: 0.0, q2: 0.0 }
    }

    pub fn sigma_e_sq(&self) -> f64 {
        self.sigma_e_sq
    }

    pub fn sigma_i_sq(&self) -> f64 {
        self.sigma_i_sq
    }

    pub fn q1(&self) -> f64 {
        self.q1
    }

    pub fn q2(&self) -> f64 {
        self.q2
    }

    /// Same mixture weights with a different `σ_e²`.
    pub fn with_sigma_e_sq(&self, sigma_e_sq: f64) -> Result<Self> {
        Self::new(sigma_e_sq, self.sigma_i_sq, self.q1, self.q2)
    }

    /// Draws one error sample.
    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        if u >= self.q1 + self.q2 {
            return 0.0;
        }
        let z: f64 = rng.sample(StandardNormal);
        let variance = if u < self.q1 { self.sigma_e_sq } else { self.sigma_e_sq + self.sigma_i_sq };
        z * variance.sqrt()
    }
}

/// `n` i.i.d. standard normal source samples.
pub fn sample_source<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// `n` i.i.d. draws of the error mixture.
pub fn sample_error<R: Rng + ?Sized>(model: &CorrelationModel, n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| model.draw(rng)).collect()
}

/// `Y = X + E` elementwise.
pub fn apply_channel(x: &[f64], e: &[f64]) -> Result<Vec<f64>> {
    if x.len() != e.len() {
        return Err(domain(format!("source has {} samples, error has {}", x.len(), e.len())));
    }
    Ok(x.iter().zip(e).map(|(a, b)| a + b).collect())
}

/// Fraction of positions where two bit sequences differ.
pub fn estimate_aggregate_crossover(x: &[u8], y: &[u8]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(domain(format!("bit sequences differ in length: {} vs {}", x.len(), y.len())));
    }
    if x.is_empty() {
        return Err(domain("cannot estimate a crossover from empty sequences"));
    }
    let weight = x.iter().zip(y).filter(|(a, b)| a != b).count();
    Ok(weight as f64 / x.len() as f64)
}

/// Raw disagreement counts between quantized `X` and `Y` labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrossoverCounts {
    /// Per plane, LSB first.
    pub flips: Vec<u64>,
    /// Σ over samples of the per-sample Hamming weight squared.
    pub weight_sq: u64,
    pub samples: u64,
}

impl CrossoverCounts {
    pub fn new(bits: u32) -> Self {
        Self { flips: vec![0; bits as usize], weight_sq: 0, samples: 0 }
    }

    #[inline]
    pub fn record(&mut self, diff: u32) {
        let mut d = diff;
        while d != 0 {
            self.flips[d.trailing_zeros() as usize] += 1;
            d &= d - 1;
        }
        let w = u64::from(diff.count_ones());
        self.weight_sq += w * w;
        self.samples += 1;
    }

    pub fn merge(&mut self, other: &Self) {
        for (a, b) in self.flips.iter_mut().zip(&other.flips) {
            *a += b;
        }
        self.weight_sq += other.weight_sq;
        self.samples += other.samples;
    }

    /// Total Hamming weight of the label differences.
    pub fn total_flips(&self) -> u64 {
        self.flips.iter().sum()
    }
}

/// Per-bit-plane crossover probabilities, index 0 = LSB.
#[derive(Debug, Clone, PartialEq)]
pub struct BitplaneProfile {
    per_plane: Vec<f64>,
    std_errors: Vec<f64>,
    aggregate: f64,
    aggregate_se: f64,
    sample_count: u64,
}

impl BitplaneProfile {
    /// Profile with known probabilities and no sampling error.
    pub fn from_probabilities(per_plane: Vec<f64>) -> Result<Self> {
        if per_plane.is_empty() {
            return Err(domain("profile needs at least one plane"));
        }
        if let Some(p) = per_plane.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(domain(format!("crossover {p} is not a probability")));
        }
        let aggregate = per_plane.iter().sum::<f64>() / per_plane.len() as f64;
        Ok(Self { std_errors: vec![0.0; per_plane.len()], per_plane, aggregate, aggregate_se: 0.0, sample_count: 0 })
    }

    /// A profile with every plane at `p` (the single-BSC model).
    pub fn flat(bits: u32, p: f64) -> Result<Self> {
        Self::from_probabilities(vec![p; bits as usize])
    }

    pub fn from_counts(counts: &CrossoverCounts) -> Self {
        let t = counts.samples.max(1) as f64;
        let b = counts.flips.len() as f64;
        let per_plane: Vec<f64> = counts.flips.iter().map(|&c| c as f64 / t).collect();
        let std_errors = per_plane.iter().map(|&p| (p * (1.0 - p) / t).sqrt()).collect();
        let aggregate = per_plane.iter().sum::<f64>() / b;
        let mean_w = counts.total_flips() as f64 / t;
        let var_w = (counts.weight_sq as f64 / t - mean_w * mean_w).max(0.0);
        Self { per_plane, std_errors, aggregate, aggregate_se: (var_w / t).sqrt() / b, sample_count: counts.samples }
    }

    pub fn bits(&self) -> u32 {
        self.per_plane.len() as u32
    }

    /// `p_k` for 1-based plane `k` (1 = LSB).
    pub fn plane(&self, k: usize) -> f64 {
        self.per_plane[k - 1]
    }

    pub fn per_plane(&self) -> &[f64] {
        &self.per_plane
    }

    /// Binomial standard errors `sqrt(p(1-p)/trials)`, LSB first.
    pub fn std_errors(&self) -> &[f64] {
        &self.std_errors
    }

    /// Mean of the per-plane probabilities; the single-BSC parameter.
    pub fn aggregate(&self) -> f64 {
        self.aggregate
    }

    /// Standard error of the aggregate, from the per-sample weight variance.
    pub fn aggregate_se(&self) -> f64 {
        self.aggregate_se
    }

    pub fn sample_count(&self) -> u64 {
        self.sample_count
    }

    /// Per-plane probabilities made safe for LLR use.
    pub fn decoder_probabilities(&self) -> Vec<f64> {
        self.per_plane.iter().map(|&p| self.decoder_probability(p)).collect()
    }

    /// The aggregate made safe for LLR use.
    pub fn decoder_aggregate(&self) -> f64 {
        self.decoder_probability(self.aggregate)
    }

    fn decoder_probability(&self, p: f64) -> f64 {
        let floor = if self.sample_count > 0 { 0.5 / self.sample_count as f64 } else { 1e-12 };
        if p > 0.5 {
            log::warn!("crossover {p} exceeds 0.5; clamped for LLR use");
        }
        p.clamp(floor, 0.5)
    }
}

/// Trials per independently seeded chunk of the Monte Carlo estimator.
pub const PROFILE_CHUNK: u64 = 1 << 16;

/// Tallies label disagreements between quantized `x` and `y`.
pub fn count_crossovers(spec: &QuantizerSpec, x: &[f64], y: &[f64]) -> Result<CrossoverCounts> {
    if x.len() != y.len() {
        return Err(domain(format!("{} source samples vs {} side samples", x.len(), y.len())));
    }
    let mut counts = CrossoverCounts::new(spec.bits());
    for (&a, &b) in x.iter().zip(y) {
        let qa = spec.label(spec.quantize(a)?);
        let qb = spec.label(spec.quantize(b)?);
        counts.record(qa ^ qb);
    }
    Ok(counts)
}

/// Monte Carlo estimate of the per-plane crossover probabilities.
///
/// Trials are split into chunks of [`PROFILE_CHUNK`]; chunk `c` draws from
/// the stream derived from `(key, c)`. Chunks are tallied in parallel when
/// available and merged, so the result depends only on `(key, trials)`.
pub fn estimate_bitplane_crossovers(
    model: &CorrelationModel,
    spec: &QuantizerSpec,
    trials: u64,
    key: u64,
) -> BitplaneProfile {
    if trials < 10_000 {
        log::warn!("only {trials} trials for crossover estimation");
    }
    let chunks = trials.div_ceil(PROFILE_CHUNK);
    let partial = par::map_range(chunks as usize, |c| {
        let c = c as u64;
        let len = PROFILE_CHUNK.min(trials - c * PROFILE_CHUNK);
        let mut rng = seed::stream(key, seed::tag::PROFILE, c, 0, 0);
        let mut counts = CrossoverCounts::new(spec.bits());
        for _ in 0..len {
            let x: f64 = rng.sample(StandardNormal);
            let y = x + model.draw(&mut rng);
            let diff = spec.label(spec.quantize_finite(x)) ^ spec.label(spec.quantize_finite(y));
            counts.record(diff);
        }
        counts
    });
    let mut total = CrossoverCounts::new(spec.bits());
    for counts in &partial {
        total.merge(counts);
    }
    BitplaneProfile::from_counts(&total)
}
