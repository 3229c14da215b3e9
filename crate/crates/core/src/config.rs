//! Experiment configuration.
//!
//! Configs are TOML files; every key is optional and defaults to the
//! reference setup (6-bit quantizer, Gaussian-erasure channel with
//! `q1 = 0.2`, rate-1/2 irregular code of length 10⁴, 50 iterations).
//!
//! ```toml
//! [quantizer]
//! bits = 6
//! range = [-3.0, 3.0]
//! labeling = "natural_binary"   # or "gray"
//!
//! [channel]
//! q1 = 0.2
//! q2 = 0.0
//! sigma_i_sq = 0.0
//! # sigma_e_sq = 0.01          # fixes one point instead of the ratio grids
//! profile_ratios = [0.1, 0.16, 0.25, 0.4, 0.63, 1.0, 1.6, 2.5, 4.0]
//! sweep_ratios = [500.0, 1000.0, 1500.0, 2000.0, 3000.0, 5000.0]
//! profile_trials = 1000000
//!
//! [code]
//! n = 10000
//! seed = 1
//! rate = 0.5
//! lambda = [[2, 0.234029], [3, 0.212425], [6, 0.146898], [7, 0.102840], [20, 0.303808]]
//! rho = [[8, 0.71875], [9, 0.28125]]
//!
//! [decode]
//! max_iterations = 50
//!
//! [run]
//! frames = 100
//! seed = 1
//! workers = 1                   # 0 = all cores
//! schemes = ["standard", "hybrid", "hybrid_no_interleave", "per_bitplane"]
//! data_kinds = ["actual", "artificial"]
//! ```
//!
//! Ratios are `σ_e² / σ_q²` with `σ_q² = Δ²/12`.

use std::path::Path;

use serde::Deserialize;

use crate::channel::CorrelationModel;
use crate::error::{Error, Result};
use crate::ldpc::DegreeDistribution;
use crate::quantizer::{Labeling, QuantizerSpec};
use crate::schemes::{DataKind, SchemeKind};

/// Default grid for crossover profiles.
pub const DEFAULT_PROFILE_RATIOS: [f64; 9] = [0.1, 0.16, 0.25, 0.4, 0.63, 1.0, 1.6, 2.5, 4.0];

/// Default grid for decoding sweeps. The rate-1/2 code only starts failing
/// once the aggregate crossover nears its ceiling of `q1 / 2`, which with
/// the default quantizer happens above a ratio of about 1000.
pub const DEFAULT_SWEEP_RATIOS: [f64; 6] = [500.0, 1000.0, 1500.0, 2000.0, 3000.0, 5000.0];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub quantizer: QuantizerSpec,
    pub q1: f64,
    pub q2: f64,
    pub sigma_i_sq: f64,
    pub profile_ratios: Vec<f64>,
    pub sweep_ratios: Vec<f64>,
    pub profile_trials: u64,
    pub distribution: DegreeDistribution,
    pub code_rate: f64,
    pub code_n: usize,
    pub code_seed: u64,
    pub max_iterations: usize,
    pub frames: u64,
    pub seed: u64,
    pub workers: usize,
    pub schemes: Vec<SchemeKind>,
    pub data_kinds: Vec<DataKind>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        RawConfig::default().validate().expect("defaults are valid")
    }
}

impl ExperimentConfig {
    /// Channel model at a given `σ_e²/σ_q²`.
    pub fn model_at(&self, ratio: f64) -> Result<CorrelationModel> {
        let sigma_e_sq = ratio * self.quantizer.noise_variance();
        CorrelationModel::new(sigma_e_sq, self.sigma_i_sq, self.q1, self.q2)
    }

    /// Re-checks every invariant; used after command-line overrides.
    pub fn revalidate(&self) -> Result<()> {
        check_grid("channel.profile_ratios", &self.profile_ratios)?;
        check_grid("channel.sweep_ratios", &self.sweep_ratios)?;
        if self.frames == 0 {
            return Err(field("run.frames", "must be positive"));
        }
        Ok(())
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::ConfigParse(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
    raw.validate()
}

fn field(name: &str, reason: impl Into<String>) -> Error {
    Error::Config { field: name.into(), reason: reason.into() }
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(field(name, "empty"));
    }
    if let Some(r) = grid.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(field(name, format!("ratio {r} is not strictly positive")));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(field(name, "unsorted"));
    }
    Ok(())
}

#[derive(Debug, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
struct RawConfig {
    quantizer: RawQuantizer,
    channel: RawChannel,
    code: RawCode,
    decode: RawDecode,
    run: RawRun,
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawQuantizer {
    bits: u32,
    range: [f64; 2],
    labeling: Labeling,
}

impl Default for RawQuantizer {
    fn default() -> Self {
        Self { bits: 6, range: [-3.0, 3.0], labeling: Labeling::NaturalBinary }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawChannel {
    q1: f64,
    q2: f64,
    sigma_i_sq: f64,
    sigma_e_sq: Option<f64>,
    profile_ratios: Vec<f64>,
    sweep_ratios: Vec<f64>,
    profile_trials: u64,
}

impl Default for RawChannel {
    fn default() -> Self {
        Self {
            q1: 0.2,
            q2: 0.0,
            sigma_i_sq: 0.0,
            sigma_e_sq: None,
            profile_ratios: DEFAULT_PROFILE_RATIOS.to_vec(),
            sweep_ratios: DEFAULT_SWEEP_RATIOS.to_vec(),
            profile_trials: 1_000_000,
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawCode {
    n: usize,
    seed: u64,
    rate: f64,
    lambda: Vec<(usize, f64)>,
    rho: Vec<(usize, f64)>,
}

impl Default for RawCode {
    fn default() -> Self {
        let d = DegreeDistribution::rate_half_irregular();
        Self { n: 10_000, seed: 1, rate: 0.5, lambda: d.lambda, rho: d.rho }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawDecode {
    max_iterations: usize,
}

impl Default for RawDecode {
    fn default() -> Self {
        Self { max_iterations: 50 }
    }
}

#[derive(Debug, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RawRun {
    frames: u64,
    seed: u64,
    workers: usize,
    schemes: Vec<SchemeKind>,
    data_kinds: Vec<DataKind>,
}

impl Default for RawRun {
    fn default() -> Self {
        Self {
            frames: 100,
            seed: 1,
            workers: 1,
            schemes: SchemeKind::ALL.to_vec(),
            data_kinds: vec![DataKind::Actual, DataKind::Artificial],
        }
    }
}

impl RawConfig {
    fn validate(self) -> Result<ExperimentConfig> {
        let [low, high] = self.quantizer.range;
        let quantizer = QuantizerSpec::with_range(self.quantizer.bits, low, high)
            .map_err(|e| field("quantizer", e.to_string()))?
            .with_labeling(self.quantizer.labeling);

        let ch = self.channel;
        let (profile_ratios, sweep_ratios) = match ch.sigma_e_sq {
            Some(s) => {
                let r = s / quantizer.noise_variance();
                (vec![r], vec![r])
            }
            None => (ch.profile_ratios, ch.sweep_ratios),
        };
        check_grid("channel.profile_ratios", &profile_ratios)?;
        check_grid("channel.sweep_ratios", &sweep_ratios)?;
        // Model invariants (q1 + q2 <= 1, nonnegative variances).
        CorrelationModel::new(0.0, ch.sigma_i_sq, ch.q1, ch.q2)?;
        if ch.profile_trials == 0 {
            return Err(field("channel.profile_trials", "must be positive"));
        }

        let distribution = DegreeDistribution { lambda: self.code.lambda, rho: self.code.rho };
        distribution.validate().map_err(|e| field("code", e.to_string()))?;
        distribution.check_rate(self.code.rate).map_err(|e| field("code.rate", e.to_string()))?;
        if self.code.n == 0 {
            return Err(field("code.n", "must be positive"));
        }
        if self.run.frames == 0 {
            return Err(field("run.frames", "must be positive"));
        }
        if self.run.schemes.is_empty() {
            return Err(field("run.schemes", "empty"));
        }
        if self.run.data_kinds.is_empty() {
            return Err(field("run.data_kinds", "empty"));
        }
        let mut schemes = self.run.schemes;
        schemes.sort();
        schemes.dedup();
        let mut data_kinds = self.run.data_kinds;
        data_kinds.sort();
        data_kinds.dedup();

        Ok(ExperimentConfig {
            quantizer,
            q1: ch.q1,
            q2: ch.q2,
            sigma_i_sq: ch.sigma_i_sq,
            profile_ratios,
            sweep_ratios,
            profile_trials: ch.profile_trials,
            distribution,
            code_rate: self.code.rate,
            code_n: self.code.n,
            code_seed: self.code.seed,
            max_iterations: self.decode.max_iterations,
            frames: self.run.frames,
            seed: self.run.seed,
            workers: self.run.workers,
            schemes,
            data_kinds,
        })
    }
}
