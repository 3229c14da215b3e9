//! Uniform scalar quantization and bit serialization.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Mapping from cell index to bit label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Labeling {
    /// Weighted binary: bit k (1-based, LSB first) carries weight 2^(k-1).
    #[default]
    NaturalBinary,
    /// Reflected Gray code. Available for experiments; not the default.
    Gray,
}

/// Geometry of a `bits`-bit uniform quantizer whose cell 0 starts at
/// `lower_edge` and whose cells are `step` wide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizerSpec {
    bits: u32,
    step: f64,
    lower_edge: f64,
    labeling: Labeling,
}

impl QuantizerSpec {
    pub fn new(bits: u32, step: f64, lower_edge: f64) -> Result<Self> {
        if bits == 0 || bits > 30 {
            return Err(domain(format!("quantizer bits must be in 1..=30, got {bits}")));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(domain(format!("quantizer step must be positive, got {step}")));
        }
        if !lower_edge.is_finite() {
            return Err(domain("quantizer lower edge must be finite"));
        }
        Ok(Self { bits, step, lower_edge, labeling: Labeling::NaturalBinary })
    }

    /// Quantizer with `2^bits` cells exactly covering `[low, high)`.
    pub fn with_range(bits: u32, low: f64, high: f64) -> Result<Self> {
        if high.partial_cmp(&low) != Some(std::cmp::Ordering::Greater) {
            return Err(domain(format!("empty quantizer range [{low}, {high})")));
        }
        if bits == 0 || bits > 30 {
            return Err(domain(format!("quantizer bits must be in 1..=30, got {bits}")));
        }
        Self::new(bits, (high - low) / f64::from(1u32 << bits), low)
    }

    pub fn with_labeling(mut self, labeling: Labeling) -> Self {
        self.labeling = labeling;
        self
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn lower_edge(&self) -> f64 {
        self.lower_edge
    }

    pub fn labeling(&self) -> Labeling {
        self.labeling
    }

    pub fn levels(&self) -> u32 {
        1 << self.bits
    }

    /// Quantization noise variance Δ²/12 for in-range uniform input.
    pub fn noise_variance(&self) -> f64 {
        self.step * self.step / 12.0
    }

    /// Cell index of `sample`. Out-of-range samples saturate to the end cells.
    pub fn quantize(&self, sample: f64) -> Result<u32> {
        if !sample.is_finite() {
            return Err(domain(format!("cannot quantize non-finite sample {sample}")));
        }
        Ok(self.quantize_finite(sample))
    }

    /// `quantize` for callers that already know the sample is finite.
    #[inline]
    pub(crate) fn quantize_finite(&self, sample: f64) -> u32 {
        let cell = ((sample - self.lower_edge) / self.step).floor();
        let top = f64::from(self.levels() - 1);
        cell.clamp(0.0, top) as u32
    }

    /// Midpoint reconstruction of cell `index`.
    pub fn dequantize(&self, index: u32) -> Result<f64> {
        if index >= self.levels() {
            return Err(domain(format!("index {index} out of range for {} levels", self.levels())));
        }
        Ok(self.reconstruct(index))
    }

    #[inline]
    pub(crate) fn reconstruct(&self, index: u32) -> f64 {
        self.lower_edge + (f64::from(index) + 0.5) * self.step
    }

    /// Bit label of a cell index, honoring the configured labeling.
    #[inline]
    pub fn label(&self, index: u32) -> u32 {
        match self.labeling {
            Labeling::NaturalBinary => index,
            Labeling::Gray => index ^ (index >> 1),
        }
    }

    /// Inverse of [`label`](Self::label).
    #[inline]
    pub fn unlabel(&self, label: u32) -> u32 {
        match self.labeling {
            Labeling::NaturalBinary => label,
            Labeling::Gray => {
                let mut index = label;
                let mut shift = label >> 1;
                while shift != 0 {
                    index ^= shift;
                    shift >>= 1;
                }
                index
            }
        }
    }
}

/// LSB-first binary expansion of `index` into `bits` values in {0, 1}.
pub fn index_to_bits(index: u32, bits: u32) -> Result<Vec<u8>> {
    if bits == 0 || bits > 31 || index >> bits != 0 {
        return Err(domain(format!("index {index} does not fit in {bits} bits")));
    }
    Ok((0..bits).map(|k| ((index >> k) & 1) as u8).collect())
}

/// Inverse of [`index_to_bits`].
pub fn bits_to_index(bits: &[u8], width: u32) -> Result<u32> {
    if bits.len() != width as usize {
        return Err(domain(format!("expected {width} bits, got {}", bits.len())));
    }
    if width > 31 {
        return Err(domain("at most 31 bits per index"));
    }
    bits.iter().enumerate().try_fold(0u32, |acc, (k, &bit)| match bit {
        0 => Ok(acc),
        1 => Ok(acc | 1 << k),
        other => Err(domain(format!("bit value {other} at position {k}"))),
    })
}

/// Appends the LSB-first label bits of every index to `out`.
pub(crate) fn serialize_into(spec: &QuantizerSpec, indices: &[u32], out: &mut Vec<u8>) {
    let b = spec.bits();
    out.reserve(indices.len() * b as usize);
    for &index in indices {
        let label = spec.label(index);
        out.extend((0..b).map(|k| ((label >> k) & 1) as u8));
    }
}

/// Collects one index from each `b`-bit LSB-first chunk of `bits`.
pub(crate) fn deserialize(spec: &QuantizerSpec, bits: &[u8]) -> Vec<u32> {
    bits.chunks_exact(spec.bits() as usize)
        .map(|chunk| {
            let label = chunk.iter().enumerate().fold(0u32, |acc, (k, &bit)| acc | u32::from(bit & 1) << k);
            spec.unlabel(label)
        })
        .collect()
}
