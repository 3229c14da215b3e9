//! Bit-plane plumbing between quantized samples and code blocks.
//!
//! Bits are laid out sample by sample, LSB first, so global bit `i`
//! (0-based) belongs to plane `i mod b` (0-based; plane 0 is the LSB).
//! Code blocks cut this stream every `n` bits, so when `b` does not divide
//! `n` a block may begin in the middle of a sample.

use rand::seq::SliceRandom;

use crate::error::{domain, Result};
use crate::seed;

/// Gathers position `k` of every `b`-bit sample into plane `k`.
pub fn split_bitplanes(bits: &[u8], b: usize) -> Result<Vec<Vec<u8>>> {
    if b == 0 || !bits.len().is_multiple_of(b) {
        return Err(domain(format!("{} bits do not split into {b}-bit samples", bits.len())));
    }
    let mut planes = vec![Vec::with_capacity(bits.len() / b); b];
    for sample in bits.chunks_exact(b) {
        for (plane, &bit) in planes.iter_mut().zip(sample) {
            plane.push(bit);
        }
    }
    Ok(planes)
}

/// Inverse of [`split_bitplanes`].
pub fn merge_bitplanes(planes: &[Vec<u8>]) -> Result<Vec<u8>> {
    let len = planes.first().map_or(0, Vec::len);
    if planes.iter().any(|p| p.len() != len) {
        return Err(domain("bit-planes have different lengths"));
    }
    let mut bits = Vec::with_capacity(len * planes.len());
    for i in 0..len {
        bits.extend(planes.iter().map(|p| p[i]));
    }
    Ok(bits)
}

/// Crossover probability of each of the `n` positions in the first block.
///
/// `per_plane[k]` is the probability of plane `k + 1`.
pub fn assign_crossovers(n: usize, per_plane: &[f64]) -> Vec<f64> {
    assign_crossovers_at(0, n, per_plane)
}

/// Crossover probability of global bits `offset..offset + n`.
pub fn assign_crossovers_at(offset: usize, n: usize, per_plane: &[f64]) -> Vec<f64> {
    let b = per_plane.len();
    (offset..offset + n).map(|i| per_plane[i % b]).collect()
}

/// A permutation of `0..n` applied to data, side information and
/// per-position crossover probabilities alike.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interleaver {
    permutation: Vec<u32>,
    seed: Option<u64>,
}

impl Interleaver {
    /// Uniformly random permutation drawn from the stream keyed by `seed`.
    pub fn random(n: usize, seed_value: u64) -> Result<Self> {
        if n == 0 {
            return Err(domain("interleaver length must be positive"));
        }
        let mut permutation: Vec<u32> = (0..n as u32).collect();
        permutation.shuffle(&mut seed::stream(seed_value, seed::tag::INTERLEAVER, n as u64, 0, 0));
        Ok(Self { permutation, seed: Some(seed_value) })
    }

    pub fn identity(n: usize) -> Self {
        Self { permutation: (0..n as u32).collect(), seed: None }
    }

    pub fn len(&self) -> usize {
        self.permutation.len()
    }

    pub fn is_empty(&self) -> bool {
        self.permutation.is_empty()
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn permutation(&self) -> &[u32] {
        &self.permutation
    }

    /// `out[i] = v[π(i)]`.
    pub fn interleave<T: Copy>(&self, v: &[T]) -> Result<Vec<T>> {
        self.check_len(v.len())?;
        Ok(self.permutation.iter().map(|&p| v[p as usize]).collect())
    }

    /// `out[π(i)] = v[i]`.
    pub fn deinterleave<T: Copy + Default>(&self, v: &[T]) -> Result<Vec<T>> {
        self.check_len(v.len())?;
        let mut out = vec![T::default(); v.len()];
        for (&p, &x) in self.permutation.iter().zip(v) {
            out[p as usize] = x;
        }
        Ok(out)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.permutation.len() {
            return Err(domain(format!("sequence of length {len} for interleaver of length {}", self.len())));
        }
        Ok(())
    }
}

/// `make_interleaver(n, seed)`; `None` selects the identity permutation.
pub fn make_interleaver(n: usize, seed_value: Option<u64>) -> Result<Interleaver> {
    match seed_value {
        Some(s) => Interleaver::random(n, s),
        None if n > 0 => Ok(Interleaver::identity(n)),
        None => Err(domain("interleaver length must be positive")),
    }
}
