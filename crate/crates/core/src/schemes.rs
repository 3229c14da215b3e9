//! End-to-end Slepian-Wolf pipelines and their metrics.
//!
//! The encoder quantizes `X`, serializes the indices LSB first and sends the
//! syndrome of each `n`-bit block. The decoder holds the quantized side
//! information `Y` and decodes with one of:
//!
//! * standard: one crossover probability (the plane average) at every position;
//! * hybrid: each position gets its own plane's probability, and data, side
//!   information and probabilities go through a per-frame interleaver;
//! * hybrid without interleaving: the same LLRs, no interleaver;
//! * per bit-plane: every plane is coded separately with its own constant
//!   probability, one block per plane.

use std::fmt;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::bitplane::{assign_crossovers_at, make_interleaver, split_bitplanes, Interleaver};
use crate::channel::{BitplaneProfile, CorrelationModel};
use crate::error::{domain, Result};
use crate::ldpc::{llr_init, BpDecoder, DecodeReport, LdpcCode};
use crate::par;
use crate::quantizer::{self, QuantizerSpec};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeKind {
    Standard,
    Hybrid,
    HybridNoInterleave,
    PerBitplane,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 4] =
        [SchemeKind::Standard, SchemeKind::Hybrid, SchemeKind::HybridNoInterleave, SchemeKind::PerBitplane];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::Standard => "standard",
            SchemeKind::Hybrid => "hybrid",
            SchemeKind::HybridNoInterleave => "hybrid_no_interleave",
            SchemeKind::PerBitplane => "per_bitplane",
        }
    }

    fn stream_id(self) -> u64 {
        self as u64
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Where the side information comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataKind {
    /// `y` is the quantized `Y = X + E`.
    Actual,
    /// `y` is `x` passed through the binary channel the decoder assumes.
    Artificial,
}

impl DataKind {
    pub fn name(self) -> &'static str {
        match self {
            DataKind::Actual => "actual",
            DataKind::Artificial => "artificial",
        }
    }
}

impl fmt::Display for DataKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Interleaver used by the hybrid decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InterleaveMode {
    Off,
    Identity,
    /// Seeded random permutation derived from the frame index.
    Random,
}

/// Metrics of one decoded block.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameResult {
    pub scheme: SchemeKind,
    pub data_kind: DataKind,
    pub ratio: f64,
    /// 1-based plane for per-bit-plane results.
    pub plane: Option<usize>,
    pub ber: f64,
    /// End-to-end distortion; `None` for artificial data.
    pub mse: Option<f64>,
    /// Distortion of the error-free reconstruction of the same samples.
    pub quantization_mse: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Syndrome bits sent for this block.
    pub syndrome_bits: usize,
    pub report: DecodeReport,
}

/// Results of one per-bit-plane frame.
#[derive(Debug, Clone, PartialEq)]
pub struct PerBitplaneResult {
    pub planes: Vec<FrameResult>,
    /// BER over all planes.
    pub ber: f64,
    pub mse: Option<f64>,
    pub quantization_mse: Option<f64>,
}

/// Flips each bit of `x` with probability `p`.
pub fn generate_artificial_side_info<R: Rng + ?Sized>(x: &[u8], p: f64, rng: &mut R) -> Result<Vec<u8>> {
    if !(0.0..=0.5).contains(&p) {
        return Err(domain(format!("BSC crossover {p} outside [0, 0.5]")));
    }
    Ok(x.iter().map(|&b| b ^ u8::from(rng.random::<f64>() < p)).collect())
}

/// Flips bit `i` with probability `p[i]`.
fn flip_per_position<R: Rng + ?Sized>(x: &[u8], p: &[f64], rng: &mut R) -> Vec<u8> {
    x.iter().zip(p).map(|(&b, &q)| b ^ u8::from(rng.random::<f64>() < q)).collect()
}

pub fn bit_error_rate(truth: &[u8], estimate: &[u8]) -> Result<f64> {
    if truth.len() != estimate.len() || truth.is_empty() {
        return Err(domain(format!("cannot compare {} bits with {} bits", truth.len(), estimate.len())));
    }
    Ok(truth.iter().zip(estimate).filter(|(a, b)| a != b).count() as f64 / truth.len() as f64)
}

/// `(ber, mse)` for sample-aligned bits. `mse` compares the reconstruction of
/// `x_hat` against the real-valued source `source`.
pub fn measure_metrics(x_true: &[u8], x_hat: &[u8], source: &[f64], spec: &QuantizerSpec) -> Result<(f64, f64)> {
    let b = spec.bits() as usize;
    if x_true.len() != source.len() * b || x_hat.len() != x_true.len() {
        return Err(domain(format!(
            "{} true bits, {} decoded bits and {} samples of {b} bits",
            x_true.len(),
            x_hat.len(),
            source.len()
        )));
    }
    let ber = bit_error_rate(x_true, x_hat)?;
    Ok((ber, reconstruction_mse(x_hat, source, spec)))
}

fn reconstruction_mse(bits: &[u8], source: &[f64], spec: &QuantizerSpec) -> f64 {
    let indices = quantizer::deserialize(spec, bits);
    let sum: f64 = indices.iter().zip(source).map(|(&i, &x)| (spec.reconstruct(i) - x).powi(2)).sum();
    sum / source.len().max(1) as f64
}

/// Samples per independently seeded source chunk.
const SOURCE_CHUNK: u64 = 4096;

/// The continuous `(X, Y)` sample stream of one grid point.
///
/// Sample `t` lives in chunk `t / 4096`, drawn from the stream keyed by
/// `(master, tag, point, chunk)`, so any window can be regenerated alone.
#[derive(Debug, Clone)]
pub struct SourceStream {
    model: CorrelationModel,
    master_seed: u64,
    tag: u64,
    point: u64,
}

impl SourceStream {
    pub fn new(model: CorrelationModel, master_seed: u64, point: u64) -> Self {
        Self { model, master_seed, tag: seed::tag::SOURCE, point }
    }

    fn with_tag(mut self, tag: u64) -> Self {
        self.tag = tag;
        self
    }

    /// `(X, Y)` for samples `start..end`.
    pub fn samples(&self, start: u64, end: u64) -> (Vec<f64>, Vec<f64>) {
        let mut xs = Vec::with_capacity((end - start) as usize);
        let mut ys = Vec::with_capacity((end - start) as usize);
        if start >= end {
            return (xs, ys);
        }
        for chunk in start / SOURCE_CHUNK..=(end - 1) / SOURCE_CHUNK {
            let mut rng = seed::stream(self.master_seed, self.tag, self.point, chunk, 0);
            let base = chunk * SOURCE_CHUNK;
            for t in base..base + SOURCE_CHUNK {
                let x: f64 = rng.sample(StandardNormal);
                let y = x + self.model.draw(&mut rng);
                if t >= start && t < end {
                    xs.push(x);
                    ys.push(y);
                }
            }
        }
        (xs, ys)
    }
}

/// One `n`-bit block cut from the serialized stream.
#[derive(Debug, Clone)]
pub struct StreamFrame {
    pub index: u64,
    /// Global index of the first bit.
    pub offset: u64,
    pub x: Vec<u8>,
    pub y: Vec<u8>,
    /// Frame-local bit index of the first sample wholly inside the frame.
    pub first_whole_bit: usize,
    /// `X` of the samples wholly inside the frame.
    pub whole_samples: Vec<f64>,
}

impl StreamFrame {
    /// Cuts block `index` of length `n` from `stream`.
    pub fn cut(stream: &SourceStream, spec: &QuantizerSpec, n: usize, index: u64) -> Self {
        let b = u64::from(spec.bits());
        let offset = index * n as u64;
        let end = offset + n as u64;
        let (s0, s1) = (offset / b, end.div_ceil(b));
        let (xs, ys) = stream.samples(s0, s1);
        let quantize = |v: &[f64]| {
            let idx: Vec<u32> = v.iter().map(|&s| spec.quantize_finite(s)).collect();
            let mut bits = Vec::new();
            quantizer::serialize_into(spec, &idx, &mut bits);
            bits
        };
        let skip = (offset - s0 * b) as usize;
        let x = quantize(&xs)[skip..skip + n].to_vec();
        let y = quantize(&ys)[skip..skip + n].to_vec();
        let first_whole = offset.div_ceil(b);
        let last_whole = end / b;
        let whole_samples = xs[(first_whole - s0) as usize..(last_whole.max(first_whole) - s0) as usize].to_vec();
        Self { index, offset, x, y, first_whole_bit: (first_whole * b - offset) as usize, whole_samples }
    }

    fn whole_bits<'b>(&self, bits: &'b [u8], b: usize) -> &'b [u8] {
        &bits[self.first_whole_bit..self.first_whole_bit + self.whole_samples.len() * b]
    }
}

/// Everything fixed at one grid point of an experiment.
#[derive(Debug, Clone)]
pub struct PointSetup<'a> {
    pub code: &'a LdpcCode,
    pub quantizer: QuantizerSpec,
    pub model: CorrelationModel,
    /// Crossover profile known to the decoder.
    pub profile: BitplaneProfile,
    pub ratio: f64,
    pub max_iterations: usize,
    pub master_seed: u64,
    /// Grid-point index; keys the source stream.
    pub point: u64,
}

impl PointSetup<'_> {
    pub fn source(&self) -> SourceStream {
        SourceStream::new(self.model, self.master_seed, self.point)
    }

    /// Block `index` of the serialized stream.
    pub fn frame(&self, index: u64) -> StreamFrame {
        StreamFrame::cut(&self.source(), &self.quantizer, self.code.n(), index)
    }

    fn artificial_rng(&self, scheme: SchemeKind, frame: u64) -> rand_chacha::ChaCha8Rng {
        seed::stream(self.master_seed, seed::tag::ARTIFICIAL, self.point, scheme.stream_id(), frame)
    }

    /// Single-BSC decoding: every position uses the aggregate crossover.
    pub fn run_standard(&self, frame: &StreamFrame, data: DataKind) -> Result<FrameResult> {
        let n = self.code.n();
        let y = match data {
            DataKind::Actual => frame.y.clone(),
            DataKind::Artificial => generate_artificial_side_info(
                &frame.x,
                self.profile.aggregate().min(0.5),
                &mut self.artificial_rng(SchemeKind::Standard, frame.index),
            )?,
        };
        let p = vec![self.profile.decoder_aggregate(); n];
        self.finish(SchemeKind::Standard, data, frame, &y, &p, None)
    }

    /// Multi-BSC decoding with per-position LLRs and optional interleaving.
    pub fn run_hybrid(&self, frame: &StreamFrame, data: DataKind, mode: InterleaveMode) -> Result<FrameResult> {
        let n = self.code.n();
        let scheme = if mode == InterleaveMode::Off { SchemeKind::HybridNoInterleave } else { SchemeKind::Hybrid };
        let offset = frame.offset as usize;
        let y = match data {
            DataKind::Actual => frame.y.clone(),
            DataKind::Artificial => {
                let raw = assign_crossovers_at(offset, n, self.profile.per_plane());
                flip_per_position(&frame.x, &raw, &mut self.artificial_rng(scheme, frame.index))
            }
        };
        let p = assign_crossovers_at(offset, n, &self.profile.decoder_probabilities());
        let interleaver = match mode {
            InterleaveMode::Off => None,
            InterleaveMode::Identity => Some(make_interleaver(n, None)?),
            InterleaveMode::Random => {
                let key = seed::derive(self.master_seed, seed::tag::INTERLEAVER, frame.index, 0, 0);
                Some(make_interleaver(n, Some(key))?)
            }
        };
        self.finish(scheme, data, frame, &y, &p, interleaver.as_ref())
    }

    fn finish(
        &self,
        scheme: SchemeKind,
        data: DataKind,
        frame: &StreamFrame,
        y: &[u8],
        p: &[f64],
        interleaver: Option<&Interleaver>,
    ) -> Result<FrameResult> {
        let (x_hat, report, syndrome_bits) = decode_block(self.code, &frame.x, y, p, interleaver, self.max_iterations)?;
        let ber = bit_error_rate(&frame.x, &x_hat)?;
        let (mse, quantization_mse) = match data {
            DataKind::Actual if !frame.whole_samples.is_empty() => {
                let b = self.quantizer.bits() as usize;
                let truth = frame.whole_bits(&frame.x, b);
                let decoded = frame.whole_bits(&x_hat, b);
                let (_, mse) = measure_metrics(truth, decoded, &frame.whole_samples, &self.quantizer)?;
                (Some(mse), Some(reconstruction_mse(truth, &frame.whole_samples, &self.quantizer)))
            }
            _ => (None, None),
        };
        Ok(FrameResult {
            scheme,
            data_kind: data,
            ratio: self.ratio,
            plane: None,
            ber,
            mse,
            quantization_mse,
            iterations: report.iterations,
            converged: report.converged,
            syndrome_bits,
            report,
        })
    }

    /// Decodes each bit-plane of `n` samples as its own block with the same
    /// code. Parallel and sequential scheduling return identical results.
    pub fn run_per_bitplane(&self, frame: u64, data: DataKind, parallel: bool) -> Result<PerBitplaneResult> {
        let n = self.code.n();
        let b = self.quantizer.bits() as usize;
        let source = self.source().with_tag(seed::tag::PLANE_SOURCE);
        let (xs, ys) = source.samples(frame * n as u64, (frame + 1) * n as u64);
        let serialize = |v: &[f64]| {
            let idx: Vec<u32> = v.iter().map(|&s| self.quantizer.quantize_finite(s)).collect();
            let mut bits = Vec::new();
            quantizer::serialize_into(&self.quantizer, &idx, &mut bits);
            bits
        };
        let x_bits = serialize(&xs);
        let x_planes = split_bitplanes(&x_bits, b)?;
        let y_planes = match data {
            DataKind::Actual => split_bitplanes(&serialize(&ys), b)?,
            DataKind::Artificial => {
                let mut rng = self.artificial_rng(SchemeKind::PerBitplane, frame);
                let mut planes = Vec::with_capacity(b);
                for (k, plane) in x_planes.iter().enumerate() {
                    planes.push(generate_artificial_side_info(plane, self.profile.per_plane()[k].min(0.5), &mut rng)?);
                }
                planes
            }
        };
        let decoder_p = self.profile.decoder_probabilities();
        let decode_plane = |k: usize| -> Result<(Vec<u8>, FrameResult)> {
            let p = vec![decoder_p[k]; n];
            let (x_hat, report, syndrome_bits) =
                decode_block(self.code, &x_planes[k], &y_planes[k], &p, None, self.max_iterations)?;
            let result = FrameResult {
                scheme: SchemeKind::PerBitplane,
                data_kind: data,
                ratio: self.ratio,
                plane: Some(k + 1),
                ber: bit_error_rate(&x_planes[k], &x_hat)?,
                mse: None,
                quantization_mse: None,
                iterations: report.iterations,
                converged: report.converged,
                syndrome_bits,
                report,
            };
            Ok((x_hat, result))
        };
        let decoded: Vec<Result<(Vec<u8>, FrameResult)>> =
            if parallel { par::map_range(b, decode_plane) } else { (0..b).map(decode_plane).collect() };
        let mut planes_hat = Vec::with_capacity(b);
        let mut planes = Vec::with_capacity(b);
        for d in decoded {
            let (x_hat, result) = d?;
            planes_hat.push(x_hat);
            planes.push(result);
        }
        let ber = planes.iter().map(|r| r.ber).sum::<f64>() / b as f64;
        let (mse, quantization_mse) = match data {
            DataKind::Actual => {
                let merged = crate::bitplane::merge_bitplanes(&planes_hat)?;
                let (_, mse) = measure_metrics(&x_bits, &merged, &xs, &self.quantizer)?;
                (Some(mse), Some(reconstruction_mse(&x_bits, &xs, &self.quantizer)))
            }
            DataKind::Artificial => (None, None),
        };
        Ok(PerBitplaneResult { planes, ber, mse, quantization_mse })
    }
}

/// Encodes `x` as a syndrome and decodes it against `y` with per-position
/// crossovers `p`, interleaving all three first when asked.
fn decode_block(
    code: &LdpcCode,
    x: &[u8],
    y: &[u8],
    p: &[f64],
    interleaver: Option<&Interleaver>,
    max_iterations: usize,
) -> Result<(Vec<u8>, DecodeReport, usize)> {
    if x.len() != code.n() || y.len() != code.n() || p.len() != code.n() {
        return Err(domain(format!("block of {} bits for a code of length {}", x.len(), code.n())));
    }
    let (x_in, y_in, p_in) = match interleaver {
        Some(il) => (il.interleave(x)?, il.interleave(y)?, il.interleave(p)?),
        None => (x.to_vec(), y.to_vec(), p.to_vec()),
    };
    let syndrome = code.compute_syndrome(&x_in)?;
    let llr = llr_init(&y_in, &p_in)?;
    let report = BpDecoder::new(code).decode(&syndrome, &llr, max_iterations)?;
    let x_hat = match interleaver {
        Some(il) => il.deinterleave(&report.decoded)?,
        None => report.decoded.clone(),
    };
    Ok((x_hat, report, syndrome.len()))
}
