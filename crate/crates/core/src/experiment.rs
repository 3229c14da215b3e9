//! Experiment runners behind the `profile`, `sweep` and `code` commands.
//!
//! Every CSV starts with a `# schema: <name>/<version>` line followed by a
//! header row. Floats are written in shortest round-trip form, and all
//! per-frame work is keyed by derived seeds and merged in frame order, so
//! output bytes depend only on the config and master seed.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use crate::cache::{self, CachedCode};
use crate::channel::{estimate_bitplane_crossovers, BitplaneProfile};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::ldpc::LdpcCode;
use crate::par;
use crate::schemes::{DataKind, FrameResult, InterleaveMode, PointSetup, SchemeKind};
use crate::seed;

pub const PROFILE_SCHEMA: &str = "# schema: mbsc-profile/1";
pub const SWEEP_SCHEMA: &str = "# schema: mbsc-sweep/1";

/// Profile-estimation key of point `index` on the profile grid (`grid = 0`)
/// or sweep grid (`grid = 1`).
pub fn profile_key(master: u64, grid: u64, index: u64) -> u64 {
    seed::derive(master, seed::tag::PROFILE, grid, index, 0)
}

/// Crossover profile at one ratio.
pub fn profile_at(cfg: &ExperimentConfig, ratio: f64, key: u64) -> Result<BitplaneProfile> {
    let model = cfg.model_at(ratio)?;
    Ok(estimate_bitplane_crossovers(&model, &cfg.quantizer, cfg.profile_trials, key))
}

/// Writes one profile row per ratio on the profile grid.
pub fn write_profile<W: Write + Send>(cfg: &ExperimentConfig, out: W) -> Result<()> {
    let b = cfg.quantizer.bits() as usize;
    let mut out = out;
    writeln!(out, "{PROFILE_SCHEMA}")?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["ratio".to_string(), "b".to_string()];
    header.extend((1..=b).map(|k| format!("p_{k}")));
    header.push("aggregate".into());
    header.extend((1..=b).map(|k| format!("se_{k}")));
    header.extend(["aggregate_se", "trials", "seed"].map(String::from));
    w.write_record(&header)?;
    par::with_workers(cfg.workers, || -> Result<()> {
        for (i, &ratio) in cfg.profile_ratios.iter().enumerate() {
            let profile = profile_at(cfg, ratio, profile_key(cfg.seed, 0, i as u64))?;
            let mut row = vec![ratio.to_string(), b.to_string()];
            row.extend(profile.per_plane().iter().map(f64::to_string));
            row.push(profile.aggregate().to_string());
            row.extend(profile.std_errors().iter().map(f64::to_string));
            row.push(profile.aggregate_se().to_string());
            row.push(profile.sample_count().to_string());
            row.push(cfg.seed.to_string());
            w.write_record(&row)?;
        }
        Ok(())
    })?;
    w.flush()?;
    Ok(())
}

/// Mean and standard error of a sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stat {
    pub mean: f64,
    pub se: f64,
    pub count: usize,
}

impl Stat {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Self {
        let v: Vec<f64> = values.into_iter().collect();
        let count = v.len();
        if count == 0 {
            return Self { mean: f64::NAN, se: f64::NAN, count };
        }
        let mean = v.iter().sum::<f64>() / count as f64;
        let se = if count > 1 {
            let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (count - 1) as f64;
            (var / count as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, se, count }
    }

    /// `sqrt(se_a² + se_b²)`.
    pub fn combined_se(&self, other: &Stat) -> f64 {
        (self.se * self.se + other.se * other.se).sqrt()
    }
}

/// Aggregated results for one (ratio, scheme, data kind, plane) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub ratio: f64,
    pub scheme: SchemeKind,
    pub data_kind: DataKind,
    /// `None` for whole-stream rows, 1-based plane otherwise.
    pub plane: Option<usize>,
    pub ber: Stat,
    pub mse: Option<Stat>,
    pub quantization_mse: Option<f64>,
    pub iterations: Stat,
    pub convergence_rate: f64,
    pub aggregate_p: f64,
    pub syndrome_bits: usize,
}

impl SweepRow {
    fn from_frames(frames: &[&FrameResult], aggregate_p: f64) -> Self {
        let first = frames[0];
        let mse = first.mse.map(|_| Stat::of(frames.iter().filter_map(|f| f.mse)));
        let quantization_mse =
            first.quantization_mse.map(|_| Stat::of(frames.iter().filter_map(|f| f.quantization_mse)).mean);
        Self {
            ratio: first.ratio,
            scheme: first.scheme,
            data_kind: first.data_kind,
            plane: first.plane,
            ber: Stat::of(frames.iter().map(|f| f.ber)),
            mse,
            quantization_mse,
            iterations: Stat::of(frames.iter().map(|f| f.iterations as f64)),
            convergence_rate: frames.iter().filter(|f| f.converged).count() as f64 / frames.len() as f64,
            aggregate_p,
            syndrome_bits: first.syndrome_bits,
        }
    }

    pub const HEADER: [&'static str; 16] = [
        "ratio",
        "scheme",
        "data_kind",
        "plane",
        "frames",
        "mean_ber",
        "se_ber",
        "mean_mse",
        "se_mse",
        "quantization_mse",
        "mean_iterations",
        "se_iterations",
        "convergence_rate",
        "aggregate_p",
        "syndrome_bits",
        "code_n",
    ];

    fn record(&self, code_n: usize) -> Vec<String> {
        let opt = |v: Option<f64>| v.map_or_else(String::new, |x| x.to_string());
        vec![
            self.ratio.to_string(),
            self.scheme.to_string(),
            self.data_kind.to_string(),
            self.plane.map_or_else(|| "all".to_string(), |k| k.to_string()),
            self.ber.count.to_string(),
            self.ber.mean.to_string(),
            self.ber.se.to_string(),
            opt(self.mse.map(|s| s.mean)),
            opt(self.mse.map(|s| s.se)),
            opt(self.quantization_mse),
            self.iterations.mean.to_string(),
            self.iterations.se.to_string(),
            self.convergence_rate.to_string(),
            self.aggregate_p.to_string(),
            self.syndrome_bits.to_string(),
            code_n.to_string(),
        ]
    }
}

/// Every frame outcome for one frame index at one grid point.
fn run_frame_cell(setup: &PointSetup<'_>, cfg: &ExperimentConfig, frame: u64) -> Result<Vec<FrameResult>> {
    let mut out = Vec::new();
    let needs_stream = cfg.schemes.iter().any(|&s| s != SchemeKind::PerBitplane);
    let stream_frame = needs_stream.then(|| setup.frame(frame));
    for &scheme in &cfg.schemes {
        for &data in &cfg.data_kinds {
            match (scheme, &stream_frame) {
                (SchemeKind::Standard, Some(f)) => out.push(setup.run_standard(f, data)?),
                (SchemeKind::Hybrid, Some(f)) => out.push(setup.run_hybrid(f, data, InterleaveMode::Random)?),
                (SchemeKind::HybridNoInterleave, Some(f)) => {
                    out.push(setup.run_hybrid(f, data, InterleaveMode::Off)?)
                }
                (SchemeKind::PerBitplane, _) => {
                    let r = setup.run_per_bitplane(frame, data, false)?;
                    let mut overall = r.planes[0].clone();
                    overall.plane = None;
                    overall.ber = r.ber;
                    overall.mse = r.mse;
                    overall.quantization_mse = r.quantization_mse;
                    overall.iterations = r.planes.iter().map(|p| p.iterations).max().unwrap_or(0);
                    overall.converged = r.planes.iter().all(|p| p.converged);
                    overall.syndrome_bits = r.planes.iter().map(|p| p.syndrome_bits).sum();
                    out.push(overall);
                    out.extend(r.planes);
                }
                (_, None) => unreachable!("stream frame is built for whole-stream schemes"),
            }
        }
    }
    Ok(out)
}

/// Runs every frame at one grid point and aggregates the rows.
pub fn run_point(cfg: &ExperimentConfig, code: &LdpcCode, index: usize) -> Result<Vec<SweepRow>> {
    let ratio = cfg.sweep_ratios[index];
    let model = cfg.model_at(ratio)?;
    let profile = profile_at(cfg, ratio, profile_key(cfg.seed, 1, index as u64))?;
    let setup = PointSetup {
        code,
        quantizer: cfg.quantizer,
        model,
        profile: profile.clone(),
        ratio,
        max_iterations: cfg.max_iterations,
        master_seed: cfg.seed,
        point: index as u64,
    };
    let per_frame: Vec<Result<Vec<FrameResult>>> =
        par::map_range(cfg.frames as usize, |f| run_frame_cell(&setup, cfg, f as u64));
    let per_frame = per_frame.into_iter().collect::<Result<Vec<_>>>()?;
    let cells = per_frame.first().map_or(0, Vec::len);
    Ok((0..cells)
        .map(|c| {
            let frames: Vec<&FrameResult> = per_frame.iter().map(|f| &f[c]).collect();
            SweepRow::from_frames(&frames, profile.aggregate())
        })
        .collect())
}

/// Runs the sweep, writing and flushing the rows of each grid point as it
/// completes. With `resume`, points already complete in `existing` are
/// copied instead of recomputed.
pub fn write_sweep<W: Write + Send>(
    cfg: &ExperimentConfig,
    code: &LdpcCode,
    out: W,
    existing: Option<&str>,
) -> Result<()> {
    let done = existing.map(completed_points).unwrap_or_default();
    let mut out = out;
    writeln!(out, "{SWEEP_SCHEMA}")?;
    out.flush()?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SweepRow::HEADER)?;
    w.flush()?;
    par::with_workers(cfg.workers, || -> Result<()> {
        for (i, &ratio) in cfg.sweep_ratios.iter().enumerate() {
            let key = ratio.to_string();
            if let Some(lines) = done.iter().find(|(r, _)| *r == key).map(|(_, l)| l) {
                for record in lines {
                    w.write_record(record)?;
                }
            } else {
                log::info!("sweep point {}/{}: ratio {ratio}", i + 1, cfg.sweep_ratios.len());
                for row in run_point(cfg, code, i)? {
                    w.write_record(row.record(code.n()))?;
                }
            }
            w.flush()?;
        }
        Ok(())
    })?;
    Ok(())
}

/// Groups the records of an existing sweep file by ratio, keeping only
/// points followed by a later point (the last one may be truncated).
fn completed_points(text: &str) -> Vec<(String, Vec<Vec<String>>)> {
    let mut lines = text.lines();
    if lines.next() != Some(SWEEP_SCHEMA) {
        return Vec::new();
    }
    let body: String = lines.map(|l| format!("{l}\n")).collect();
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let mut groups: Vec<(String, Vec<Vec<String>>)> = Vec::new();
    for record in reader.records() {
        let Ok(record) = record else { break };
        let fields: Vec<String> = record.iter().map(String::from).collect();
        if fields.len() != SweepRow::HEADER.len() {
            break;
        }
        match groups.last_mut() {
            Some((r, rows)) if *r == fields[0] => rows.push(fields),
            _ => groups.push((fields[0].clone(), vec![fields])),
        }
    }
    groups.pop();
    groups
}

/// Reads a sweep CSV back into `(header, records)`.
pub fn read_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let body: String = text.lines().filter(|l| !l.starts_with('#')).map(|l| format!("{l}\n")).collect();
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let header = reader.headers()?.iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.map(|rec| rec.iter().map(String::from).collect()))
        .collect::<std::result::Result<Vec<Vec<String>>, _>>()?;
    Ok((header, rows))
}

/// Human-readable report of a cached code.
pub fn code_report(cfg: &ExperimentConfig, cached: &CachedCode) -> String {
    let code = &cached.code;
    let mut s = String::new();
    let mut line = |k: &str, v: String| s.push_str(&format!("{k}: {v}\n"));
    line("cache_file", cached.path.display().to_string());
    line("cache_hit", cached.hit.to_string());
    line("alist_sha256", cached.alist_sha256.clone());
    line("n", code.n().to_string());
    line("m", code.m().to_string());
    line("edges", code.edge_count().to_string());
    line("design_rate", format!("{:.6}", cfg.distribution.design_rate()));
    line("realized_rate", format!("{:.6}", 1.0 - code.m() as f64 / code.n() as f64));
    let fmt = |target: &[(usize, f64)], realized: &[(usize, f64)]| {
        target
            .iter()
            .map(|&(d, f)| {
                let r = realized.iter().find(|x| x.0 == d).map_or(0.0, |x| x.1);
                format!("{d}:{f}->{r:.6}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    line("lambda", fmt(&cfg.distribution.lambda, &code.realized_lambda()));
    line("rho", fmt(&cfg.distribution.rho, &code.realized_rho()));
    line("girth", code.girth().map_or_else(|| "inf".to_string(), |g| g.to_string()));
    s
}

/// Loads or builds the configured code in the cache directory.
pub fn configured_code(cfg: &ExperimentConfig, dir: &Path) -> Result<CachedCode> {
    cache::load_or_build(dir, &cfg.distribution, cfg.code_n, cfg.code_seed)
}

/// Sweep grid points already present (ratio strings), for callers that want
/// to report resumption.
pub fn resumable_ratios(text: &str) -> BTreeSet<String> {
    completed_points(text).into_iter().map(|(r, _)| r).collect()
}
