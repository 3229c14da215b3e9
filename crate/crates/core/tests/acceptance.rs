//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits non-zero if any failed.

use std::collections::HashMap;
use std::path::PathBuf;
use std::time::Instant;

use mbsc::cache;
use mbsc::channel::{
    count_crossovers, estimate_aggregate_crossover, estimate_bitplane_crossovers, sample_error, sample_source,
    BitplaneProfile, CorrelationModel,
};
use mbsc::config::ExperimentConfig;
use mbsc::experiment::{self, Stat};
use mbsc::ldpc::{compute_syndrome, llr_init, BpDecoder, LdpcCode};
use mbsc::par;
use mbsc::quantizer::{index_to_bits, QuantizerSpec};
use mbsc::schemes::{DataKind, FrameResult, InterleaveMode, PointSetup, SchemeKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

/// Frames per grid point for the decoding sweep.
const SWEEP_FRAMES: u64 = 400;
/// Frames per grid point for per-plane decoding.
const PLANE_FRAMES: u64 = 50;
const MASTER_SEED: u64 = 2024;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn cache_dir() -> PathBuf {
    std::env::var_os(cache::CACHE_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("mbsc-cache"))
}

fn reference_config() -> ExperimentConfig {
    ExperimentConfig {
        seed: MASTER_SEED,
        frames: SWEEP_FRAMES,
        schemes: vec![SchemeKind::Standard, SchemeKind::Hybrid],
        data_kinds: vec![DataKind::Actual, DataKind::Artificial],
        ..ExperimentConfig::default()
    }
}

fn reference_code(cfg: &ExperimentConfig) -> LdpcCode {
    experiment::configured_code(cfg, &cache_dir()).expect("reference code").code
}

fn combined(a: &Stat, b: &Stat) -> f64 {
    a.combined_se(b)
}

fn crossover_monotonicity() -> Outcome {
    let cfg = ExperimentConfig::default();
    let mut worst = f64::INFINITY;
    let mut p6_max = 0.0f64;
    let mut failures = Vec::new();
    for (i, &ratio) in cfg.profile_ratios.iter().enumerate() {
        if ratio > 1.0 {
            continue;
        }
        let profile = experiment::profile_at(&cfg, ratio, experiment::profile_key(MASTER_SEED, 0, i as u64)).unwrap();
        let (p, se) = (profile.per_plane(), profile.std_errors());
        for k in 0..p.len() - 1 {
            let margin = p[k] - p[k + 1] + 3.0 * (se[k] * se[k] + se[k + 1] * se[k + 1]).sqrt();
            worst = worst.min(margin);
            if margin < 0.0 {
                failures.push(format!("ratio {ratio}: p_{} < p_{}", k + 1, k + 2));
            }
        }
        if ratio <= 0.25 {
            p6_max = p6_max.max(p[5]);
            if p[5] >= 1e-3 {
                failures.push(format!("ratio {ratio}: p_6 = {}", p[5]));
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("min ordering margin {worst:.2e}, max p_6 at ratio <= 0.25 = {p6_max:.2e} {failures:?}"),
    )
}

fn stream_bits(spec: &QuantizerSpec, v: &[f64]) -> Vec<u8> {
    v.iter().flat_map(|&s| index_to_bits(spec.quantize(s).unwrap(), spec.bits()).unwrap()).collect()
}

fn aggregation_identity() -> Outcome {
    let cfg = ExperimentConfig::default();
    let spec = cfg.quantizer;
    let b = f64::from(spec.bits());
    let trials = 1_000_000;
    let mut worst = 0.0f64;
    let mut exact = true;
    for (i, &ratio) in cfg.profile_ratios.iter().enumerate() {
        let model = cfg.model_at(ratio).unwrap();
        let profile = estimate_bitplane_crossovers(&model, &spec, trials, 31 + i as u64);

        let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
        let x = sample_source(trials as usize, &mut rng);
        let y: Vec<f64> = x.iter().zip(sample_error(&model, trials as usize, &mut rng)).map(|(a, e)| a + e).collect();
        let (xb, yb) = (stream_bits(&spec, &x), stream_bits(&spec, &y));
        let hamming = estimate_aggregate_crossover(&xb, &yb).unwrap();
        let weights: Vec<f64> = xb
            .chunks(spec.bits() as usize)
            .zip(yb.chunks(spec.bits() as usize))
            .map(|(a, c)| a.iter().zip(c).filter(|(u, v)| u != v).count() as f64 / b)
            .collect();
        let stream = Stat::of(weights);
        let z = (hamming - profile.aggregate()).abs() / (stream.se.powi(2) + profile.aggregate_se().powi(2)).sqrt();
        worst = worst.max(z);

        let counts = count_crossovers(&spec, &x, &y).unwrap();
        let flips = xb.iter().zip(&yb).filter(|(u, v)| u != v).count() as u64;
        let same = BitplaneProfile::from_counts(&counts).aggregate();
        exact &= counts.total_flips() == flips && (same - hamming).abs() <= 1e-15;
    }
    outcome(worst <= 3.0 && exact, format!("max |z| = {worst:.2}, same-trial totals equal: {exact}"))
}

fn single_bit_orthant() -> Outcome {
    // P(sign X != sign(X + E)) = 2 ∫_0^∞ φ(x) Φ(-x/σ_e) dx, by Simpson's rule.
    let std = Normal::standard();
    let sigma_e = 1.0;
    let (upper, steps) = (12.0, 20_000);
    let h = upper / steps as f64;
    let f = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt() * std.cdf(-x / sigma_e);
    let mut sum = f(0.0) + f(upper);
    for i in 1..steps {
        sum += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    let oracle = 2.0 * sum * h / 3.0;

    let spec = QuantizerSpec::with_range(1, -1.0, 1.0).unwrap();
    let model = CorrelationModel::gaussian(sigma_e * sigma_e).unwrap();
    let profile = estimate_bitplane_crossovers(&model, &spec, 1_000_000, 3);
    let (p, se) = (profile.plane(1), profile.std_errors()[0]);
    let pass = (p - oracle).abs() <= 3.0 * se && (oracle - 0.25).abs() < 1e-9;
    outcome(pass, format!("p_1 = {p:.5} ± {se:.1e}, orthant oracle {oracle:.10}"))
}

fn random_small_code(rng: &mut ChaCha8Rng) -> LdpcCode {
    loop {
        let n = rng.random_range(6..=12);
        let m = rng.random_range(n / 3..=n / 2);
        let mut rows = vec![Vec::new(); m];
        for v in 0..n {
            let weight = rng.random_range(2..=3.min(m));
            let mut picked = Vec::new();
            while picked.len() < weight {
                let j = rng.random_range(0..m);
                if !picked.contains(&j) {
                    picked.push(j);
                }
            }
            for j in picked {
                rows[j].push(v);
            }
        }
        if rows.iter().all(|r| r.len() >= 2) {
            return LdpcCode::from_checks(n, &rows).unwrap();
        }
    }
}

fn decoder_ml_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(MASTER_SEED);
    let (mut converged, mut satisfied, mut ml, mut frames) = (0, 0, 0, 0);
    for _ in 0..100 {
        let code = random_small_code(&mut rng);
        let n = code.n();
        let mut cosets: HashMap<Vec<u8>, Vec<u32>> = HashMap::new();
        for word in 0..1u32 << n {
            let bits: Vec<u8> = (0..n).map(|i| ((word >> i) & 1) as u8).collect();
            cosets.entry(compute_syndrome(&code, &bits).unwrap()).or_default().push(word);
        }
        let mut decoder = BpDecoder::new(&code);
        for _ in 0..10 {
            frames += 1;
            let p = rng.random_range(0.005..=0.05);
            let x: Vec<u8> = (0..n).map(|_| rng.random_range(0..2)).collect();
            let y: Vec<u8> = x.iter().map(|&b| b ^ u8::from(rng.random_bool(p))).collect();
            let s = compute_syndrome(&code, &x).unwrap();
            let report = decoder.decode(&s, &llr_init(&y, &vec![p; n]).unwrap(), 50).unwrap();
            if !report.converged {
                continue;
            }
            converged += 1;
            if compute_syndrome(&code, &report.decoded).unwrap() == s {
                satisfied += 1;
            }
            // With a common crossover, ML in the coset is minimum distance to y.
            let y_word: u32 = y.iter().enumerate().map(|(i, &b)| u32::from(b) << i).sum();
            let best = cosets[&s].iter().map(|w| (w ^ y_word).count_ones()).min().unwrap();
            let got = report.decoded.iter().zip(&y).filter(|(a, b)| a != b).count() as u32;
            if got == best {
                ml += 1;
            }
        }
    }
    let sat = satisfied as f64 / converged as f64;
    let agree = ml as f64 / converged as f64;
    outcome(
        sat == 1.0 && agree >= 0.95,
        format!(
            "{converged}/{frames} converged, syndrome satisfied {:.1}%, ML agreement {:.1}%",
            100.0 * sat,
            100.0 * agree
        ),
    )
}

fn setup<'a>(
    cfg: &ExperimentConfig,
    code: &'a LdpcCode,
    model: CorrelationModel,
    profile: BitplaneProfile,
    ratio: f64,
    point: u64,
) -> PointSetup<'a> {
    PointSetup {
        code,
        quantizer: cfg.quantizer,
        model,
        profile,
        ratio,
        max_iterations: cfg.max_iterations,
        master_seed: MASTER_SEED,
        point,
    }
}

fn noiseless_fixed_point(code: &LdpcCode) -> Outcome {
    let cfg = reference_config();
    let model = CorrelationModel::noiseless();
    let profile = estimate_bitplane_crossovers(&model, &cfg.quantizer, 100_000, 1);
    let s = setup(&cfg, code, model, profile, 0.0, 0);
    let mut results: Vec<FrameResult> = Vec::new();
    for f in 0..5 {
        let frame = s.frame(f);
        for data in [DataKind::Actual, DataKind::Artificial] {
            results.push(s.run_standard(&frame, data).unwrap());
            results.push(s.run_hybrid(&frame, data, InterleaveMode::Random).unwrap());
            results.push(s.run_hybrid(&frame, data, InterleaveMode::Off).unwrap());
            let per_plane = s.run_per_bitplane(f, data, true).unwrap();
            let mut whole = per_plane.planes[0].clone();
            whole.ber = per_plane.ber;
            whole.mse = per_plane.mse;
            whole.quantization_mse = per_plane.quantization_mse;
            results.extend(per_plane.planes);
            results.push(whole);
        }
    }
    let max_ber = results.iter().map(|r| r.ber).fold(0.0, f64::max);
    let max_iter = results.iter().map(|r| r.iterations).max().unwrap();
    let mse_ok = results
        .iter()
        .filter_map(|r| Some((r.mse?, r.quantization_mse?)))
        .all(|(mse, floor)| (mse - floor).abs() <= 0.02 * floor);
    let all_converged = results.iter().all(|r| r.converged);
    outcome(
        max_ber == 0.0 && max_iter <= 2 && mse_ok && all_converged,
        format!("{} decodes, max BER {max_ber}, max iterations {max_iter}, MSE at floor: {mse_ok}", results.len()),
    )
}

fn degeneracy(code: &LdpcCode) -> Outcome {
    let cfg = reference_config();
    let ratio = 2000.0;
    let model = cfg.model_at(ratio).unwrap();
    let measured = experiment::profile_at(&cfg, ratio, 77).unwrap();
    let flat = BitplaneProfile::flat(cfg.quantizer.bits(), measured.aggregate()).unwrap();
    let s = setup(&cfg, code, model, flat, ratio, 0);
    let mut identical = 0;
    let mut nontrivial = 0;
    for f in 0..10 {
        let frame = s.frame(f);
        let a = s.run_standard(&frame, DataKind::Actual).unwrap();
        let b = s.run_hybrid(&frame, DataKind::Actual, InterleaveMode::Identity).unwrap();
        if a.report == b.report && a.ber.to_bits() == b.ber.to_bits() && a.mse == b.mse {
            identical += 1;
        }
        nontrivial += usize::from(a.iterations > 1);
    }
    outcome(identical == 10, format!("{identical}/10 frames identical ({nontrivial} needed more than one iteration)"))
}

struct Sweep {
    csv: String,
    cells: HashMap<(String, String, String), Cell>,
    ratios: Vec<String>,
}

struct Cell {
    ber: Stat,
    mse: Stat,
    iterations: Stat,
    convergence: f64,
}

fn parse_sweep(csv: String) -> Sweep {
    let (header, rows) = experiment::read_csv(&csv).unwrap();
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    let (ratio, scheme, data, frames) = (col("ratio"), col("scheme"), col("data_kind"), col("frames"));
    let num = |r: &Vec<String>, c: &str| r[col(c)].parse::<f64>().unwrap_or(f64::NAN);
    let mut cells = HashMap::new();
    let mut ratios: Vec<String> = Vec::new();
    for r in &rows {
        if !ratios.contains(&r[ratio]) {
            ratios.push(r[ratio].clone());
        }
        let count = r[frames].parse().unwrap();
        let stat = |m: &str, s: &str| Stat { mean: num(r, m), se: num(r, s), count };
        cells.insert(
            (r[ratio].clone(), r[scheme].clone(), r[data].clone()),
            Cell {
                ber: stat("mean_ber", "se_ber"),
                mse: stat("mean_mse", "se_mse"),
                iterations: stat("mean_iterations", "se_iterations"),
                convergence: num(r, "convergence_rate"),
            },
        );
    }
    Sweep { csv, cells, ratios }
}

fn run_sweep(cfg: &ExperimentConfig, code: &LdpcCode) -> String {
    let mut out = Vec::new();
    experiment::write_sweep(cfg, code, &mut out, None).unwrap();
    String::from_utf8(out).unwrap()
}

impl Sweep {
    fn cell(&self, ratio: &str, scheme: &str, data: &str) -> &Cell {
        &self.cells[&(ratio.to_string(), scheme.to_string(), data.to_string())]
    }
}

fn actual_vs_artificial(sweep: &Sweep) -> Outcome {
    let mut lines = Vec::new();
    let mut separated = 0;
    for r in &sweep.ratios {
        let actual = sweep.cell(r, "standard", "actual");
        if !(1e-3..=1e-1).contains(&actual.ber.mean) {
            continue;
        }
        let art = sweep.cell(r, "standard", "artificial");
        let z = (actual.ber.mean - art.ber.mean).abs() / combined(&actual.ber, &art.ber);
        separated += usize::from(z > 3.0);
        lines.push(format!("{r}: {:.2e} vs {:.2e} ({z:.1} SE)", actual.ber.mean, art.ber.mean));
    }
    outcome(separated >= 2, format!("{separated} separated points; {}", lines.join(", ")))
}

fn hybrid_superiority(sweep: &Sweep) -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    let mut considered = 0;
    for r in &sweep.ratios {
        let std = sweep.cell(r, "standard", "actual");
        if std.ber.mean < 1e-3 {
            continue;
        }
        considered += 1;
        let hyb = sweep.cell(r, "hybrid", "actual");
        let z = (std.ber.mean - hyb.ber.mean) / combined(&std.ber, &hyb.ber);
        let point_ok = z > 3.0 && hyb.mse.mean < std.mse.mean;
        ok &= point_ok;
        lines.push(format!(
            "{r}: BER {:.2e} -> {:.2e} ({z:.1} SE), MSE {:.3} -> {:.3}",
            std.ber.mean, hyb.ber.mean, std.mse.mean, hyb.mse.mean
        ));
    }
    outcome(ok && considered > 0, format!("{considered} points; {}", lines.join(", ")))
}

fn iteration_reduction(sweep: &Sweep) -> Outcome {
    let mut lines = Vec::new();
    let mut ok = true;
    let mut considered = 0;
    for r in &sweep.ratios {
        let std = sweep.cell(r, "standard", "actual");
        let hyb = sweep.cell(r, "hybrid", "actual");
        if std.convergence < 0.9 || hyb.convergence < 0.9 {
            continue;
        }
        considered += 1;
        ok &= hyb.iterations.mean < std.iterations.mean;
        lines.push(format!("{r}: {:.2} -> {:.2}", std.iterations.mean, hyb.iterations.mean));
    }
    outcome(ok && considered > 0, format!("{considered} points; {}", lines.join(", ")))
}

fn per_plane_equivalence(cfg: &ExperimentConfig, code: &LdpcCode) -> Outcome {
    let b = cfg.quantizer.bits() as usize;
    let points = [0, cfg.sweep_ratios.len() - 1];
    let mut worst: f64 = 0.0;
    let mut ok = true;
    let mut lines = Vec::new();
    for &i in &points {
        let ratio = cfg.sweep_ratios[i];
        let profile = experiment::profile_at(cfg, ratio, experiment::profile_key(MASTER_SEED, 1, i as u64)).unwrap();
        let s = setup(cfg, code, cfg.model_at(ratio).unwrap(), profile, ratio, i as u64);
        let run = |data| -> Vec<Vec<f64>> {
            let frames = par::map_range(PLANE_FRAMES as usize, |f| s.run_per_bitplane(f as u64, data, false).unwrap());
            (0..b).map(|k| frames.iter().map(|r| r.planes[k].ber).collect()).collect()
        };
        let (actual, artificial) = (run(DataKind::Actual), run(DataKind::Artificial));
        for k in 0..b {
            let (a, c) = (Stat::of(actual[k].clone()), Stat::of(artificial[k].clone()));
            let diff = (a.mean - c.mean).abs();
            let se = combined(&a, &c);
            let plane_ok = diff <= 3.0 * se || diff == 0.0;
            if se > 0.0 {
                worst = worst.max(diff / se);
            }
            ok &= plane_ok;
            if !plane_ok || a.mean > 0.0 {
                lines.push(format!("{ratio} plane {}: {:.2e} vs {:.2e}", k + 1, a.mean, c.mean));
            }
        }
    }
    outcome(ok, format!("max |z| = {worst:.2}; {}", lines.join(", ")))
}

fn determinism(code: &LdpcCode) -> Outcome {
    let profile = |workers| {
        let cfg = ExperimentConfig { seed: MASTER_SEED, workers, ..ExperimentConfig::default() };
        let mut out = Vec::new();
        experiment::write_profile(&cfg, &mut out).unwrap();
        out
    };
    let profiles_equal = profile(1) == profile(4);
    let sweep = |workers| {
        let mut cfg = reference_config();
        cfg.frames = 20;
        cfg.workers = workers;
        run_sweep(&cfg, code)
    };
    let short = sweep(1);
    let sweeps_equal = short == sweep(4);
    let rerun_equal = short == sweep(1);
    outcome(
        profiles_equal && sweeps_equal && rerun_equal,
        format!("profile 1 vs 4 workers: {profiles_equal}, sweep 1 vs 4 workers: {sweeps_equal}, sweep rerun: {rerun_equal}"),
    )
}

fn main() {
    let started = Instant::now();
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    let mut record = |id, name, f: &mut dyn FnMut() -> Outcome| {
        let t = Instant::now();
        let o = f();
        println!(
            "[{}] criterion {id:>2} {name}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
        results.push((id, name, o));
    };

    record(1, "crossover monotonicity", &mut crossover_monotonicity);
    record(2, "aggregation identity", &mut aggregation_identity);
    record(3, "single-bit orthant check", &mut single_bit_orthant);
    record(4, "decoder vs ML", &mut decoder_ml_agreement);

    let cfg = reference_config();
    let code = reference_code(&cfg);
    record(5, "noiseless fixed point", &mut || noiseless_fixed_point(&code));
    record(6, "degeneracy equivalence", &mut || degeneracy(&code));

    let t = Instant::now();
    let sweep = parse_sweep(run_sweep(&cfg, &code));
    let dump = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("acceptance-sweep.csv");
    std::fs::write(&dump, &sweep.csv).unwrap();
    println!(
        "sweep over {:?}, {SWEEP_FRAMES} frames per point: {:.1}s, written to {}",
        cfg.sweep_ratios,
        t.elapsed().as_secs_f64(),
        dump.display()
    );

    record(7, "actual vs artificial gap", &mut || actual_vs_artificial(&sweep));
    record(8, "hybrid superiority", &mut || hybrid_superiority(&sweep));
    record(9, "iteration reduction", &mut || iteration_reduction(&sweep));
    record(10, "per-plane equivalence", &mut || per_plane_equivalence(&cfg, &code));
    record(11, "determinism", &mut || determinism(&code));

    let failed: Vec<String> = results.iter().filter(|r| !r.2.pass).map(|r| format!("{} ({})", r.0, r.1)).collect();
    println!(
        "acceptance: {}/{} criteria passed in {:.0}s",
        results.len() - failed.len(),
        results.len(),
        started.elapsed().as_secs_f64()
    );
    if !failed.is_empty() {
        println!("failed: {}", failed.join(", "));
        std::process::exit(1);
    }
}
