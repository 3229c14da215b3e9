use mbsc::bitplane::make_interleaver;
use mbsc::config::ExperimentConfig;
use mbsc::ldpc::LdpcCode;
use mbsc::schemes::PointSetup;

fn lag_correlation(e: &[f64], lag: usize) -> f64 {
    let n = e.len() as f64;
    let mean = e.iter().sum::<f64>() / n;
    let var = e.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let cov = e.windows(lag + 1).map(|w| (w[0] - mean) * (w[lag] - mean)).sum::<f64>() / (n - lag as f64);
    cov / var
}

fn errors_for(ratio: f64, frames: u64, n: usize) -> Vec<Vec<u8>> {
    let cfg = ExperimentConfig::default();
    // Only the frame cutter is used, so any code of length n will do.
    let rows: Vec<Vec<usize>> = (0..n / 2).map(|j| vec![2 * j, 2 * j + 1]).collect();
    let code = LdpcCode::from_checks(n, &rows).unwrap();
    let setup = PointSetup {
        code: &code,
        quantizer: cfg.quantizer,
        model: cfg.model_at(ratio).unwrap(),
        profile: mbsc::channel::BitplaneProfile::flat(6, 0.1).unwrap(),
        ratio,
        max_iterations: 1,
        master_seed: 9,
        point: 0,
    };
    (0..frames)
        .map(|f| {
            let fr = setup.frame(f);
            fr.x.iter().zip(&fr.y).map(|(a, b)| a ^ b).collect()
        })
        .collect()
}

#[test]
fn within_sample_errors_are_correlated_and_interleaving_removes_it() {
    let n = 60_000;
    let errs = errors_for(300.0, 1, n).remove(0);
    let e: Vec<f64> = errs.iter().map(|&b| f64::from(b)).collect();
    let before = lag_correlation(&e, 1);
    let pi = make_interleaver(n, Some(4)).unwrap();
    let after = lag_correlation(&pi.interleave(&e).unwrap(), 1);
    let noise = 3.0 / (n as f64).sqrt();
    assert!(before > 10.0 * noise, "lag-1 correlation before interleaving {before}");
    assert!(after.abs() < noise, "lag-1 correlation after interleaving {after}");
}

#[test]
fn same_plane_errors_in_different_samples_are_uncorrelated() {
    // Neighbouring samples come from independent source and error draws, so
    // each plane's error sequence has no serial correlation.
    let n = 60_000;
    let errs = errors_for(300.0, 1, n).remove(0);
    for k in 0..6 {
        let plane: Vec<f64> = errs.iter().skip(k).step_by(6).map(|&b| f64::from(b)).collect();
        let r = lag_correlation(&plane, 1);
        assert!(r.abs() < 3.5 / (plane.len() as f64).sqrt(), "plane {}: lag-1 correlation {r}", k + 1);
    }
}

#[test]
fn frames_tile_the_stream() {
    let n = 1000;
    let frames = errors_for(30.0, 3, n);
    assert!(frames.iter().all(|f| f.len() == n));
    assert_ne!(frames[0], frames[1]);
}
