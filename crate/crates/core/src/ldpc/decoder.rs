//! Syndrome-based sum-product decoding.
//!
//! Messages are LLRs `log Pr[0]/Pr[1]`. The check update uses the tanh rule
//! with leave-one-out products computed from prefix and suffix products, and
//! the sign of every outgoing check message is flipped when its syndrome bit
//! is 1. Updates follow the flooding schedule.

use crate::error::{domain, Result};

use super::code::LdpcCode;

/// Largest message magnitude.
pub const LLR_CLAMP: f64 = 30.0;

/// Outcome of one decode call.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeReport {
    pub decoded: Vec<u8>,
    pub converged: bool,
    /// Iterations run; 0 when the channel hard decisions already satisfy the syndrome.
    pub iterations: usize,
    pub final_syndrome_mismatch: usize,
}

/// Per-variable initial LLRs `(1 - 2y_i)·ln((1 - p_i)/p_i)`.
pub fn llr_init(y: &[u8], p_assign: &[f64]) -> Result<Vec<f64>> {
    if y.len() != p_assign.len() {
        return Err(domain(format!("{} side bits but {} crossover entries", y.len(), p_assign.len())));
    }
    y.iter()
        .zip(p_assign)
        .map(|(&bit, &p)| {
            if !(p > 0.0 && p <= 0.5) {
                return Err(domain(format!("crossover {p} outside (0, 0.5]")));
            }
            let magnitude = ((1.0 - p) / p).ln();
            Ok(if bit & 1 == 0 { magnitude } else { -magnitude })
        })
        .collect()
}

/// Reusable message buffers for decoding frames on one code.
#[derive(Debug, Clone)]
pub struct BpDecoder<'a> {
    code: &'a LdpcCode,
    c2v: Vec<f64>,
    v2c: Vec<f64>,
    posterior: Vec<f64>,
    hard: Vec<u8>,
    scratch: Vec<f64>,
}

impl<'a> BpDecoder<'a> {
    pub fn new(code: &'a LdpcCode) -> Self {
        let max_check_degree = (0..code.m()).map(|j| code.check_degree(j)).max().unwrap_or(0);
        Self {
            code,
            c2v: vec![0.0; code.edge_count()],
            v2c: vec![0.0; code.edge_count()],
            posterior: vec![0.0; code.n()],
            hard: vec![0; code.n()],
            scratch: vec![0.0; 2 * max_check_degree + 2],
        }
    }

    /// Decodes with early stopping once the hard decisions satisfy `syndrome`.
    pub fn decode(&mut self, syndrome: &[u8], llr0: &[f64], max_iterations: usize) -> Result<DecodeReport> {
        self.run(syndrome, llr0, max_iterations, true)
    }

    /// Runs exactly `iterations` flooding iterations, ignoring the stopping rule.
    pub fn run_fixed(&mut self, syndrome: &[u8], llr0: &[f64], iterations: usize) -> Result<DecodeReport> {
        self.run(syndrome, llr0, iterations, false)
    }

    /// Posterior LLRs after the last iteration.
    pub fn posterior(&self) -> &[f64] {
        &self.posterior
    }

    fn run(&mut self, syndrome: &[u8], llr0: &[f64], max_iterations: usize, early_stop: bool) -> Result<DecodeReport> {
        let code = self.code;
        if syndrome.len() != code.m() {
            return Err(domain(format!("syndrome has {} bits, code has m = {}", syndrome.len(), code.m())));
        }
        if llr0.len() != code.n() {
            return Err(domain(format!("{} channel LLRs, code has n = {}", llr0.len(), code.n())));
        }
        if let Some(bad) = syndrome.iter().find(|&&s| s > 1) {
            return Err(domain(format!("syndrome entry {bad} is not a bit")));
        }

        self.posterior.copy_from_slice(llr0);
        for (h, &l) in self.hard.iter_mut().zip(llr0) {
            *h = u8::from(l < 0.0);
        }
        self.c2v.fill(0.0);
        let mut iterations = 0;
        let mut mismatch = code.syndrome_mismatch(&self.hard, syndrome);
        if early_stop && mismatch == 0 {
            return Ok(self.report(true, 0, 0));
        }

        while iterations < max_iterations {
            iterations += 1;
            self.variable_update(llr0);
            self.check_update(syndrome);
            self.update_posterior(llr0);
            mismatch = code.syndrome_mismatch(&self.hard, syndrome);
            if early_stop && mismatch == 0 {
                break;
            }
        }
        Ok(self.report(mismatch == 0, iterations, mismatch))
    }

    fn report(&self, converged: bool, iterations: usize, mismatch: usize) -> DecodeReport {
        DecodeReport { decoded: self.hard.clone(), converged, iterations, final_syndrome_mismatch: mismatch }
    }

    fn variable_update(&mut self, llr0: &[f64]) {
        let code = self.code;
        for (v, &l0) in llr0.iter().enumerate() {
            let edges = code.var_edge_ids(v);
            let total = l0 + edges.iter().map(|&e| self.c2v[e as usize]).sum::<f64>();
            for &e in edges {
                let e = e as usize;
                self.v2c[e] = (total - self.c2v[e]).clamp(-LLR_CLAMP, LLR_CLAMP);
            }
        }
    }

    fn check_update(&mut self, syndrome: &[u8]) {
        let limit = (LLR_CLAMP / 2.0).tanh();
        for (j, &s) in syndrome.iter().enumerate() {
            let range = self.code.check_edge_range(j);
            let d = range.len();
            let sign = if s == 1 { -1.0 } else { 1.0 };
            // scratch[0..=d]: prefix products, scratch[d+1..]: tanh values.
            let (prefix, tanhs) = self.scratch.split_at_mut(d + 1);
            prefix[0] = 1.0;
            for (k, e) in range.clone().enumerate() {
                let t = (0.5 * self.v2c[e]).tanh();
                tanhs[k] = t;
                prefix[k + 1] = prefix[k] * t;
            }
            let mut suffix = 1.0;
            for k in (0..d).rev() {
                let product = (prefix[k] * suffix).clamp(-limit, limit);
                self.c2v[range.start + k] = sign * 2.0 * product.atanh();
                suffix *= tanhs[k];
            }
        }
    }

    fn update_posterior(&mut self, llr0: &[f64]) {
        let code = self.code;
        for (v, &l0) in llr0.iter().enumerate() {
            let total = l0 + code.var_edge_ids(v).iter().map(|&e| self.c2v[e as usize]).sum::<f64>();
            self.posterior[v] = total;
            self.hard[v] = u8::from(total < 0.0);
        }
    }
}

/// Decodes one frame: the syndrome `s`, channel LLRs `llr0` and an iteration cap.
pub fn bp_decode(code: &LdpcCode, s: &[u8], llr0: &[f64], max_iterations: usize) -> Result<DecodeReport> {
    BpDecoder::new(code).decode(s, llr0, max_iterations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn llr_values() {
        let l = llr_init(&[0, 1, 0, 1], &[0.1, 0.1, 0.5, 0.5]).unwrap();
        assert_abs_diff_eq!(l[0], 2.197_224_577_336_219_6, epsilon = 1e-12);
        assert_abs_diff_eq!(l[1], -2.197_224_577_336_219_6, epsilon = 1e-12);
        assert_eq!(l[2], 0.0);
        assert_eq!(l[3], 0.0);
        assert!(llr_init(&[0], &[0.0]).is_err());
        assert!(llr_init(&[0], &[0.6]).is_err());
        assert!(llr_init(&[0, 1], &[0.1]).is_err());
    }

    #[test]
    fn noiseless_side_information_decodes_immediately() {
        let code = LdpcCode::from_checks(6, &[vec![0, 1, 2], vec![2, 3, 4], vec![1, 4, 5]]).unwrap();
        let x = [1, 0, 1, 1, 0, 1];
        let s = code.compute_syndrome(&x).unwrap();
        let llr = llr_init(&x, &[1e-3; 6]).unwrap();
        let r = bp_decode(&code, &s, &llr, 50).unwrap();
        assert!(r.converged);
        assert_eq!(r.decoded, x);
        assert!(r.iterations <= 2);
        assert_eq!(r.final_syndrome_mismatch, 0);
    }

    #[test]
    fn single_error_is_corrected() {
        let code = LdpcCode::from_checks(6, &[vec![0, 1, 2], vec![2, 3, 4], vec![1, 4, 5], vec![0, 3, 5]]).unwrap();
        let x = [0, 1, 1, 0, 1, 0];
        let s = code.compute_syndrome(&x).unwrap();
        let mut y = x;
        y[3] ^= 1;
        let llr = llr_init(&y, &[0.05; 6]).unwrap();
        let r = bp_decode(&code, &s, &llr, 50).unwrap();
        assert!(r.converged);
        assert_eq!(r.decoded, x);
        assert!(r.iterations >= 1);
    }

    #[test]
    fn length_checks() {
        let code = LdpcCode::from_checks(3, &[vec![0, 1]]).unwrap();
        assert!(bp_decode(&code, &[0, 0], &[1.0; 3], 5).is_err());
        assert!(bp_decode(&code, &[0], &[1.0; 2], 5).is_err());
        assert!(bp_decode(&code, &[2], &[1.0; 3], 5).is_err());
    }

    #[test]
    fn unconverged_reports_mismatch() {
        // Uninformative channel, contradictory syndrome: cannot converge in 0 iterations.
        let code = LdpcCode::from_checks(2, &[vec![0, 1]]).unwrap();
        let r = bp_decode(&code, &[1], &[0.0, 0.0], 0).unwrap();
        assert!(!r.converged);
        assert_eq!(r.final_syndrome_mismatch, 1);
        assert_eq!(r.iterations, 0);
    }
}
