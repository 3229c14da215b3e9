//! Edge-perspective degree distributions and their integer realization.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Edge-perspective variable (λ) and check (ρ) degree distributions.
///
/// Degrees are node degrees: a term `0.3·x^5` in λ(x) is the pair `(6, 0.3)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeDistribution {
    pub lambda: Vec<(usize, f64)>,
    pub rho: Vec<(usize, f64)>,
}

impl DegreeDistribution {
    pub fn new(lambda: Vec<(usize, f64)>, rho: Vec<(usize, f64)>) -> Result<Self> {
        let dist = Self { lambda, rho };
        dist.validate()?;
        Ok(dist)
    }

    /// Rate-1/2 irregular distribution used for the 2:1 compression experiments.
    pub fn rate_half_irregular() -> Self {
        Self {
            lambda: vec![(2, 0.234029), (3, 0.212425), (6, 0.146898), (7, 0.102840), (20, 0.303808)],
            rho: vec![(8, 0.71875), (9, 0.28125)],
        }
    }

    /// Regular `(dv, dc)` ensemble.
    pub fn regular(dv: usize, dc: usize) -> Self {
        Self { lambda: vec![(dv, 1.0)], rho: vec![(dc, 1.0)] }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, terms) in [("lambda", &self.lambda), ("rho", &self.rho)] {
            if terms.is_empty() {
                return Err(domain(format!("{name} has no terms")));
            }
            let mut seen = std::collections::BTreeSet::new();
            for &(d, f) in terms {
                if d < 2 {
                    return Err(Error::Construction { degree: d, reason: format!("{name} degree below 2") });
                }
                if !(f.is_finite() && f > 0.0) {
                    return Err(Error::Construction { degree: d, reason: format!("{name} fraction {f} not positive") });
                }
                if !seen.insert(d) {
                    return Err(Error::Construction { degree: d, reason: format!("{name} lists degree twice") });
                }
            }
            let sum: f64 = terms.iter().map(|t| t.1).sum();
            if (sum - 1.0).abs() > 1e-6 {
                return Err(domain(format!("{name} fractions sum to {sum}, not 1")));
            }
        }
        Ok(())
    }

    /// `Σ λ_i / i`, the reciprocal of the mean variable degree.
    pub fn lambda_integral(&self) -> f64 {
        self.lambda.iter().map(|&(d, f)| f / d as f64).sum()
    }

    pub fn rho_integral(&self) -> f64 {
        self.rho.iter().map(|&(d, f)| f / d as f64).sum()
    }

    /// `1 - ∫ρ / ∫λ`.
    pub fn design_rate(&self) -> f64 {
        1.0 - self.rho_integral() / self.lambda_integral()
    }

    /// Checks that the design rate is within 1e-3 of `declared`.
    pub fn check_rate(&self, declared: f64) -> Result<()> {
        let rate = self.design_rate();
        if (rate - declared).abs() > 1e-3 {
            return Err(domain(format!("design rate {rate:.6} differs from declared rate {declared}")));
        }
        Ok(())
    }

    /// Canonical text used for cache keys.
    pub fn canonical(&self) -> String {
        let fmt = |terms: &[(usize, f64)]| {
            let mut t = terms.to_vec();
            t.sort_by_key(|x| x.0);
            t.iter().map(|(d, f)| format!("{d}:{f}")).collect::<Vec<_>>().join(",")
        };
        format!("lambda={};rho={}", fmt(&self.lambda), fmt(&self.rho))
    }

    /// Integer node counts per degree for a length-`n` code.
    pub fn realize(&self, n: usize) -> Result<NodeCounts> {
        self.validate()?;
        let lam = self.lambda_integral();
        let var_shares: Vec<f64> = self.lambda.iter().map(|&(d, f)| n as f64 * (f / d as f64) / lam).collect();
        let var_counts = largest_remainder(&var_shares, n);
        let var: Vec<(usize, usize)> = self.lambda.iter().map(|t| t.0).zip(var_counts).collect();
        for &(d, c) in &var {
            if c == 0 {
                return Err(Error::Construction { degree: d, reason: format!("no variable nodes at n = {n}") });
            }
        }
        let edges: usize = var.iter().map(|(d, c)| d * c).sum();

        let m = (n as f64 * (1.0 - self.design_rate())).round() as usize;
        if m == 0 {
            return Err(domain(format!("n = {n} leaves no check nodes")));
        }
        let rho = self.rho_integral();
        let chk_shares: Vec<f64> = self.rho.iter().map(|&(d, f)| m as f64 * (f / d as f64) / rho).collect();
        let chk_counts = largest_remainder(&chk_shares, m);
        let mut check: Vec<(usize, usize)> = self.rho.iter().map(|t| t.0).zip(chk_counts).collect();
        check.sort_by_key(|t| t.0);
        balance_edges(&mut check, edges)?;

        let mut var = var;
        var.sort_by_key(|t| t.0);
        Ok(NodeCounts { variable: var, check, edges })
    }
}

/// Realized `(degree, node count)` pairs, sorted by degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeCounts {
    pub variable: Vec<(usize, usize)>,
    pub check: Vec<(usize, usize)>,
    pub edges: usize,
}

impl NodeCounts {
    pub fn n(&self) -> usize {
        self.variable.iter().map(|t| t.1).sum()
    }

    pub fn m(&self) -> usize {
        self.check.iter().map(|t| t.1).sum()
    }
}

/// Rounds `shares` to integers summing to `total`; leftover units go to the
/// largest fractional parts, ties to the later (higher degree) entry.
fn largest_remainder(shares: &[f64], total: usize) -> Vec<usize> {
    let mut counts: Vec<usize> = shares.iter().map(|s| s.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..shares.len()).collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (shares[a] - shares[a].floor(), shares[b] - shares[b].floor());
        rb.total_cmp(&ra).then(b.cmp(&a))
    });
    for &i in order.iter().cycle().take(total.saturating_sub(assigned)) {
        counts[i] += 1;
    }
    counts
}

/// Moves check nodes between degrees until their edge total equals `edges`.
fn balance_edges(check: &mut [(usize, usize)], edges: usize) -> Result<()> {
    loop {
        let current: usize = check.iter().map(|(d, c)| d * c).sum();
        let diff = edges as i64 - current as i64;
        if diff == 0 {
            return Ok(());
        }
        // Best single move of one node from degree `from` to degree `to`.
        let mut best: Option<(usize, usize, i64)> = None;
        for (i, &(df, cf)) in check.iter().enumerate() {
            if cf == 0 {
                continue;
            }
            for (j, &(dt, _)) in check.iter().enumerate() {
                let step = dt as i64 - df as i64;
                if step == 0 || step.signum() != diff.signum() {
                    continue;
                }
                let residual = (diff - step).abs();
                if residual < diff.abs() && best.is_none_or(|b| residual < b.2) {
                    best = Some((i, j, residual));
                }
            }
        }
        match best {
            Some((i, j, _)) => {
                check[i].1 -= 1;
                check[j].1 += 1;
            }
            None => {
                let degree = check.last().map_or(0, |t| t.0);
                return Err(Error::Construction {
                    degree,
                    reason: format!("cannot balance {edges} edges against check degrees (off by {diff})"),
                });
            }
        }
    }
}
