//! Progressive-edge-growth construction.
//!
//! Variables are processed in ascending degree order. The first edge of a
//! variable goes to a check of lowest current degree; every further edge goes
//! to a check as far as possible from the variable in the graph built so far
//! (unreachable if any such check remains). Ties are broken by lowest current
//! check degree, then uniformly at random from the seeded stream. Checks only
//! accept edges up to their target degree, which realizes the check-side
//! distribution, except where respecting the targets would force a 4-cycle
//! that a full check avoids.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::code::LdpcCode;
use super::degree::DegreeDistribution;
use crate::error::{Error, Result};
use crate::seed;

/// Bumped whenever a change to the construction alters the codes it builds.
pub const CONSTRUCTION_VERSION: u32 = 2;

/// Builds a length-`n` code for `dist` from construction seed `seed`.
pub fn build_code(dist: &DegreeDistribution, n: usize, seed_value: u64) -> Result<LdpcCode> {
    let counts = dist.realize(n)?;
    let var_degrees: Vec<usize> = counts.variable.iter().flat_map(|&(d, c)| std::iter::repeat_n(d, c)).collect();
    let check_targets: Vec<usize> = counts.check.iter().flat_map(|&(d, c)| std::iter::repeat_n(d, c)).collect();
    let mut rng = seed::stream(seed_value, seed::tag::CODE, n as u64, 0, 0);
    let checks = Peg::new(n, check_targets).run(&var_degrees, &mut rng)?;
    Ok(LdpcCode::from_checks(n, &checks)?.with_metadata(dist.design_rate(), seed_value))
}

struct Peg {
    var_adj: Vec<Vec<u32>>,
    check_adj: Vec<Vec<u32>>,
    target: Vec<usize>,
    open_checks: usize,
    // BFS scratch, reset by bumping the stamp.
    check_mark: Vec<u32>,
    var_mark: Vec<u32>,
    stamp: u32,
}

impl Peg {
    fn new(n: usize, target: Vec<usize>) -> Self {
        let m = target.len();
        Self {
            var_adj: vec![Vec::new(); n],
            check_adj: target.iter().map(|&d| Vec::with_capacity(d)).collect(),
            open_checks: target.iter().filter(|&&d| d > 0).count(),
            target,
            check_mark: vec![0; m],
            var_mark: vec![0; n],
            stamp: 0,
        }
    }

    fn has_room(&self, c: usize) -> bool {
        self.check_adj[c].len() < self.target[c]
    }

    fn connect(&mut self, v: usize, c: usize) {
        self.var_adj[v].push(c as u32);
        self.check_adj[c].push(v as u32);
        if self.check_adj[c].len() == self.target[c] {
            self.open_checks -= 1;
        }
    }

    fn run(mut self, var_degrees: &[usize], rng: &mut ChaCha8Rng) -> Result<Vec<Vec<usize>>> {
        let mut candidates = Vec::new();
        for (v, &degree) in var_degrees.iter().enumerate() {
            for k in 0..degree {
                candidates.clear();
                if k == 0 {
                    candidates.extend((0..self.target.len()).filter(|&c| self.has_room(c)));
                } else {
                    self.farthest_open_checks(v, &mut candidates);
                }
                if candidates.is_empty() {
                    // Every check with room already touches v: overfill the
                    // least loaded check that does not.
                    candidates.extend((0..self.target.len()).filter(|&c| !self.var_adj[v].contains(&(c as u32))));
                    if candidates.is_empty() {
                        return Err(Error::Construction {
                            degree,
                            reason: format!("variable {v} cannot reach {degree} distinct checks"),
                        });
                    }
                    log::debug!("PEG: variable {v} overfills a check");
                }
                let c = self.pick_least_loaded(&candidates, rng);
                self.connect(v, c);
            }
        }
        for (c, adj) in self.check_adj.iter().enumerate() {
            if adj.len() != self.target[c] {
                log::debug!("PEG: check {c} has degree {} (target {})", adj.len(), self.target[c]);
            }
        }
        Ok(self.check_adj.into_iter().map(|adj| adj.into_iter().map(|v| v as usize).collect()).collect())
    }

    fn pick_least_loaded(&self, candidates: &[usize], rng: &mut ChaCha8Rng) -> usize {
        let min = candidates.iter().map(|&c| self.check_adj[c].len()).min().unwrap_or(0);
        let ties: Vec<usize> = candidates.iter().copied().filter(|&c| self.check_adj[c].len() == min).collect();
        ties[rng.random_range(0..ties.len())]
    }

    /// Collects the checks with room that are unreachable from `v`, or, if
    /// all are reachable, those with room at the greatest distance. When
    /// every check with room would close a 4-cycle, the search continues and
    /// the farthest checks are collected regardless of room if that avoids it.
    fn farthest_open_checks(&mut self, v: usize, out: &mut Vec<usize>) {
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.check_mark.fill(0);
            self.var_mark.fill(0);
            self.stamp = 1;
        }
        let stamp = self.stamp;
        self.var_mark[v] = stamp;
        let mut frontier = vec![v as u32];
        let mut next = Vec::new();
        let mut level_checks: Vec<u32> = Vec::new();
        let mut deepest: Vec<u32> = Vec::new();
        let mut fallback: Vec<usize> = Vec::new();
        let mut unreached_open = self.open_checks;
        let mut exhausted_room = false;
        let mut depth = 0u32;
        loop {
            depth += 1;
            level_checks.clear();
            for &u in &frontier {
                for &c in &self.var_adj[u as usize] {
                    let ci = c as usize;
                    if self.check_mark[ci] != stamp {
                        self.check_mark[ci] = stamp;
                        level_checks.push(c);
                        if self.has_room(ci) {
                            unreached_open -= 1;
                        }
                    }
                }
            }
            if level_checks.is_empty() {
                if !exhausted_room {
                    // Component exhausted: any unreached open check is at infinite distance.
                    out.extend((0..self.target.len()).filter(|&c| self.check_mark[c] != stamp && self.has_room(c)));
                } else if (0..self.target.len()).any(|c| self.check_mark[c] != stamp) {
                    out.extend((0..self.target.len()).filter(|&c| self.check_mark[c] != stamp));
                } else if depth > 3 {
                    out.extend(deepest.iter().map(|&c| c as usize));
                } else {
                    out.append(&mut fallback);
                }
                return;
            }
            if unreached_open == 0 && !exhausted_room {
                if depth > 2 {
                    out.extend(level_checks.iter().map(|&c| c as usize).filter(|&c| self.has_room(c)));
                    return;
                }
                if depth == 2 {
                    fallback.extend(level_checks.iter().map(|&c| c as usize).filter(|&c| self.has_room(c)));
                }
                exhausted_room = true;
            }
            std::mem::swap(&mut deepest, &mut level_checks);
            next.clear();
            for &c in &deepest {
                for &u in &self.check_adj[c as usize] {
                    if self.var_mark[u as usize] != stamp {
                        self.var_mark[u as usize] = stamp;
                        next.push(u);
                    }
                }
            }
            std::mem::swap(&mut frontier, &mut next);
        }
    }
}
