use std::collections::VecDeque;

use crate::error::{domain, Result};

/// Sparse parity-check matrix stored as a Tanner graph.
///
/// Edges are numbered in check-major order: the edges of check `j` are
/// `check_start[j]..check_start[j + 1]`, sorted by variable index.
#[derive(Debug, Clone, PartialEq)]
pub struct LdpcCode {
    n: usize,
    check_start: Vec<usize>,
    edge_var: Vec<u32>,
    var_start: Vec<usize>,
    var_edges: Vec<u32>,
    declared_rate: f64,
    construction_seed: u64,
}

impl LdpcCode {
    /// Builds a code from per-check variable lists.
    pub fn from_checks(n: usize, checks: &[Vec<usize>]) -> Result<Self> {
        let mut check_start = Vec::with_capacity(checks.len() + 1);
        let mut edge_var = Vec::new();
        check_start.push(0);
        for (j, row) in checks.iter().enumerate() {
            let mut row = row.clone();
            row.sort_unstable();
            if let Some(w) = row.windows(2).find(|w| w[0] == w[1]) {
                return Err(domain(format!("check {j} lists variable {} twice", w[0])));
            }
            if let Some(&v) = row.last().filter(|&&v| v >= n) {
                return Err(domain(format!("check {j} references variable {v} >= n = {n}")));
            }
            edge_var.extend(row.iter().map(|&v| v as u32));
            check_start.push(edge_var.len());
        }
        let mut var_deg = vec![0usize; n];
        for &v in &edge_var {
            var_deg[v as usize] += 1;
        }
        let mut var_start = Vec::with_capacity(n + 1);
        var_start.push(0);
        for d in &var_deg {
            var_start.push(var_start.last().unwrap() + d);
        }
        let mut fill = var_start[..n].to_vec();
        let mut var_edges = vec![0u32; edge_var.len()];
        for (e, &v) in edge_var.iter().enumerate() {
            var_edges[fill[v as usize]] = e as u32;
            fill[v as usize] += 1;
        }
        let m = checks.len();
        let rate = if n == 0 { 0.0 } else { 1.0 - m as f64 / n as f64 };
        Ok(Self { n, check_start, edge_var, var_start, var_edges, declared_rate: rate, construction_seed: 0 })
    }

    pub(crate) fn with_metadata(mut self, declared_rate: f64, seed: u64) -> Self {
        self.declared_rate = declared_rate;
        self.construction_seed = seed;
        self
    }

    /// Number of variable nodes (source bits per block).
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of check nodes (syndrome bits per block).
    pub fn m(&self) -> usize {
        self.check_start.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.edge_var.len()
    }

    pub fn declared_rate(&self) -> f64 {
        self.declared_rate
    }

    pub fn construction_seed(&self) -> u64 {
        self.construction_seed
    }

    /// Variables adjacent to check `j`, ascending.
    pub fn check_vars(&self, j: usize) -> &[u32] {
        &self.edge_var[self.check_start[j]..self.check_start[j + 1]]
    }

    pub(crate) fn check_edge_range(&self, j: usize) -> std::ops::Range<usize> {
        self.check_start[j]..self.check_start[j + 1]
    }

    /// Edge ids incident to variable `v`.
    pub(crate) fn var_edge_ids(&self, v: usize) -> &[u32] {
        &self.var_edges[self.var_start[v]..self.var_start[v + 1]]
    }

    /// Checks adjacent to variable `v`, ascending.
    pub fn var_checks(&self, v: usize) -> Vec<usize> {
        self.var_edge_ids(v).iter().map(|&e| self.edge_check(e as usize)).collect()
    }

    fn edge_check(&self, e: usize) -> usize {
        self.check_start.partition_point(|&s| s <= e) - 1
    }

    pub fn var_degree(&self, v: usize) -> usize {
        self.var_start[v + 1] - self.var_start[v]
    }

    pub fn check_degree(&self, j: usize) -> usize {
        self.check_start[j + 1] - self.check_start[j]
    }

    /// Per-check variable lists.
    pub fn checks(&self) -> Vec<Vec<usize>> {
        (0..self.m()).map(|j| self.check_vars(j).iter().map(|&v| v as usize).collect()).collect()
    }

    /// `s = H·x` over GF(2).
    pub fn compute_syndrome(&self, x: &[u8]) -> Result<Vec<u8>> {
        if x.len() != self.n {
            return Err(domain(format!("word has {} bits, code has n = {}", x.len(), self.n)));
        }
        Ok(self.syndrome_unchecked(x))
    }

    pub(crate) fn syndrome_unchecked(&self, x: &[u8]) -> Vec<u8> {
        (0..self.m()).map(|j| self.check_vars(j).iter().fold(0u8, |acc, &v| acc ^ (x[v as usize] & 1))).collect()
    }

    /// Number of checks `j` with `(H·x)_j != s_j`.
    pub(crate) fn syndrome_mismatch(&self, x: &[u8], s: &[u8]) -> usize {
        (0..self.m()).filter(|&j| self.check_vars(j).iter().fold(0u8, |acc, &v| acc ^ x[v as usize]) != s[j]).count()
    }

    /// Realized edge-perspective fractions `(degree, fraction)` for variables.
    pub fn realized_lambda(&self) -> Vec<(usize, f64)> {
        edge_fractions((0..self.n).map(|v| self.var_degree(v)), self.edge_count())
    }

    /// Realized edge-perspective fractions for checks.
    pub fn realized_rho(&self) -> Vec<(usize, f64)> {
        edge_fractions((0..self.m()).map(|j| self.check_degree(j)), self.edge_count())
    }

    /// Length of the shortest cycle in the Tanner graph, `None` if acyclic.
    pub fn girth(&self) -> Option<usize> {
        let checks_of: Vec<Vec<usize>> = (0..self.n).map(|v| self.var_checks(v)).collect();
        let per_start = crate::par::map_range(self.n, |v| self.shortest_cycle_through(v, &checks_of));
        per_start.into_iter().flatten().min()
    }

    /// BFS from variable `v` over the bipartite graph. Nodes `0..n` are
    /// variables, `n..n+m` checks.
    fn shortest_cycle_through(&self, start: usize, checks_of: &[Vec<usize>]) -> Option<usize> {
        let total = self.n + self.m();
        let mut dist = vec![u32::MAX; total];
        let mut parent = vec![usize::MAX; total];
        let mut queue = VecDeque::new();
        dist[start] = 0;
        queue.push_back(start);
        let mut best: Option<usize> = None;
        while let Some(u) = queue.pop_front() {
            if let Some(b) = best {
                if 2 * dist[u] as usize + 1 >= b {
                    break;
                }
            }
            let neighbors: Vec<usize> = if u < self.n {
                checks_of[u].iter().map(|&j| self.n + j).collect()
            } else {
                self.check_vars(u - self.n).iter().map(|&v| v as usize).collect()
            };
            for w in neighbors {
                if w == parent[u] {
                    continue;
                }
                if dist[w] == u32::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    queue.push_back(w);
                } else {
                    let len = (dist[u] + dist[w] + 1) as usize;
                    best = Some(best.map_or(len, |b| b.min(len)));
                }
            }
        }
        best
    }
}

fn edge_fractions(degrees: impl Iterator<Item = usize>, edges: usize) -> Vec<(usize, f64)> {
    let mut by_degree = std::collections::BTreeMap::new();
    for d in degrees {
        *by_degree.entry(d).or_insert(0usize) += d;
    }
    by_degree.into_iter().filter(|(d, _)| *d > 0).map(|(d, e)| (d, e as f64 / edges.max(1) as f64)).collect()
}
