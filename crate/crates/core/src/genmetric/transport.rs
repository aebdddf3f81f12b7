//! Exact balanced transportation problems by the network simplex method on
//! the complete bipartite graph (sources × sinks).
//!
//! The basis is a spanning tree with `m + n − 1` cells, zero-flow cells
//! included, so degenerate problems keep a well-defined tree.

use std::collections::VecDeque;

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub(crate) struct Solution {
    pub cost: f64,
    /// `(source, sink, mass)` for every basic cell with positive mass.
    pub flows: Vec<(usize, usize, f64)>,
    /// Largest violation of complementary slackness / dual feasibility.
    pub residual: f64,
}

struct Basis {
    m: usize,
    n: usize,
    cells: Vec<(usize, usize)>,
    flow: Vec<f64>,
}

impl Basis {
    /// Tree adjacency: node ids are rows `0..m` and columns `m..m+n`;
    /// each entry is `(neighbor, cell index)`.
    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.m + self.n];
        for (k, &(i, j)) in self.cells.iter().enumerate() {
            adj[i].push((self.m + j, k));
            adj[self.m + j].push((i, k));
        }
        adj
    }

    fn potentials(&self, cost: &[Vec<f64>], adj: &[Vec<(usize, usize)>]) -> Result<(Vec<f64>, Vec<f64>)> {
        let (m, n) = (self.m, self.n);
        let mut pot = vec![f64::NAN; m + n];
        pot[0] = 0.0;
        let mut queue = VecDeque::from([0]);
        while let Some(a) = queue.pop_front() {
            for &(b, k) in &adj[a] {
                if pot[b].is_nan() {
                    let (i, j) = self.cells[k];
                    // c_ij = u_i + v_j
                    pot[b] = cost[i][j] - pot[a];
                    queue.push_back(b);
                }
            }
        }
        if pot.iter().any(|x| x.is_nan()) {
            return Err(Error::Transport("basis is not a spanning tree".into()));
        }
        Ok((pot[..m].to_vec(), pot[m..].to_vec()))
    }

    /// Cells on the tree path from row `i` to column `j`, in order.
    fn path(&self, adj: &[Vec<(usize, usize)>], i: usize, j: usize) -> Result<Vec<usize>> {
        let target = self.m + j;
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; self.m + self.n];
        let mut seen = vec![false; self.m + self.n];
        seen[i] = true;
        let mut queue = VecDeque::from([i]);
        while let Some(a) = queue.pop_front() {
            if a == target {
                break;
            }
            for &(b, k) in &adj[a] {
                if !seen[b] {
                    seen[b] = true;
                    prev[b] = Some((a, k));
                    queue.push_back(b);
                }
            }
        }
        let mut cells = Vec::new();
        let mut at = target;
        while at != i {
            let (a, k) = prev[at].ok_or_else(|| Error::Transport("disconnected basis".into()))?;
            cells.push(k);
            at = a;
        }
        cells.reverse();
        Ok(cells)
    }
}

/// Northwest-corner starting basis.
fn initial_basis(supply: &[f64], demand: &[f64]) -> Basis {
    let (m, n) = (supply.len(), demand.len());
    let mut s = supply.to_vec();
    let mut d = demand.to_vec();
    let mut cells = Vec::with_capacity(m + n - 1);
    let mut flow = Vec::with_capacity(m + n - 1);
    let (mut i, mut j) = (0, 0);
    loop {
        let x = s[i].min(d[j]).max(0.0);
        cells.push((i, j));
        flow.push(x);
        s[i] -= x;
        d[j] -= x;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if j == n - 1 || (i < m - 1 && s[i] <= d[j]) {
            i += 1;
        } else {
            j += 1;
        }
    }
    Basis { m, n, cells, flow }
}

pub(crate) fn solve(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> Result<Solution> {
    let (m, n) = (supply.len(), demand.len());
    if m == 0 || n == 0 {
        return Err(Error::Transport("empty marginal".into()));
    }
    let total_s: f64 = supply.iter().sum();
    let total_d: f64 = demand.iter().sum();
    if (total_s - total_d).abs() > 1e-9 * total_s.max(1.0) {
        return Err(Error::Transport(format!(
            "unbalanced problem: supply {total_s} vs demand {total_d}"
        )));
    }
    let scale = cost
        .iter()
        .flatten()
        .fold(1.0f64, |acc, &c| acc.max(c.abs()));
    let eps = 1e-12 * scale;

    let mut basis = initial_basis(supply, demand);
    let max_iter = 50 * (m + n) * (m + n) + 1000;
    let mut degenerate_run = 0usize;

    for _ in 0..max_iter {
        let adj = basis.adjacency();
        let (u, v) = basis.potentials(cost, &adj)?;
        let mut in_basis = vec![false; m * n];
        for &(i, j) in &basis.cells {
            in_basis[i * n + j] = true;
        }
        // Dantzig pricing; Bland's first-improving rule after a long
        // run of degenerate pivots to rule out cycling.
        let bland = degenerate_run > m + n;
        let mut entering = None;
        let mut best = -eps;
        'scan: for i in 0..m {
            for j in 0..n {
                if in_basis[i * n + j] {
                    continue;
                }
                let r = cost[i][j] - u[i] - v[j];
                if r < best {
                    entering = Some((i, j));
                    if bland {
                        break 'scan;
                    }
                    best = r;
                }
            }
        }
        let Some((ei, ej)) = entering else {
            return Ok(finish(&basis, cost, &u, &v, &in_basis));
        };

        // Cycle: entering (+), then alternating −, +, … along the tree path.
        let path = basis.path(&adj, ei, ej)?;
        let mut theta = f64::INFINITY;
        let mut leave = usize::MAX;
        for (pos, &k) in path.iter().enumerate() {
            if pos % 2 == 0 && (basis.flow[k] < theta || (basis.flow[k] == theta && k < leave)) {
                theta = basis.flow[k];
                leave = k;
            }
        }
        for (pos, &k) in path.iter().enumerate() {
            if pos % 2 == 0 {
                basis.flow[k] -= theta;
            } else {
                basis.flow[k] += theta;
            }
        }
        degenerate_run = if theta <= 0.0 { degenerate_run + 1 } else { 0 };
        basis.cells[leave] = (ei, ej);
        basis.flow[leave] = theta;
    }
    Err(Error::Transport(format!(
        "no convergence after {max_iter} pivots ({m} x {n})"
    )))
}

fn finish(basis: &Basis, cost: &[Vec<f64>], u: &[f64], v: &[f64], in_basis: &[bool]) -> Solution {
    let n = basis.n;
    let mut residual = 0.0f64;
    for (k, &(i, j)) in basis.cells.iter().enumerate() {
        residual = residual.max((cost[i][j] - u[i] - v[j]).abs());
        residual = residual.max(-basis.flow[k]);
    }
    for i in 0..basis.m {
        for j in 0..n {
            if !in_basis[i * n + j] {
                residual = residual.max(-(cost[i][j] - u[i] - v[j]));
            }
        }
    }
    let mut flows: Vec<(usize, usize, f64)> = basis
        .cells
        .iter()
        .zip(&basis.flow)
        .filter(|(_, &f)| f > 0.0)
        .map(|(&(i, j), &f)| (i, j, f))
        .collect();
    flows.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    let cost = flows.iter().map(|&(i, j, f)| cost[i][j] * f).sum();
    Solution {
        cost,
        flows,
        residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell() {
        let s = solve(&[1.0], &[1.0], &[vec![2.5]]).unwrap();
        assert_eq!(s.cost, 2.5);
        assert_eq!(s.flows, vec![(0, 0, 1.0)]);
    }

    #[test]
    fn crossing_is_uncrossed() {
        // northwest corner starts on the expensive diagonal
        let cost = vec![vec![5.0, 1.0], vec![1.0, 5.0]];
        let s = solve(&[0.5, 0.5], &[0.5, 0.5], &cost).unwrap();
        assert!((s.cost - 1.0).abs() < 1e-15);
        assert!(s.residual <= 1e-12);
    }

    #[test]
    fn degenerate_marginals() {
        let cost = vec![
            vec![0.0, 3.0, 1.0],
            vec![2.0, 0.0, 4.0],
            vec![1.0, 2.0, 0.0],
        ];
        let w = [1.0 / 3.0; 3];
        let s = solve(&w, &w, &cost).unwrap();
        assert!(s.cost.abs() < 1e-15);
    }

    #[test]
    fn unbalanced_is_rejected() {
        assert!(solve(&[1.0], &[0.5], &[vec![1.0]]).is_err());
    }
}
