//! Distances between the harmonic generators of a single complex.

mod transport;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::complex::SimplicialComplex;
use crate::error::{Error, Result};
use crate::hodge::{fix_sign, GeneratorSet};
use crate::ingest::euclid;

/// Squared entries at or below this are dropped from transport supports.
pub const MASS_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    L1,
    Cocycle,
    Wasserstein,
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MetricKind::L1 => "l1",
            MetricKind::Cocycle => "cocycle",
            MetricKind::Wasserstein => "wasserstein",
        })
    }
}

impl std::str::FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "l1" => Ok(MetricKind::L1),
            "cocycle" => Ok(MetricKind::Cocycle),
            "wasserstein" | "w1" => Ok(MetricKind::Wasserstein),
            other => Err(Error::Config(format!("unknown metric '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub structure: String,
    pub threshold: Option<f64>,
    pub p: usize,
}

/// Symmetric dissimilarity matrix over the generators of one structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSpace {
    pub dmatrix: Vec<Vec<f64>>,
    pub metric_kind: MetricKind,
    pub provenance: Provenance,
    /// Largest probability mass dropped by support truncation (Wasserstein only).
    pub max_truncated_mass: f64,
}

impl MetricSpace {
    pub fn len(&self) -> usize {
        self.dmatrix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dmatrix.is_empty()
    }
}

fn check_pair(v: &[f64], w: &[f64]) -> Result<()> {
    if v.len() != w.len() {
        return Err(Error::Shape(format!(
            "generator lengths differ: {} vs {}",
            v.len(),
            w.len()
        )));
    }
    Ok(())
}

fn signed(v: &[f64]) -> Vec<f64> {
    let mut v = v.to_vec();
    fix_sign(&mut v);
    v
}

/// ‖v − w‖₁ after both vectors pass the sign rule.
pub fn dist_l1(v: &[f64], w: &[f64]) -> Result<f64> {
    check_pair(v, w)?;
    let (v, w) = (signed(v), signed(w));
    Ok(v.iter().zip(&w).map(|(a, b)| (a - b).abs()).sum())
}

/// | ‖v‖₁ − ‖w‖₁ |.
pub fn dist_cocycle(v: &[f64], w: &[f64]) -> Result<f64> {
    check_pair(v, w)?;
    let n1 = |x: &[f64]| x.iter().map(|a| a.abs()).sum::<f64>();
    Ok((n1(v) - n1(w)).abs())
}

/// Smallest Euclidean distance between a vertex of `a` and a vertex of `b`.
pub fn ground_distance(a: &[usize], b: &[usize], points: &[[f64; 3]]) -> Result<f64> {
    let n = points.len();
    if let Some(&bad) = a.iter().chain(b).find(|&&v| v >= n) {
        return Err(Error::Shape(format!("vertex {bad} out of range ({n} points)")));
    }
    let mut best = f64::INFINITY;
    for &x in a {
        for &y in b {
            best = best.min(euclid(&points[x], &points[y]));
        }
    }
    Ok(best)
}

/// Probability measures on the p-simplices and the optimal mass flow
/// between them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    /// `(source simplex, target simplex, mass)`.
    pub flows: Vec<(usize, usize, f64)>,
    /// `(simplex, mass)` after truncation and renormalization.
    pub source: Vec<(usize, f64)>,
    pub target: Vec<(usize, f64)>,
    pub cost: f64,
    pub dropped_mass: f64,
    pub residual: f64,
}

impl TransportPlan {
    /// Largest deviation of the flow marginals from the two measures.
    pub fn marginal_error(&self) -> f64 {
        let mut worst = 0.0f64;
        for &(s, m) in &self.source {
            let out: f64 = self.flows.iter().filter(|f| f.0 == s).map(|f| f.2).sum();
            worst = worst.max((out - m).abs());
        }
        for &(t, m) in &self.target {
            let inn: f64 = self.flows.iter().filter(|f| f.1 == t).map(|f| f.2).sum();
            worst = worst.max((inn - m).abs());
        }
        worst
    }
}

fn measure(v: &[f64]) -> (Vec<(usize, f64)>, f64) {
    let mut kept = Vec::new();
    let mut dropped = 0.0;
    for (i, x) in v.iter().enumerate() {
        let m = x * x;
        if m > MASS_EPS {
            kept.push((i, m));
        } else {
            dropped += m;
        }
    }
    let total: f64 = kept.iter().map(|e| e.1).sum();
    for e in &mut kept {
        e.1 /= total;
    }
    (kept, dropped)
}

/// 1-Wasserstein distance between the squared-entry measures of two unit
/// generators of `k`, with the ground cost [`ground_distance`].
pub fn dist_wasserstein(v: &[f64], w: &[f64], k: &SimplicialComplex, p: usize) -> Result<TransportPlan> {
    check_pair(v, w)?;
    let simplices = k.simplices(p);
    if v.len() != simplices.len() {
        return Err(Error::Shape(format!(
            "generator has {} entries but the complex has {} {p}-simplices",
            v.len(),
            simplices.len()
        )));
    }
    for x in [v, w] {
        let norm = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-8 {
            return Err(Error::NotUnitNorm(norm));
        }
    }
    let (source, drop_s) = measure(v);
    let (target, drop_t) = measure(w);
    let cost: Vec<Vec<f64>> = source
        .iter()
        .map(|&(i, _)| {
            target
                .iter()
                .map(|&(j, _)| {
                    ground_distance(&simplices[i].vertices, &simplices[j].vertices, k.points())
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let supply: Vec<f64> = source.iter().map(|e| e.1).collect();
    let demand: Vec<f64> = target.iter().map(|e| e.1).collect();
    let sol = transport::solve(&supply, &demand, &cost)?;
    if sol.residual > 1e-9 {
        return Err(Error::Transport(format!(
            "optimality residual {:e} exceeds 1e-9",
            sol.residual
        )));
    }
    Ok(TransportPlan {
        flows: sol
            .flows
            .iter()
            .map(|&(a, b, f)| (source[a].0, target[b].0, f))
            .collect(),
        source,
        target,
        cost: sol.cost,
        dropped_mass: drop_s.max(drop_t),
        residual: sol.residual,
    })
}

/// Pairwise distance matrix over all generators in `g`.
pub fn generator_metric_space(
    g: &GeneratorSet,
    kind: MetricKind,
    k: &SimplicialComplex,
) -> Result<MetricSpace> {
    let order: Vec<&Vec<usize>> = k.simplices(g.p).iter().map(|s| &s.vertices).collect();
    if order.len() != g.simplex_order.len() || order.iter().zip(&g.simplex_order).any(|(a, b)| *a != b) {
        return Err(Error::Shape(
            "generator set does not match the complex's simplex order".into(),
        ));
    }
    let n = g.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let eval = |&(i, j): &(usize, usize)| -> Result<(f64, f64)> {
        let (v, w) = (&g.vectors[i], &g.vectors[j]);
        let r = match kind {
            MetricKind::L1 => dist_l1(v, w).map(|d| (d, 0.0)),
            MetricKind::Cocycle => dist_cocycle(v, w).map(|d| (d, 0.0)),
            MetricKind::Wasserstein => {
                dist_wasserstein(v, w, k, g.p).map(|plan| (plan.cost, plan.dropped_mass))
            }
        };
        r.map_err(|e| e.context(format!("generators ({i}, {j})")))
    };

    #[cfg(feature = "parallel")]
    let values: Vec<Result<(f64, f64)>> = {
        use rayon::prelude::*;
        pairs.par_iter().map(eval).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let values: Vec<Result<(f64, f64)>> = pairs.iter().map(eval).collect();

    let mut d = vec![vec![0.0; n]; n];
    let mut dropped = 0.0f64;
    for (&(i, j), r) in pairs.iter().zip(values) {
        let (x, m) = r?;
        d[i][j] = x;
        d[j][i] = x;
        dropped = dropped.max(m);
    }
    Ok(MetricSpace {
        dmatrix: d,
        metric_kind: kind,
        provenance: Provenance {
            structure: String::new(),
            threshold: k.threshold(),
            p: g.p,
        },
        max_truncated_mass: dropped,
    })
}
