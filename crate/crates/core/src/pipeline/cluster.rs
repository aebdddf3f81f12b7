//! k-means (k-means++ seeding, Lloyd iterations) and the adjusted Rand index.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub labels: Vec<usize>,
    pub k: usize,
    pub inertia: f64,
    pub seed: u64,
    pub restarts: usize,
    /// Lloyd iterations used by the winning restart.
    pub iterations: usize,
    /// Index of the winning restart.
    pub best_restart: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(x: &[f64], centers: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, center) in centers.iter().enumerate() {
        let d = sq_dist(x, center);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn seed_centers(data: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = data.len();
    let mut centers = vec![data[rng.gen_range(0..n)].clone()];
    let mut d2: Vec<f64> = data.iter().map(|x| sq_dist(x, &centers[0])).collect();
    while centers.len() < k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let r = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > r {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            rng.gen_range(0..n)
        };
        let c = data[pick].clone();
        for (i, x) in data.iter().enumerate() {
            d2[i] = d2[i].min(sq_dist(x, &c));
        }
        centers.push(c);
    }
    centers
}

fn means(data: &[Vec<f64>], labels: &[usize], k: usize) -> Vec<Vec<f64>> {
    let dim = data[0].len();
    let mut sums = vec![vec![0.0; dim]; k];
    let mut counts = vec![0usize; k];
    for (x, &l) in data.iter().zip(labels) {
        counts[l] += 1;
        sums[l].iter_mut().zip(x).for_each(|(s, v)| *s += v);
    }
    for (s, &c) in sums.iter_mut().zip(&counts) {
        s.iter_mut().for_each(|v| *v /= c as f64);
    }
    sums
}

/// Moves the point farthest from its centroid into each empty cluster.
fn reseed_empty(data: &[Vec<f64>], labels: &mut [usize], centers: &[Vec<f64>], k: usize) {
    let mut counts = vec![0usize; k];
    labels.iter().for_each(|&l| counts[l] += 1);
    for c in 0..k {
        if counts[c] > 0 {
            continue;
        }
        let mut far = None;
        let mut far_d = -1.0;
        for (i, x) in data.iter().enumerate() {
            if counts[labels[i]] > 1 {
                let d = sq_dist(x, &centers[labels[i]]);
                if d > far_d {
                    far_d = d;
                    far = Some(i);
                }
            }
        }
        if let Some(i) = far {
            counts[labels[i]] -= 1;
            labels[i] = c;
            counts[c] = 1;
        }
    }
}

fn lloyd(data: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> (Vec<usize>, f64, usize) {
    let mut centers = seed_centers(data, k, rng);
    let mut labels: Vec<usize> = data.iter().map(|x| nearest(x, &centers).0).collect();
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        reseed_empty(data, &mut labels, &centers, k);
        centers = means(data, &labels, k);
        let next: Vec<usize> = data.iter().map(|x| nearest(x, &centers).0).collect();
        if next == labels {
            break;
        }
        labels = next;
    }
    reseed_empty(data, &mut labels, &centers, k);
    centers = means(data, &labels, k);
    let inertia = data
        .iter()
        .zip(&labels)
        .map(|(x, &l)| sq_dist(x, &centers[l]))
        .sum();
    (labels, inertia, iterations)
}

/// Best-inertia k-means over `restarts` seeded runs. Restart `r` draws from
/// stream `r` of a ChaCha8 generator seeded with `seed`.
pub fn kmeans(data: &[Vec<f64>], k: usize, seed: u64, restarts: usize) -> Result<Clustering> {
    let n = data.len();
    if k == 0 || k > n {
        return Err(Error::Config(format!("k = {k} must lie in 1..={n}")));
    }
    if restarts == 0 {
        return Err(Error::Config("restarts must be at least 1".into()));
    }
    let dim = data[0].len();
    if let Some(i) = data.iter().position(|r| r.len() != dim) {
        return Err(Error::Shape(format!("row {i} has {} features, expected {dim}", data[i].len())));
    }
    if data.iter().flatten().any(|x| !x.is_finite()) {
        return Err(Error::Shape("non-finite feature value".into()));
    }
    let run = |r: usize| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(r as u64);
        lloyd(data, k, &mut rng)
    };

    #[cfg(feature = "parallel")]
    let runs: Vec<_> = {
        use rayon::prelude::*;
        (0..restarts).into_par_iter().map(run).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let runs: Vec<_> = (0..restarts).map(run).collect();

    let mut best = 0;
    for (r, run) in runs.iter().enumerate() {
        if run.1 < runs[best].1 {
            best = r;
        }
    }
    let (labels, inertia, iterations) = runs.into_iter().nth(best).unwrap();
    Ok(Clustering {
        labels,
        k,
        inertia,
        seed,
        restarts,
        iterations,
        best_restart: best,
    })
}

fn pairs(x: u64) -> i128 {
    let x = x as i128;
    x * (x - 1) / 2
}

/// Adjusted Rand index under the permutation model.
pub fn ari<A: Ord, B: Ord>(a: &[A], b: &[B]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!("label lists differ in length: {} vs {}", a.len(), b.len())));
    }
    let n = a.len() as u64;
    if n < 2 {
        return Err(Error::Shape("adjusted Rand index needs at least 2 items".into()));
    }
    let mut table: BTreeMap<(&A, &B), u64> = BTreeMap::new();
    let mut rows: BTreeMap<&A, u64> = BTreeMap::new();
    let mut cols: BTreeMap<&B, u64> = BTreeMap::new();
    for (x, y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1;
        *rows.entry(x).or_default() += 1;
        *cols.entry(y).or_default() += 1;
    }
    // (index - expected) / (max - expected), cleared of the division by C(n, 2)
    let index: i128 = table.values().map(|&c| pairs(c)).sum();
    let sa: i128 = rows.values().map(|&c| pairs(c)).sum();
    let sb: i128 = cols.values().map(|&c| pairs(c)).sum();
    let total = pairs(n);
    let num = 2 * (index * total - sa * sb);
    let den = total * (sa + sb) - 2 * sa * sb;
    if den == 0 {
        // both partitions trivial in the same way
        return Ok(1.0);
    }
    Ok(num as f64 / den as f64)
}
