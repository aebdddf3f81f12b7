//! Seeded synthetic structures for benchmarks and demos.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::ingest::{PointCloud, TrajectorySet};

/// `per_side`³ simple cubic lattice with spacing `a`, every coordinate
/// perturbed by N(0, sigma²).
pub fn cubic_lattice(a: f64, per_side: usize, sigma: f64, rng: &mut ChaCha8Rng) -> Result<PointCloud> {
    let noise = Normal::new(0.0, sigma).map_err(|e| Error::Config(format!("sigma {sigma}: {e}")))?;
    let mut points = Vec::with_capacity(per_side.pow(3));
    for i in 0..per_side {
        for j in 0..per_side {
            for k in 0..per_side {
                let base = [i as f64 * a, j as f64 * a, k as f64 * a];
                points.push(base.map(|c| c + noise.sample(rng)));
            }
        }
    }
    let mut cloud = PointCloud::new(points);
    cloud.elements = vec!["X".into(); cloud.points.len()];
    Ok(cloud)
}

/// One trajectory per lattice constant, `frames` jittered 3×3×3 frames each,
/// labelled `a<constant>`.
pub fn lattice_benchmark(constants: &[f64], frames: usize, sigma: f64, seed: u64) -> Result<Vec<TrajectorySet>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    constants
        .iter()
        .map(|&a| {
            let label = format!("a{a}");
            let frames = (0..frames)
                .map(|f| {
                    let mut c = cubic_lattice(a, 3, sigma, &mut rng)?.with_tag(label.clone());
                    c.frame_id = f;
                    Ok(c)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(TrajectorySet {
                frames,
                group_label: label,
            })
        })
        .collect()
}
