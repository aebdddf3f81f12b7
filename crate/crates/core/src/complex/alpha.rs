//! Alpha filtration on the Delaunay complex.
//!
//! A simplex whose smallest circumsphere is empty of the remaining vertices
//! of its cofaces (Gabriel) enters at that sphere's radius; otherwise it
//! enters together with its earliest coface.

use std::collections::BTreeSet;

use super::delaunay::tetrahedralize;
use super::geometry::{circumsphere, dist2};
use super::{ComplexKind, Simplex, SimplicialComplex};
use crate::error::{Error, Result};
use crate::ingest::PointCloud;

/// The full Delaunay complex with alpha filtration values on every simplex.
pub fn delaunay3d(cloud: &PointCloud) -> Result<SimplicialComplex> {
    let pts = &cloud.points;
    let tets = tetrahedralize(pts)?;

    let mut by_dim: Vec<BTreeSet<Vec<usize>>> = vec![BTreeSet::new(); 4];
    for t in &tets {
        for mask in 1u32..16 {
            let verts: Vec<usize> = (0..4).filter(|i| mask & (1 << i) != 0).map(|i| t[i]).collect();
            by_dim[verts.len() - 1].insert(verts);
        }
    }
    let lists: Vec<Vec<Vec<usize>>> = by_dim.into_iter().map(|s| s.into_iter().collect()).collect();

    let mut filt: Vec<Vec<f64>> = lists.iter().map(|l| vec![f64::INFINITY; l.len()]).collect();
    let mut attached: Vec<Vec<bool>> = lists.iter().map(|l| vec![false; l.len()]).collect();
    let mut spheres: Vec<Vec<([f64; 3], f64)>> = Vec::with_capacity(4);
    for list in &lists {
        let mut s = Vec::with_capacity(list.len());
        for verts in list {
            let p: Vec<[f64; 3]> = verts.iter().map(|&v| pts[v]).collect();
            let sphere = circumsphere(&p).ok_or_else(|| {
                Error::Degenerate(format!("degenerate Delaunay simplex {verts:?}"))
            })?;
            s.push(sphere);
        }
        spheres.push(s);
    }

    for d in (0..4).rev() {
        if d < 3 {
            // propagate from cofaces of dimension d + 1
            for (j, coface) in lists[d + 1].iter().enumerate() {
                let fj = filt[d + 1][j];
                for k in 0..coface.len() {
                    let mut face = coface.clone();
                    let opposite = face.remove(k);
                    let i = lists[d]
                        .binary_search(&face)
                        .expect("Delaunay complex is closed");
                    let (c, r2) = spheres[d][i];
                    if dist2(&pts[opposite], &c) < r2 {
                        attached[d][i] = true;
                    }
                    // running minimum over cofaces, used only when attached
                    if fj < filt[d][i] {
                        filt[d][i] = fj;
                    }
                }
            }
        }
        for i in 0..lists[d].len() {
            if d == 3 || !attached[d][i] {
                filt[d][i] = spheres[d][i].1.sqrt();
            }
        }
    }

    let simplices = lists
        .into_iter()
        .zip(filt)
        .flat_map(|(l, f)| l.into_iter().zip(f).map(|(v, f)| Simplex::new(v, f)))
        .collect();
    SimplicialComplex::from_simplices(pts.clone(), simplices, 3, ComplexKind::Alpha, None)
}

/// Alpha complex at `threshold`: Delaunay simplices with alpha value ≤ threshold.
pub fn build_alpha(cloud: &PointCloud, threshold: f64) -> Result<SimplicialComplex> {
    if !(threshold.is_finite() && threshold >= 0.0) {
        return Err(Error::Config(format!(
            "threshold must be non-negative, got {threshold}"
        )));
    }
    Ok(delaunay3d(cloud)?.sublevel(threshold))
}
