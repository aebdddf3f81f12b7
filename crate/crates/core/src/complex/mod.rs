//! Simplicial complexes built from point clouds.
//!
//! Simplices are stored per dimension as strictly increasing vertex tuples,
//! sorted lexicographically. That sorted order is both the orientation
//! convention and the row/column order of every matrix built downstream.

mod alpha;
pub(crate) mod delaunay;
pub(crate) mod geometry;
mod predicates;

use std::collections::BTreeMap;
use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::PointCloud;

pub use alpha::{build_alpha, delaunay3d};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComplexKind {
    Vr,
    Alpha,
}

impl fmt::Display for ComplexKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ComplexKind::Vr => f.write_str("vr"),
            ComplexKind::Alpha => f.write_str("alpha"),
        }
    }
}

impl std::str::FromStr for ComplexKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "vr" | "rips" => Ok(ComplexKind::Vr),
            "alpha" => Ok(ComplexKind::Alpha),
            other => Err(Error::Config(format!("unknown complex kind '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Simplex {
    pub vertices: Vec<usize>,
    pub filtration: f64,
}

impl Simplex {
    pub fn new(vertices: Vec<usize>, filtration: f64) -> Self {
        Simplex {
            vertices,
            filtration,
        }
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    /// Codimension-1 faces paired with their incidence sign; the face
    /// obtained by dropping the k-th vertex carries `(-1)^k`.
    pub fn boundary(&self) -> impl Iterator<Item = (Vec<usize>, i8)> + '_ {
        let n = self.vertices.len();
        (0..n).filter(move |_| n > 1).map(move |k| {
            let mut face = self.vertices.clone();
            face.remove(k);
            (face, if k % 2 == 0 { 1 } else { -1 })
        })
    }
}

#[derive(Debug, Clone)]
pub struct SimplicialComplex {
    simplices: Vec<Vec<Simplex>>,
    points: Vec<[f64; 3]>,
    kind: ComplexKind,
    threshold: Option<f64>,
}

impl SimplicialComplex {
    /// Assemble a complex from explicit simplices. Input order does not
    /// matter; duplicates are merged keeping the smallest filtration.
    /// `max_dim` fixes how many dimension slots exist even if some are empty.
    pub fn from_simplices(
        points: Vec<[f64; 3]>,
        simplices: Vec<Simplex>,
        max_dim: usize,
        kind: ComplexKind,
        threshold: Option<f64>,
    ) -> Result<Self> {
        let mut by_dim: Vec<Vec<Simplex>> = vec![Vec::new(); max_dim + 1];
        for mut s in simplices {
            if s.vertices.is_empty() {
                return Err(Error::Shape("empty simplex".into()));
            }
            s.vertices.sort_unstable();
            if s.vertices.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Shape(format!("repeated vertex in {:?}", s.vertices)));
            }
            if s.vertices.last().copied().unwrap_or(0) >= points.len() {
                return Err(Error::Shape(format!(
                    "simplex {:?} references a missing point",
                    s.vertices
                )));
            }
            if !(s.filtration.is_finite() && s.filtration >= 0.0) {
                return Err(Error::Shape(format!(
                    "bad filtration {} on {:?}",
                    s.filtration, s.vertices
                )));
            }
            let d = s.dim();
            if d > max_dim {
                return Err(Error::Shape(format!(
                    "simplex {:?} exceeds max dimension {max_dim}",
                    s.vertices
                )));
            }
            by_dim[d].push(s);
        }
        for list in &mut by_dim {
            list.sort_by(|a, b| {
                a.vertices
                    .cmp(&b.vertices)
                    .then(a.filtration.total_cmp(&b.filtration))
            });
            list.dedup_by(|later, earlier| later.vertices == earlier.vertices);
        }
        Ok(SimplicialComplex {
            simplices: by_dim,
            points,
            kind,
            threshold,
        })
    }

    /// Downward closure of the given maximal simplices, all at filtration 0.
    /// Handy for hand-built fixtures.
    pub fn from_maximal(points: Vec<[f64; 3]>, maximal: &[Vec<usize>]) -> Result<Self> {
        let mut all = Vec::new();
        let mut max_dim = 0;
        for top in maximal {
            let mut top = top.clone();
            top.sort_unstable();
            max_dim = max_dim.max(top.len().saturating_sub(1));
            for mask in 1u32..(1 << top.len()) {
                let verts: Vec<usize> = top
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, &v)| v)
                    .collect();
                all.push(Simplex::new(verts, 0.0));
            }
        }
        Self::from_simplices(points, all, max_dim.max(1), ComplexKind::Vr, None)
    }

    pub fn kind(&self) -> ComplexKind {
        self.kind
    }

    pub fn threshold(&self) -> Option<f64> {
        self.threshold
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    /// Highest dimension slot (some top slots may be empty).
    pub fn max_dim(&self) -> usize {
        self.simplices.len() - 1
    }

    /// Highest dimension that actually holds a simplex.
    pub fn top_dim(&self) -> usize {
        self.simplices
            .iter()
            .rposition(|l| !l.is_empty())
            .unwrap_or(0)
    }

    pub fn simplices(&self, p: usize) -> &[Simplex] {
        self.simplices.get(p).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn count(&self, p: usize) -> usize {
        self.simplices(p).len()
    }

    pub fn len(&self) -> usize {
        self.simplices.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Position of a (sorted) vertex tuple within its dimension.
    pub fn index_of(&self, vertices: &[usize]) -> Option<usize> {
        let p = vertices.len().checked_sub(1)?;
        self.simplices(p)
            .binary_search_by(|s| s.vertices.as_slice().cmp(vertices))
            .ok()
    }

    pub fn contains(&self, vertices: &[usize]) -> bool {
        self.index_of(vertices).is_some()
    }

    /// For every p-simplex, the indices of the (p+1)-simplices it bounds.
    pub fn cofaces(&self, p: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count(p)];
        for (j, s) in self.simplices(p + 1).iter().enumerate() {
            for (face, _) in s.boundary() {
                if let Some(i) = self.index_of(&face) {
                    out[i].push(j);
                }
            }
        }
        out
    }

    /// Every face of every simplex is present.
    pub fn is_closed(&self) -> bool {
        self.simplices
            .iter()
            .flatten()
            .all(|s| s.boundary().all(|(f, _)| self.contains(&f)))
    }

    /// Every face enters no later than its cofaces.
    pub fn is_monotone(&self) -> bool {
        self.simplices.iter().flatten().all(|s| {
            s.boundary().all(|(f, _)| {
                self.index_of(&f)
                    .map(|i| self.simplices(f.len() - 1)[i].filtration <= s.filtration)
                    .unwrap_or(false)
            })
        })
    }

    /// Largest filtration value present.
    pub fn max_filtration(&self) -> f64 {
        self.simplices
            .iter()
            .flatten()
            .map(|s| s.filtration)
            .fold(0.0, f64::max)
    }

    /// Subcomplex of simplices with filtration ≤ `threshold`.
    pub fn sublevel(&self, threshold: f64) -> SimplicialComplex {
        SimplicialComplex {
            simplices: self
                .simplices
                .iter()
                .map(|l| {
                    l.iter()
                        .filter(|s| s.filtration <= threshold)
                        .cloned()
                        .collect()
                })
                .collect(),
            points: self.points.clone(),
            kind: self.kind,
            threshold: Some(threshold),
        }
    }

    /// Simplices of dimension ≤ `dim`.
    pub fn skeleton(&self, dim: usize) -> SimplicialComplex {
        let keep = (dim + 1).min(self.simplices.len());
        SimplicialComplex {
            simplices: self.simplices[..keep].to_vec(),
            points: self.points.clone(),
            kind: self.kind,
            threshold: self.threshold,
        }
    }

    /// True if every simplex of `self` also belongs to `other`.
    pub fn is_subcomplex_of(&self, other: &SimplicialComplex) -> bool {
        self.simplices
            .iter()
            .flatten()
            .all(|s| other.contains(&s.vertices))
    }

    pub fn to_export(&self) -> ComplexExport {
        let mut dims = BTreeMap::new();
        let mut filtration = Vec::new();
        for (p, list) in self.simplices.iter().enumerate() {
            dims.insert(
                p.to_string(),
                list.iter().map(|s| s.vertices.clone()).collect(),
            );
            filtration.push(list.iter().map(|s| s.filtration).collect());
        }
        ComplexExport {
            dims,
            filtration,
            kind: self.kind,
            threshold: self.threshold,
        }
    }
}

/// JSON form of a complex. `filtration[p][i]` belongs to `dims[p][i]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComplexExport {
    pub dims: BTreeMap<String, Vec<Vec<usize>>>,
    pub filtration: Vec<Vec<f64>>,
    pub kind: ComplexKind,
    pub threshold: Option<f64>,
}

/// Number of (p+1)-simplices having `simplex` as a face.
pub fn upper_degree(k: &SimplicialComplex, simplex: &[usize]) -> Result<usize> {
    let mut verts = simplex.to_vec();
    verts.sort_unstable();
    if !k.contains(&verts) {
        return Err(Error::SimplexNotFound(verts));
    }
    let p = verts.len() - 1;
    Ok(k.simplices(p + 1)
        .iter()
        .filter(|s| is_face(&verts, &s.vertices))
        .count())
}

/// Both slices sorted ascending.
pub(crate) fn is_face(face: &[usize], coface: &[usize]) -> bool {
    let mut it = coface.iter();
    face.iter().all(|v| it.any(|w| w == v))
}

/// Vietoris–Rips complex: a set of at most `p_max + 1` points is a simplex
/// when every pairwise distance is ≤ `threshold`.
pub fn build_vr(cloud: &PointCloud, threshold: f64, p_max: usize) -> Result<SimplicialComplex> {
    if !(1..=3).contains(&p_max) {
        return Err(Error::Config(format!("p_max must be in 1..=3, got {p_max}")));
    }
    if !(threshold.is_finite() && threshold > 0.0) {
        return Err(Error::Config(format!("threshold must be positive, got {threshold}")));
    }
    let n = cloud.len();
    let mut dist = vec![0.0; n * n];
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for j in i + 1..n {
            let d = cloud.dist(i, j);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
            if d <= threshold {
                nbrs[i].push(j);
            }
        }
    }

    let mut out: Vec<Simplex> = (0..n).map(|i| Simplex::new(vec![i], 0.0)).collect();
    let mut frontier: Vec<Simplex> = out.clone();
    for _ in 1..=p_max {
        let mut next = Vec::new();
        for s in &frontier {
            let last = *s.vertices.last().expect("non-empty");
            for &v in &nbrs[last] {
                if s.vertices.iter().all(|&u| dist[u * n + v] <= threshold) {
                    let f = s
                        .vertices
                        .iter()
                        .map(|&u| dist[u * n + v])
                        .fold(s.filtration, f64::max);
                    let mut verts = s.vertices.clone();
                    verts.push(v);
                    next.push(Simplex::new(verts, f));
                }
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    SimplicialComplex::from_simplices(
        cloud.points.clone(),
        out,
        p_max,
        ComplexKind::Vr,
        Some(threshold),
    )
}

/// Seeded Gaussian perturbation of every coordinate.
pub fn jitter_cloud(cloud: &PointCloud, sigma: f64, seed: u64) -> Result<PointCloud> {
    let normal = Normal::new(0.0, sigma)
        .map_err(|e| Error::Config(format!("invalid jitter sigma {sigma}: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = cloud.clone();
    for p in &mut out.points {
        for c in p.iter_mut() {
            *c += normal.sample(&mut rng);
        }
    }
    Ok(out)
}
