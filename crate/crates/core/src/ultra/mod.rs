//! Ultrametric spaces, their dendrograms, and the Gromov-Hausdorff
//! ultrametric between two finite ultrametric spaces.

mod newick;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genmetric::{MetricSpace, Provenance};

pub use newick::{parse_newick, to_newick};

/// Relative tolerance under which two merge heights count as equal when two
/// spaces are compared.
pub const SPECTRUM_RTOL: f64 = 1e-9;

/// Largest size accepted by [`ugh_bruteforce`].
pub const BRUTEFORCE_MAX: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ultrametric {
    pub dmatrix: Vec<Vec<f64>>,
    /// Sorted distinct entries, 0 included for non-empty spaces.
    pub spectrum_values: Vec<f64>,
    pub provenance: Provenance,
}

fn distinct_values(d: &[Vec<f64>]) -> Vec<f64> {
    let mut v: Vec<f64> = d.iter().flatten().copied().collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Largest amount by which `d` breaks d(x,z) ≤ max(d(x,y), d(y,z)).
pub fn ultrametric_violation(d: &[Vec<f64>]) -> f64 {
    let n = d.len();
    let mut worst = 0.0f64;
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                worst = worst.max(d[x][z] - d[x][y].max(d[y][z]));
            }
        }
    }
    worst
}

fn check_square(d: &[Vec<f64>]) -> Result<()> {
    let n = d.len();
    for (i, row) in d.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Shape(format!("row {i} has {} entries, expected {n}", row.len())));
        }
        for (j, &x) in row.iter().enumerate() {
            if !x.is_finite() || x < 0.0 {
                return Err(Error::Shape(format!("entry ({i}, {j}) = {x} is not a finite non-negative value")));
            }
        }
        if d[i][i] != 0.0 {
            return Err(Error::Shape(format!("diagonal entry {i} is {}", d[i][i])));
        }
    }
    Ok(())
}

impl Ultrametric {
    /// Validates `d` (square, zero diagonal, exactly symmetric, strong
    /// triangle inequality within 1e-12).
    pub fn from_matrix(d: Vec<Vec<f64>>) -> Result<Self> {
        check_square(&d)?;
        let n = d.len();
        for i in 0..n {
            for j in 0..i {
                if d[i][j] != d[j][i] {
                    return Err(Error::NotSymmetric((d[i][j] - d[j][i]).abs()));
                }
            }
        }
        let v = ultrametric_violation(&d);
        if v > 1e-12 {
            return Err(Error::Shape(format!("not an ultrametric (violation {v:e})")));
        }
        Ok(Self::new_unchecked(d))
    }

    fn new_unchecked(d: Vec<Vec<f64>>) -> Self {
        Ultrametric {
            spectrum_values: distinct_values(&d),
            dmatrix: d,
            provenance: Provenance::default(),
        }
    }

    pub fn len(&self) -> usize {
        self.dmatrix.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dmatrix.is_empty()
    }

    pub fn diameter(&self) -> f64 {
        self.spectrum_values.last().copied().unwrap_or(0.0)
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dmatrix[i][j]
    }
}

/// Minimax-path closure of a dissimilarity matrix: the largest ultrametric
/// below `m` pointwise. The input is symmetrized as (M + Mᵀ)/2 first.
pub fn subdominant_from_matrix(m: &[Vec<f64>]) -> Result<Ultrametric> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(Error::Shape("dissimilarity matrix is not square".into()));
    }
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in 0..i {
            asym = asym.max((m[i][j] - m[j][i]).abs());
        }
    }
    if asym > 1e-12 {
        return Err(Error::NotSymmetric(asym));
    }
    let sym: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { m[i][i] } else { (m[i][j] + m[j][i]) / 2.0 })
                .collect()
        })
        .collect();
    check_square(&sym)?;

    // Prim's MST on the dense graph.
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![usize::MAX; n];
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    if n > 0 {
        best[0] = 0.0;
    }
    for _ in 0..n {
        let mut u = usize::MAX;
        for v in 0..n {
            if !in_tree[v] && (u == usize::MAX || best[v] < best[u]) {
                u = v;
            }
        }
        in_tree[u] = true;
        if parent[u] != usize::MAX {
            let w = sym[u][parent[u]];
            adj[u].push((parent[u], w));
            adj[parent[u]].push((u, w));
        }
        for v in 0..n {
            if !in_tree[v] && sym[u][v] < best[v] {
                best[v] = sym[u][v];
                parent[v] = u;
            }
        }
    }

    // Path maxima from every root.
    let mut u = vec![vec![0.0; n]; n];
    let mut stack = Vec::new();
    for r in 0..n {
        stack.clear();
        stack.push((r, usize::MAX, 0.0f64));
        while let Some((a, from, m)) = stack.pop() {
            u[r][a] = m;
            for &(b, w) in &adj[a] {
                if b != from {
                    stack.push((b, a, m.max(w)));
                }
            }
        }
    }
    Ok(Ultrametric::new_unchecked(u))
}

pub fn subdominant_ultrametric(m: &MetricSpace) -> Result<Ultrametric> {
    let mut u = subdominant_from_matrix(&m.dmatrix)?;
    u.provenance = m.provenance.clone();
    Ok(u)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DendroNode {
    pub height: f64,
    pub children: Vec<usize>,
    pub leaf: Option<usize>,
    /// Number of leaves below this node.
    pub size: usize,
}

/// Merge tree of an ultrametric. Nodes `0..n` are the leaves; points merging
/// at one height hang off a single node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub nodes: Vec<DendroNode>,
    pub root: usize,
}

impl Dendrogram {
    pub fn new(u: &Ultrametric) -> Result<Self> {
        let n = u.len();
        if n == 0 {
            return Err(Error::Undefined("dendrogram of an empty space".into()));
        }
        let mut nodes: Vec<DendroNode> = (0..n)
            .map(|i| DendroNode {
                height: 0.0,
                children: Vec::new(),
                leaf: Some(i),
                size: 1,
            })
            .collect();
        let all: Vec<usize> = (0..n).collect();
        let root = build_node(&u.dmatrix, &all, &mut nodes);
        Ok(Dendrogram { nodes, root })
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes[self.root].size
    }

    /// Leaf-to-leaf distances given by lowest common ancestor heights.
    pub fn cophenetic(&self) -> Vec<Vec<f64>> {
        let n = self.n_leaves();
        let mut d = vec![vec![0.0; n]; n];
        self.fill(self.root, &mut d);
        d
    }

    /// Leaf ids under `node`.
    pub fn leaves(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(a) = stack.pop() {
            match self.nodes[a].leaf {
                Some(l) => out.push(l),
                None => stack.extend(&self.nodes[a].children),
            }
        }
        out.sort_unstable();
        out
    }

    fn fill(&self, node: usize, d: &mut [Vec<f64>]) -> Vec<usize> {
        let nd = &self.nodes[node];
        if let Some(l) = nd.leaf {
            return vec![l];
        }
        let mut acc: Vec<usize> = Vec::new();
        for &c in &nd.children {
            let sub = self.fill(c, d);
            for &a in &acc {
                for &b in &sub {
                    d[a][b] = nd.height;
                    d[b][a] = nd.height;
                }
            }
            acc.extend(sub);
        }
        acc
    }

    fn codes(&self) -> Vec<String> {
        let mut out = vec![String::new(); self.nodes.len()];
        self.code_into(self.root, &mut out);
        out
    }

    fn code_into(&self, node: usize, out: &mut Vec<String>) {
        let nd = &self.nodes[node];
        if nd.leaf.is_some() {
            out[node] = "x".into();
            return;
        }
        let mut parts = Vec::with_capacity(nd.children.len());
        for &c in &nd.children {
            self.code_into(c, out);
            parts.push(out[c].clone());
        }
        parts.sort();
        out[node] = format!("[{}|{}]", nd.height, parts.join(","));
    }
}

fn build_node(d: &[Vec<f64>], set: &[usize], nodes: &mut Vec<DendroNode>) -> usize {
    if set.len() == 1 {
        return set[0];
    }
    let mut h = 0.0f64;
    for &a in set {
        for &b in set {
            h = h.max(d[a][b]);
        }
    }
    // classes of the relation d < h, each ordered by smallest member
    let mut assigned = vec![false; set.len()];
    let mut children = Vec::new();
    for i in 0..set.len() {
        if assigned[i] {
            continue;
        }
        let mut class = Vec::new();
        for j in i..set.len() {
            if !assigned[j] && (j == i || d[set[i]][set[j]] < h) {
                assigned[j] = true;
                class.push(set[j]);
            }
        }
        children.push(build_node(d, &class, nodes));
    }
    nodes.push(DendroNode {
        height: h,
        children,
        leaf: None,
        size: set.len(),
    });
    nodes.len() - 1
}

/// Code that is equal for two dendrograms exactly when their ultrametrics
/// are isometric.
pub fn canonical_code(d: &Dendrogram) -> String {
    d.codes().swap_remove(d.root)
}

/// Distance-preserving bijection `X → Y` if one exists.
pub fn isometry(x: &Ultrametric, y: &Ultrametric) -> Result<Option<Vec<usize>>> {
    if x.len() != y.len() {
        return Ok(None);
    }
    if x.is_empty() {
        return Ok(Some(Vec::new()));
    }
    let (dx, dy) = (Dendrogram::new(x)?, Dendrogram::new(y)?);
    let (cx, cy) = (dx.codes(), dy.codes());
    if cx[dx.root] != cy[dy.root] {
        return Ok(None);
    }
    let mut map = vec![usize::MAX; x.len()];
    let mut stack = vec![(dx.root, dy.root)];
    while let Some((a, b)) = stack.pop() {
        if let (Some(la), Some(lb)) = (dx.nodes[a].leaf, dy.nodes[b].leaf) {
            map[la] = lb;
            continue;
        }
        let mut ka = dx.nodes[a].children.clone();
        let mut kb = dy.nodes[b].children.clone();
        ka.sort_by(|&i, &j| cx[i].cmp(&cx[j]));
        kb.sort_by(|&i, &j| cy[i].cmp(&cy[j]));
        stack.extend(ka.into_iter().zip(kb));
    }
    let n = x.len();
    for i in 0..n {
        for j in 0..n {
            if x.dist(i, j) != y.dist(map[i], map[j]) {
                return Ok(None);
            }
        }
    }
    Ok(Some(map))
}

/// Classes of `d ≤ t` with inherited distances. Classes are ordered by
/// their smallest member, which also serves as representative.
pub fn quotient(u: &Ultrametric, t: f64) -> Ultrametric {
    let n = u.len();
    let mut reps: Vec<usize> = Vec::new();
    let mut class_of = vec![usize::MAX; n];
    for i in 0..n {
        if class_of[i] != usize::MAX {
            continue;
        }
        let c = reps.len();
        reps.push(i);
        for j in i..n {
            if class_of[j] == usize::MAX && u.dist(i, j) <= t {
                class_of[j] = c;
            }
        }
    }
    let d = reps
        .iter()
        .map(|&a| reps.iter().map(|&b| u.dist(a, b)).collect())
        .collect();
    let mut q = Ultrametric::new_unchecked(d);
    q.provenance = u.provenance.clone();
    q
}

/// Maps every entry of both spaces onto a shared value grid in which values
/// within [`SPECTRUM_RTOL`] of each other collapse onto the smallest one.
fn snap_jointly(x: &Ultrametric, y: &Ultrametric) -> (Ultrametric, Ultrametric, Vec<f64>) {
    let mut all = distinct_values(&x.dmatrix);
    all.extend(distinct_values(&y.dmatrix));
    all.sort_by(f64::total_cmp);
    all.dedup();
    let mut rep = Vec::with_capacity(all.len());
    let mut grid: Vec<f64> = Vec::new();
    for (i, &v) in all.iter().enumerate() {
        let close = i > 0 && (v - all[i - 1]).abs() <= SPECTRUM_RTOL * v.abs().max(all[i - 1].abs());
        if !close {
            grid.push(v);
        }
        rep.push(*grid.last().unwrap());
    }
    let snap = |u: &Ultrametric| {
        let d = u
            .dmatrix
            .iter()
            .map(|row| {
                row.iter()
                    .map(|v| rep[all.binary_search_by(|a| a.total_cmp(v)).unwrap()])
                    .collect()
            })
            .collect();
        Ultrametric::new_unchecked(d)
    };
    (snap(x), snap(y), grid)
}

/// Gromov-Hausdorff ultrametric: the smallest scale at which the closed
/// quotients of both spaces are isometric.
pub fn ugh(x: &Ultrametric, y: &Ultrametric) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Undefined(format!(
            "u_GH between spaces of sizes {} and {}",
            x.len(),
            y.len()
        )));
    }
    let (xs, ys, mut grid) = snap_jointly(x, y);
    if grid.first() != Some(&0.0) {
        grid.insert(0, 0.0);
    }
    for &t in &grid {
        let qx = quotient(&xs, t);
        let qy = quotient(&ys, t);
        if qx.len() == qy.len()
            && canonical_code(&Dendrogram::new(&qx)?) == canonical_code(&Dendrogram::new(&qy)?)
        {
            return Ok(t);
        }
    }
    unreachable!("both quotients collapse to a point at the largest scale")
}

fn distortion(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        a.max(b)
    }
}

/// Exhaustive minimum of the ultrametric distortion over all correspondences
/// between two spaces of at most [`BRUTEFORCE_MAX`] points.
pub fn ugh_bruteforce(x: &Ultrametric, y: &Ultrametric) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::Undefined("u_GH against an empty space".into()));
    }
    if x.len() > BRUTEFORCE_MAX || y.len() > BRUTEFORCE_MAX {
        return Err(Error::TooLarge(format!(
            "brute-force u_GH supports at most {BRUTEFORCE_MAX} points per side, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    struct Search<'a> {
        x: &'a Ultrametric,
        y: &'a Ultrametric,
        pairs: Vec<(usize, usize)>,
        best: f64,
    }
    impl Search<'_> {
        fn go(&mut self, i: usize, covered: u32, cur: f64) {
            let m = self.y.len();
            if i == self.x.len() {
                if covered == (1 << m) - 1 && cur < self.best {
                    self.best = cur;
                }
                return;
            }
            for mask in 1u32..(1 << m) {
                let base = self.pairs.len();
                let mut worst = cur;
                for b in (0..m).filter(|b| mask & (1 << b) != 0) {
                    for k in 0..self.pairs.len() {
                        let (a2, b2) = self.pairs[k];
                        worst = worst.max(distortion(self.x.dist(i, a2), self.y.dist(b, b2)));
                    }
                    self.pairs.push((i, b));
                }
                if worst < self.best {
                    self.go(i + 1, covered | mask, worst);
                }
                self.pairs.truncate(base);
            }
        }
    }
    let mut s = Search {
        x,
        y,
        pairs: Vec::new(),
        best: f64::INFINITY,
    };
    s.go(0, 0, 0.0);
    Ok(s.best)
}
