//! Incremental (Bowyer–Watson) Delaunay tetrahedralization.
//!
//! The convex hull is closed off with "ghost" tetrahedra sharing a symbolic
//! vertex at infinity, so no bounding super-tetrahedron is needed and hull
//! tetrahedra are never lost. Points are inserted in index order, which
//! makes the output deterministic for a given input.

use std::cmp::Ordering;
use std::collections::HashMap;

use robust::Coord;

use super::predicates::{in_sphere, orient};
use crate::error::{Error, Result};

const INF: usize = usize::MAX;

#[derive(Debug, Clone, Copy)]
struct Tet {
    v: [usize; 4],
    alive: bool,
}

impl Tet {
    fn is_ghost(&self) -> bool {
        self.v.contains(&INF)
    }

    fn face_key(&self, skip: usize) -> [usize; 3] {
        let mut k = [0; 3];
        let mut at = 0;
        for (i, &v) in self.v.iter().enumerate() {
            if i != skip {
                k[at] = v;
                at += 1;
            }
        }
        k.sort_unstable();
        k
    }
}

struct Mesh<'a> {
    pts: &'a [[f64; 3]],
    tets: Vec<Tet>,
    faces: HashMap<[usize; 3], Vec<usize>>,
}

impl<'a> Mesh<'a> {
    fn add(&mut self, v: [usize; 4]) -> usize {
        let id = self.tets.len();
        self.tets.push(Tet { v, alive: true });
        for i in 0..4 {
            let key = self.tets[id].face_key(i);
            self.faces.entry(key).or_default().push(id);
        }
        id
    }

    fn kill(&mut self, id: usize) {
        self.tets[id].alive = false;
        for i in 0..4 {
            let key = self.tets[id].face_key(i);
            if let Some(list) = self.faces.get_mut(&key) {
                list.retain(|&t| t != id);
                if list.is_empty() {
                    self.faces.remove(&key);
                }
            }
        }
    }

    /// The other live tetrahedron sharing face `skip` of `id`.
    fn neighbor(&self, id: usize, skip: usize) -> Option<usize> {
        let key = self.tets[id].face_key(skip);
        self.faces
            .get(&key)
            .and_then(|l| l.iter().copied().find(|&t| t != id))
    }

    fn pt(&self, v: usize) -> &[f64; 3] {
        &self.pts[v]
    }

    /// Orientation of `tet` with the vertex at `slot` replaced by point `q`.
    fn orient_with(&self, tet: &[usize; 4], slot: usize, q: usize) -> Ordering {
        let mut v = *tet;
        v[slot] = q;
        orient(self.pt(v[0]), self.pt(v[1]), self.pt(v[2]), self.pt(v[3]))
    }

    fn finite_conflict(&self, id: usize, q: usize) -> bool {
        let v = self.tets[id].v;
        in_sphere(
            self.pt(v[0]),
            self.pt(v[1]),
            self.pt(v[2]),
            self.pt(v[3]),
            self.pt(q),
        ) == Ordering::Greater
    }

    fn conflicts(&self, q: usize) -> Vec<bool> {
        let mut hit = vec![false; self.tets.len()];
        for (id, t) in self.tets.iter().enumerate() {
            if t.alive && !t.is_ghost() {
                hit[id] = self.finite_conflict(id, q);
            }
        }
        for (id, t) in self.tets.iter().enumerate() {
            if !t.alive || !t.is_ghost() {
                continue;
            }
            let slot = t.v.iter().position(|&v| v == INF).expect("ghost");
            hit[id] = match self.orient_with(&t.v, slot, q) {
                Ordering::Greater => true,
                Ordering::Less => false,
                // Coplanar with the hull facet: conflict iff inside its circumcircle,
                // which is what the finite tetrahedron behind the facet reports.
                Ordering::Equal => self
                    .neighbor(id, slot)
                    .map(|n| hit[n])
                    .unwrap_or(false),
            };
        }
        hit
    }

    fn collinear(&self, a: usize, b: usize, c: usize) -> bool {
        let (p, q, r) = (self.pt(a), self.pt(b), self.pt(c));
        let proj = |i: usize, j: usize| {
            robust::orient2d(
                Coord { x: p[i], y: p[j] },
                Coord { x: q[i], y: q[j] },
                Coord { x: r[i], y: r[j] },
            )
        };
        proj(0, 1) == 0.0 && proj(1, 2) == 0.0 && proj(0, 2) == 0.0
    }

    /// New cell created from boundary face `skip` of conflict tet `id`; `false` if it would be flat.
    fn valid_replacement(&self, id: usize, skip: usize, q: usize) -> bool {
        let t = &self.tets[id].v;
        let mut v = *t;
        v[skip] = q;
        match v.iter().position(|&x| x == INF) {
            None => self.orient_with(t, skip, q) == Ordering::Greater,
            Some(inf) => {
                let f: Vec<usize> = (0..4).filter(|&i| i != inf).map(|i| v[i]).collect();
                !self.collinear(f[0], f[1], f[2])
            }
        }
    }

    fn insert(&mut self, q: usize) -> Result<()> {
        let mut hit = self.conflicts(q);
        let mut rounds = 0;
        let boundary = loop {
            let mut boundary = Vec::new();
            let mut grow = Vec::new();
            for id in 0..self.tets.len() {
                if !hit[id] {
                    continue;
                }
                for skip in 0..4 {
                    match self.neighbor(id, skip) {
                        Some(n) if hit[n] => {}
                        n => {
                            if self.valid_replacement(id, skip, q) {
                                boundary.push((id, skip));
                            } else if let Some(n) = n {
                                grow.push(n);
                            } else {
                                return Err(Error::Degenerate(
                                    "broken adjacency during Delaunay insertion".into(),
                                ));
                            }
                        }
                    }
                }
            }
            if grow.is_empty() {
                break boundary;
            }
            for n in grow {
                hit[n] = true;
            }
            rounds += 1;
            if rounds > 64 {
                return Err(Error::Degenerate(format!(
                    "cannot resolve degenerate configuration at point {q}; try --jitter"
                )));
            }
        };
        if boundary.is_empty() {
            return Err(Error::Degenerate(format!("point {q} has an empty cavity")));
        }

        let new_cells: Vec<[usize; 4]> = boundary
            .iter()
            .map(|&(id, skip)| {
                let mut v = self.tets[id].v;
                v[skip] = q;
                v
            })
            .collect();
        for id in 0..hit.len() {
            if hit[id] {
                self.kill(id);
            }
        }
        for v in new_cells {
            self.add(v);
        }
        Ok(())
    }

    fn check(&self) -> Result<()> {
        for (key, list) in &self.faces {
            if list.len() != 2 {
                return Err(Error::Degenerate(format!(
                    "face {key:?} is shared by {} cells",
                    list.len()
                )));
            }
        }
        for t in self.tets.iter().filter(|t| t.alive && !t.is_ghost()) {
            if orient(self.pt(t.v[0]), self.pt(t.v[1]), self.pt(t.v[2]), self.pt(t.v[3]))
                != Ordering::Greater
            {
                return Err(Error::Degenerate(format!("flat tetrahedron {:?}", t.v)));
            }
        }
        Ok(())
    }
}

fn initial_simplex(pts: &[[f64; 3]]) -> Result<[usize; 4]> {
    let d2 = |a: &[f64; 3], b: &[f64; 3]| super::geometry::dist2(a, b);
    let a = 0;
    let b = (1..pts.len())
        .max_by(|&i, &j| d2(&pts[a], &pts[i]).total_cmp(&d2(&pts[a], &pts[j])))
        .expect("at least two points");
    let cross_norm = |i: usize| {
        let u = [
            pts[b][0] - pts[a][0],
            pts[b][1] - pts[a][1],
            pts[b][2] - pts[a][2],
        ];
        let v = [
            pts[i][0] - pts[a][0],
            pts[i][1] - pts[a][1],
            pts[i][2] - pts[a][2],
        ];
        let w = [
            u[1] * v[2] - u[2] * v[1],
            u[2] * v[0] - u[0] * v[2],
            u[0] * v[1] - u[1] * v[0],
        ];
        w[0] * w[0] + w[1] * w[1] + w[2] * w[2]
    };
    let c = (0..pts.len())
        .filter(|&i| i != a && i != b)
        .max_by(|&i, &j| cross_norm(i).total_cmp(&cross_norm(j)))
        .expect("at least three points");
    if cross_norm(c) == 0.0 {
        return Err(Error::Degenerate(
            "all points are collinear; use a Vietoris-Rips complex instead".into(),
        ));
    }
    let d = (0..pts.len())
        .filter(|&i| i != a && i != b && i != c)
        .find(|&i| orient(&pts[a], &pts[b], &pts[c], &pts[i]) != Ordering::Equal)
        .ok_or_else(|| {
            Error::Degenerate(
                "all points are coplanar; use a Vietoris-Rips complex instead".into(),
            )
        })?;
    if orient(&pts[a], &pts[b], &pts[c], &pts[d]) == Ordering::Greater {
        Ok([a, b, c, d])
    } else {
        Ok([b, a, c, d])
    }
}

/// Delaunay tetrahedra of `pts` as ascending vertex quadruples, sorted.
pub(crate) fn tetrahedralize(pts: &[[f64; 3]]) -> Result<Vec<[usize; 4]>> {
    if pts.len() < 5 {
        return Err(Error::Degenerate(format!(
            "Delaunay tetrahedralization needs at least 5 points, got {}",
            pts.len()
        )));
    }
    let first = initial_simplex(pts)?;
    let mut mesh = Mesh {
        pts,
        tets: Vec::new(),
        faces: HashMap::new(),
    };
    mesh.add(first);
    // One ghost per hull facet; swapping two finite vertices flips the
    // orientation so the vertex at infinity lies outside.
    for skip in 0..4 {
        let mut v = first;
        v[skip] = INF;
        let finite: Vec<usize> = (0..4).filter(|&i| i != skip).collect();
        v.swap(finite[0], finite[1]);
        mesh.add(v);
    }

    for q in 0..pts.len() {
        if first.contains(&q) {
            continue;
        }
        mesh.insert(q)?;
    }
    mesh.check()?;

    let mut out: Vec<[usize; 4]> = mesh
        .tets
        .iter()
        .filter(|t| t.alive && !t.is_ghost())
        .map(|t| {
            let mut v = t.v;
            v.sort_unstable();
            v
        })
        .collect();
    out.sort_unstable();
    Ok(out)
}
