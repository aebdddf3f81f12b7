//! Boundary matrices, combinatorial Hodge Laplacians and their spectra.
//!
//! Harmonic generators (unit vectors of ker L_p) are indexed exactly like
//! the p-simplices of the complex they came from.

mod rank;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::complex::SimplicialComplex;
use crate::error::{Error, Result};

/// Dense eigensolves beyond this many simplices are refused.
pub const MAX_SIMPLICES: usize = 4000;

/// Entries at or below this magnitude are ignored by the sign rule.
pub const SIGN_EPS: f64 = 1e-12;

/// Sparse signed incidence matrix from p-simplices (columns) to their
/// (p−1)-faces (rows).
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMatrix {
    pub p: usize,
    pub rows: usize,
    /// Column j lists `(row, ±1)` for the faces of the j-th p-simplex.
    pub columns: Vec<Vec<(usize, i8)>>,
}

impl BoundaryMatrix {
    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols());
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, s) in col {
                m[(i, j)] = s as f64;
            }
        }
        m
    }

    pub fn to_dense_i64(&self) -> Vec<Vec<i64>> {
        let mut m = vec![vec![0i64; self.cols()]; self.rows];
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, s) in col {
                m[i][j] = s as i64;
            }
        }
        m
    }

    /// Exact integer check that `self · next` vanishes.
    pub fn composes_to_zero(&self, next: &BoundaryMatrix) -> bool {
        if next.rows != self.cols() {
            return false;
        }
        next.columns.iter().all(|col| {
            let mut acc = vec![0i64; self.rows];
            for &(k, s) in col {
                for &(i, t) in &self.columns[k] {
                    acc[i] += s as i64 * t as i64;
                }
            }
            acc.iter().all(|&x| x == 0)
        })
    }

    /// Exact rank over the rationals (computed modulo a large prime).
    pub fn rank(&self) -> usize {
        rank::rank_mod_p(self)
    }

    /// Multiply `self · v` for a dense vector over the columns.
    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for (j, col) in self.columns.iter().enumerate() {
            for &(i, s) in col {
                out[i] += s as f64 * v[j];
            }
        }
        out
    }
}

fn boundary_unchecked(k: &SimplicialComplex, p: usize) -> BoundaryMatrix {
    let rows = k.count(p - 1);
    let columns = k
        .simplices(p)
        .iter()
        .map(|s| {
            let mut col: Vec<(usize, i8)> = s
                .boundary()
                .map(|(face, sign)| {
                    let i = k.index_of(&face).expect("complex is downward closed");
                    (i, sign)
                })
                .collect();
            col.sort_unstable_by_key(|e| e.0);
            col
        })
        .collect();
    BoundaryMatrix { p, rows, columns }
}

/// The p-th boundary matrix, `1 ≤ p ≤ max_dim`.
pub fn boundary_matrix(k: &SimplicialComplex, p: usize) -> Result<BoundaryMatrix> {
    if p == 0 || p > k.max_dim() {
        return Err(Error::Config(format!(
            "boundary matrix B_{p} undefined for a complex of dimension {}",
            k.max_dim()
        )));
    }
    Ok(boundary_unchecked(k, p))
}

/// B_{p+1}, or an empty n_p × 0 matrix past the top dimension.
fn up_boundary(k: &SimplicialComplex, p: usize) -> BoundaryMatrix {
    if p < k.max_dim() {
        boundary_unchecked(k, p + 1)
    } else {
        BoundaryMatrix {
            p: p + 1,
            rows: k.count(p),
            columns: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Laplacian {
    pub p: usize,
    pub matrix: DMatrix<f64>,
}

impl Laplacian {
    pub fn size(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        let x = nalgebra::DVector::from_column_slice(v);
        (&self.matrix * x).iter().copied().collect()
    }
}

fn check_p(k: &SimplicialComplex, p: usize) -> Result<()> {
    if p > k.max_dim() {
        return Err(Error::Config(format!(
            "Laplacian L_{p} undefined for a complex of dimension {}",
            k.max_dim()
        )));
    }
    if k.count(p) > MAX_SIMPLICES {
        return Err(Error::TooLarge(format!(
            "{} simplices in dimension {p} (limit {MAX_SIMPLICES})",
            k.count(p)
        )));
    }
    Ok(())
}

/// L_p = B_pᵀB_p + B_{p+1}B_{p+1}ᵀ, with the missing term dropped at p = 0
/// and at the top dimension.
pub fn hodge_laplacian(k: &SimplicialComplex, p: usize) -> Result<Laplacian> {
    check_p(k, p)?;
    let n = k.count(p);
    let mut m = DMatrix::<f64>::zeros(n, n);

    if p > 0 {
        // down part: pairs of p-simplices sharing a row of B_p
        let b = boundary_unchecked(k, p);
        let mut by_row: Vec<Vec<(usize, i8)>> = vec![Vec::new(); b.rows];
        for (j, col) in b.columns.iter().enumerate() {
            for &(i, s) in col {
                by_row[i].push((j, s));
            }
        }
        for row in &by_row {
            for &(a, sa) in row {
                for &(c, sc) in row {
                    m[(a, c)] += (sa * sc) as f64;
                }
            }
        }
    }
    let up = up_boundary(k, p);
    for col in &up.columns {
        for &(a, sa) in col {
            for &(c, sc) in col {
                m[(a, c)] += (sa * sc) as f64;
            }
        }
    }
    Ok(Laplacian { p, matrix: m })
}

/// The same Laplacian assembled entry by entry from upper degrees and
/// upper/lower adjacency with relative orientation. Kept as an independent
/// cross-check of [`hodge_laplacian`].
pub fn adjacency_laplacian(k: &SimplicialComplex, p: usize) -> Result<Laplacian> {
    check_p(k, p)?;
    let list = k.simplices(p);
    let n = list.len();
    let upper = |a: &[usize], b: &[usize]| -> bool {
        let mut u: Vec<usize> = a.iter().chain(b).copied().collect();
        u.sort_unstable();
        u.dedup();
        u.len() == p + 2 && k.contains(&u)
    };
    let mut m = DMatrix::<f64>::zeros(n, n);
    let degree: Vec<usize> = k.cofaces(p).iter().map(Vec::len).collect();
    for i in 0..n {
        let si = &list[i].vertices;
        m[(i, i)] = if p == 0 {
            degree[i] as f64
        } else {
            (degree[i] + p + 1) as f64
        };
        for j in 0..n {
            if i == j {
                continue;
            }
            let sj = &list[j].vertices;
            if p == 0 {
                if upper(si, sj) {
                    m[(i, j)] = -1.0;
                }
                continue;
            }
            let common: Vec<usize> = si.iter().filter(|v| sj.contains(v)).copied().collect();
            if common.len() != p || upper(si, sj) {
                continue;
            }
            // orientation each simplex induces on the shared face
            let induced = |s: &[usize]| -> i32 {
                let pos = s.iter().position(|v| !common.contains(v)).expect("one extra vertex");
                if pos % 2 == 0 {
                    1
                } else {
                    -1
                }
            };
            m[(i, j)] = (induced(si) * induced(sj)) as f64;
        }
    }
    Ok(Laplacian { p, matrix: m })
}

#[derive(Debug, Clone)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column i pairs with `eigenvalues[i]`; orthonormal.
    pub eigenvectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn vector(&self, i: usize) -> Vec<f64> {
        self.eigenvectors.column(i).iter().copied().collect()
    }
}

fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Connected blocks of the sparsity pattern; the matrix is block diagonal
/// after permuting each block's indices together.
fn blocks(m: &DMatrix<f64>) -> Vec<Vec<usize>> {
    let n = m.nrows();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut block = vec![start];
        let mut at = 0;
        while at < block.len() {
            let i = block[at];
            at += 1;
            for j in 0..n {
                if !seen[j] && (m[(i, j)] != 0.0 || m[(j, i)] != 0.0) {
                    seen[j] = true;
                    block.push(j);
                }
            }
        }
        block.sort_unstable();
        out.push(block);
    }
    out
}

/// Flip `v` so its first significant entry is positive.
pub fn fix_sign(v: &mut [f64]) {
    if let Some(first) = v.iter().find(|x| x.abs() > SIGN_EPS) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Full symmetric eigendecomposition, eigenvalues ascending.
///
/// Decoupled blocks of the matrix are solved separately, so every
/// eigenvector is supported on a single block.
pub fn spectrum(l: &Laplacian) -> Result<Spectrum> {
    let m = &l.matrix;
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::Shape(format!("{}x{} matrix is not square", n, m.ncols())));
    }
    if n > MAX_SIMPLICES {
        return Err(Error::TooLarge(format!("{n}x{n} Laplacian (limit {MAX_SIMPLICES})")));
    }
    let asym = max_asymmetry(m);
    if asym > 1e-12 {
        return Err(Error::NotSymmetric(asym));
    }

    let mut pairs: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n);
    for block in blocks(m) {
        let b = block.len();
        let sub = DMatrix::from_fn(b, b, |r, c| {
            0.5 * (m[(block[r], block[c])] + m[(block[c], block[r])])
        });
        let eig = SymmetricEigen::new(sub);
        for (t, &lambda) in eig.eigenvalues.iter().enumerate() {
            let mut v = vec![0.0; n];
            for (r, &row) in block.iter().enumerate() {
                v[row] = eig.eigenvectors[(r, t)];
            }
            fix_sign(&mut v);
            pairs.push((lambda, v));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| lex_cmp(&a.1, &b.1)));

    let mut vectors = DMatrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (i, (lambda, v)) in pairs.into_iter().enumerate() {
        values.push(lambda);
        vectors.set_column(i, &nalgebra::DVector::from_vec(v));
    }
    Ok(Spectrum {
        eigenvalues: values,
        eigenvectors: vectors,
    })
}

fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    a.len().cmp(&b.len())
}

/// Default zero-eigenvalue tolerance 1e-8·max(1, λ_max).
pub fn default_tolerance(lambda_max: f64) -> f64 {
    1e-8 * lambda_max.max(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tolerance {
    Auto,
    Fixed(f64),
}

impl Tolerance {
    fn resolve(self, lambda_max: f64) -> f64 {
        match self {
            Tolerance::Auto => default_tolerance(lambda_max),
            Tolerance::Fixed(t) => t,
        }
    }
}

impl std::str::FromStr for Tolerance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Tolerance::Auto);
        }
        match s.parse::<f64>() {
            Ok(t) if t > 0.0 && t.is_finite() => Ok(Tolerance::Fixed(t)),
            _ => Err(Error::Config(format!("tolerance must be 'auto' or positive, got '{s}'"))),
        }
    }
}

/// Exact β_p = n_p − rank B_p − rank B_{p+1}.
pub fn betti_exact(k: &SimplicialComplex, p: usize) -> Result<usize> {
    if p > k.max_dim() {
        return Err(Error::Config(format!(
            "beta_{p} undefined for a complex of dimension {}",
            k.max_dim()
        )));
    }
    let down = if p > 0 { boundary_unchecked(k, p).rank() } else { 0 };
    let up = up_boundary(k, p).rank();
    Ok(k.count(p) - down - up)
}

/// β_p from both the Laplacian kernel (default tolerance) and exact ranks;
/// disagreement is reported as an error.
pub fn betti(k: &SimplicialComplex, p: usize) -> Result<usize> {
    let exact = betti_exact(k, p)?;
    let l = hodge_laplacian(k, p)?;
    let spec = spectrum(&l)?;
    let tau = default_tolerance(spec.lambda_max());
    let spectral = spec.eigenvalues.iter().filter(|&&x| x < tau).count();
    if spectral != exact {
        return Err(Error::BettiMismatch {
            p,
            spectral,
            exact,
        });
    }
    Ok(exact)
}

/// Orthonormal harmonic representatives of H^p(K).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorSet {
    pub p: usize,
    /// Unit vectors indexed like `simplex_order`.
    pub vectors: Vec<Vec<f64>>,
    pub simplex_order: Vec<Vec<usize>>,
    pub tolerance: f64,
    pub lambda_max: f64,
    /// Eigenvalues of the kernel candidates, in emission order.
    pub kernel_eigenvalues: Vec<f64>,
    /// Smallest eigenvalue above the kernel, if any.
    pub spectral_gap: Option<f64>,
    pub warnings: Vec<String>,
}

impl GeneratorSet {
    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Harmonic p-cochains: an orthonormal basis of ker L_p.
///
/// The basis is made reproducible by ordering kernel eigenvectors by
/// (eigenvalue, entries), re-orthonormalizing them in that order and
/// applying the sign rule. The count always equals the exact β_p; a
/// disagreement with the spectral count, or eigenvalues close to the
/// tolerance, is recorded in `warnings`.
pub fn harmonic_generators(k: &SimplicialComplex, p: usize, tol: Tolerance) -> Result<GeneratorSet> {
    let l = hodge_laplacian(k, p)?;
    let spec = spectrum(&l)?;
    let lambda_max = spec.lambda_max();
    let tau = tol.resolve(lambda_max);
    let exact = betti_exact(k, p)?;
    let spectral = spec.eigenvalues.iter().filter(|&&x| x < tau).count();

    let mut warnings = Vec::new();
    if spectral != exact {
        warnings.push(format!(
            "spectral kernel dimension {spectral} differs from rank-based beta_{p} = {exact}; using {exact}"
        ));
    }
    if spec
        .eigenvalues
        .iter()
        .any(|&x| x >= tau / 10.0 && x <= tau * 10.0)
    {
        warnings.push(format!(
            "eigenvalue within a decade of the tolerance {tau:e}; kernel boundary is ambiguous"
        ));
    }

    let mut candidates: Vec<(f64, Vec<f64>)> =
        (0..exact).map(|i| (spec.eigenvalues[i], spec.vector(i))).collect();
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| lex_cmp(&a.1, &b.1)));

    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(exact);
    let mut kernel_eigenvalues = Vec::with_capacity(exact);
    for (lambda, mut v) in candidates {
        // two passes of modified Gram-Schmidt
        for _ in 0..2 {
            for u in &vectors {
                let c = dot(&v, u);
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= c * y);
            }
        }
        if normalize(&mut v) == 0.0 {
            return Err(Error::Degenerate("kernel basis collapsed".into()));
        }
        fix_sign(&mut v);
        vectors.push(v);
        kernel_eigenvalues.push(lambda);
    }

    Ok(GeneratorSet {
        p,
        vectors,
        simplex_order: k.simplices(p).iter().map(|s| s.vertices.clone()).collect(),
        tolerance: tau,
        lambda_max,
        kernel_eigenvalues,
        spectral_gap: spec.eigenvalues.get(exact).copied(),
        warnings,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Fiedler {
    pub vector: Vec<f64>,
    pub eigenvalue: f64,
    pub warnings: Vec<String>,
}

impl Fiedler {
    /// Vertices with positive / negative entries; near-zero entries sit on the cut.
    pub fn partition(&self) -> (Vec<usize>, Vec<usize>) {
        let pos = (0..self.vector.len()).filter(|&i| self.vector[i] > SIGN_EPS).collect();
        let neg = (0..self.vector.len()).filter(|&i| self.vector[i] < -SIGN_EPS).collect();
        (pos, neg)
    }
}

/// Eigenvector of L_0 for the smallest nonzero eigenvalue.
pub fn fiedler_vector(k: &SimplicialComplex) -> Result<Fiedler> {
    let beta0 = betti_exact(k, 0)?;
    if beta0 != 1 {
        return Err(Error::Disconnected(beta0));
    }
    let l = hodge_laplacian(k, 0)?;
    let spec = spectrum(&l)?;
    let tau = default_tolerance(spec.lambda_max());
    let i = spec
        .eigenvalues
        .iter()
        .position(|&x| x > tau)
        .ok_or_else(|| Error::Degenerate("no nonzero eigenvalue (single vertex?)".into()))?;
    let eigenvalue = spec.eigenvalues[i];
    let mut warnings = Vec::new();
    if let Some(&next) = spec.eigenvalues.get(i + 1) {
        if (next - eigenvalue).abs() <= tau.max(1e-8 * eigenvalue) {
            warnings.push(format!(
                "degenerate Fiedler eigenvalue {eigenvalue}: multiplicity > 1, vector is not unique"
            ));
        }
    }
    let mut vector = spec.vector(i);
    fix_sign(&mut vector);
    Ok(Fiedler {
        vector,
        eigenvalue,
        warnings,
    })
}

#[cfg(test)]
mod tests;
