use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::complex::{build_alpha, build_vr, SimplicialComplex};
use crate::ingest::PointCloud;

fn tri_points() -> Vec<[f64; 3]> {
    vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, 0.8, 0.0]]
}

fn hollow_triangle() -> SimplicialComplex {
    SimplicialComplex::from_maximal(tri_points(), &[vec![0, 1], vec![0, 2], vec![1, 2]]).unwrap()
}

fn filled_triangle() -> SimplicialComplex {
    SimplicialComplex::from_maximal(tri_points(), &[vec![0, 1, 2]]).unwrap()
}

fn path_graph() -> SimplicialComplex {
    SimplicialComplex::from_maximal(
        vec![[0.0; 3], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]],
        &[vec![0, 1], vec![1, 2]],
    )
    .unwrap()
}

/// Hollow triangle on 0,1,2 next to a hollow square on 3,4,5,6.
fn triangle_and_square() -> SimplicialComplex {
    let mut pts = tri_points();
    pts.extend([[5.0, 0.0, 0.0], [6.0, 0.0, 0.0], [6.0, 1.0, 0.0], [5.0, 1.0, 0.0]]);
    SimplicialComplex::from_maximal(
        pts,
        &[
            vec![0, 1],
            vec![0, 2],
            vec![1, 2],
            vec![3, 4],
            vec![4, 5],
            vec![5, 6],
            vec![3, 6],
        ],
    )
    .unwrap()
}

fn dense(rows: &[&[f64]]) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
}

fn random_vr(rng: &mut ChaCha8Rng, max_points: usize, p_max: usize) -> SimplicialComplex {
    let n = rng.gen_range(2..=max_points);
    let pts: Vec<[f64; 3]> = (0..n).map(|_| [rng.gen(), rng.gen(), rng.gen()]).collect();
    let threshold = rng.gen_range(0.2..1.2);
    build_vr(&PointCloud::new(pts), threshold, p_max).unwrap()
}

#[test]
fn hollow_triangle_boundary() {
    let b1 = boundary_matrix(&hollow_triangle(), 1).unwrap();
    let expected = dense(&[&[-1.0, -1.0, 0.0], &[1.0, 0.0, -1.0], &[0.0, 1.0, 1.0]]);
    assert_eq!(b1.to_dense(), expected);
}

#[test]
fn filled_triangle_boundary() {
    let k = filled_triangle();
    let b2 = boundary_matrix(&k, 2).unwrap();
    assert_eq!(b2.to_dense(), dense(&[&[1.0], &[-1.0], &[1.0]]));
    let b1 = boundary_matrix(&k, 1).unwrap();
    assert!(b1.composes_to_zero(&b2));
    let product = b1.to_dense() * b2.to_dense();
    assert!(product.iter().all(|&x| x == 0.0));
}

#[test]
fn boundary_out_of_range() {
    assert!(boundary_matrix(&hollow_triangle(), 0).is_err());
    assert!(boundary_matrix(&hollow_triangle(), 2).is_err());
}

#[test]
fn laplacian_fixtures() {
    let l0 = hodge_laplacian(&hollow_triangle(), 0).unwrap();
    assert_eq!(
        l0.matrix,
        dense(&[&[2.0, -1.0, -1.0], &[-1.0, 2.0, -1.0], &[-1.0, -1.0, 2.0]])
    );
    let l1 = hodge_laplacian(&filled_triangle(), 1).unwrap();
    assert_eq!(l1.matrix, DMatrix::identity(3, 3) * 3.0);
    let l1 = hodge_laplacian(&hollow_triangle(), 1).unwrap();
    assert_eq!(
        l1.matrix,
        dense(&[&[2.0, 1.0, -1.0], &[1.0, 2.0, 1.0], &[-1.0, 1.0, 2.0]])
    );
    assert!(hodge_laplacian(&hollow_triangle(), 2).is_err());
}

#[test]
fn adjacency_fixtures() {
    let a = adjacency_laplacian(&hollow_triangle(), 1).unwrap();
    assert_eq!(a.matrix, hodge_laplacian(&hollow_triangle(), 1).unwrap().matrix);
    assert!((0..3).all(|i| a.matrix[(i, i)] == 2.0));

    let a0 = adjacency_laplacian(&hollow_triangle(), 0).unwrap();
    assert_eq!(
        a0.matrix,
        dense(&[&[2.0, -1.0, -1.0], &[-1.0, 2.0, -1.0], &[-1.0, -1.0, 2.0]])
    );

    let af = adjacency_laplacian(&filled_triangle(), 1).unwrap();
    assert_eq!(af.matrix, DMatrix::identity(3, 3) * 3.0);
}

#[test]
fn spectrum_fixtures() {
    let s = spectrum(&hodge_laplacian(&filled_triangle(), 1).unwrap()).unwrap();
    for x in &s.eigenvalues {
        assert!((x - 3.0).abs() < 1e-12);
    }
    let s = spectrum(&hodge_laplacian(&path_graph(), 0).unwrap()).unwrap();
    for (x, e) in s.eigenvalues.iter().zip([0.0, 1.0, 3.0]) {
        assert!((x - e).abs() < 1e-12, "{x} vs {e}");
    }
    let zero = Laplacian {
        p: 0,
        matrix: DMatrix::zeros(4, 4),
    };
    assert!(spectrum(&zero).unwrap().eigenvalues.iter().all(|&x| x == 0.0));
}

#[test]
fn spectrum_rejects_asymmetric() {
    let mut m = DMatrix::identity(3, 3);
    m[(0, 1)] = 1e-6;
    assert!(matches!(
        spectrum(&Laplacian { p: 0, matrix: m }),
        Err(Error::NotSymmetric(_))
    ));
}

#[test]
fn hollow_triangle_generator() {
    let g = harmonic_generators(&hollow_triangle(), 1, Tolerance::Auto).unwrap();
    assert_eq!(g.len(), 1);
    let r = 1.0 / 3f64.sqrt();
    for (x, e) in g.vectors[0].iter().zip([r, -r, r]) {
        assert!((x - e).abs() < 1e-12);
    }
    assert_eq!(g.simplex_order, vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
    assert!(g.warnings.is_empty(), "{:?}", g.warnings);
}

#[test]
fn filled_triangle_has_no_generators() {
    let g = harmonic_generators(&filled_triangle(), 1, Tolerance::Auto).unwrap();
    assert!(g.is_empty());
}

#[test]
fn disjoint_cycles_have_disjoint_supports() {
    let k = triangle_and_square();
    let g = harmonic_generators(&k, 1, Tolerance::Auto).unwrap();
    assert_eq!(g.len(), 2);
    let support = |v: &Vec<f64>| -> Vec<usize> {
        (0..v.len()).filter(|&i| v[i].abs() > 1e-9).collect()
    };
    let (a, b) = (support(&g.vectors[0]), support(&g.vectors[1]));
    assert!(a.iter().all(|i| !b.contains(i)));
    let mut sizes = [a.len(), b.len()];
    sizes.sort();
    assert_eq!(sizes, [3, 4]);
}

#[test]
fn betti_fixtures() {
    assert_eq!(betti(&hollow_triangle(), 1).unwrap(), 1);
    assert_eq!(betti(&hollow_triangle(), 0).unwrap(), 1);
    assert_eq!(betti(&filled_triangle(), 1).unwrap(), 0);

    let two_edges = SimplicialComplex::from_maximal(
        vec![[0.0; 3], [1.0, 0.0, 0.0], [5.0, 0.0, 0.0], [6.0, 0.0, 0.0]],
        &[vec![0, 1], vec![2, 3]],
    )
    .unwrap();
    assert_eq!(betti(&two_edges, 0).unwrap(), 2);
}

#[test]
fn tetrahedral_shell() {
    let pts = vec![[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let shell = SimplicialComplex::from_maximal(
        pts,
        &[vec![0, 1, 2], vec![0, 1, 3], vec![0, 2, 3], vec![1, 2, 3]],
    )
    .unwrap();
    assert_eq!(betti(&shell, 2).unwrap(), 1);
    assert_eq!(betti(&shell, 1).unwrap(), 0);
    assert_eq!(betti(&shell, 0).unwrap(), 1);
}

#[test]
fn alpha_tetrahedron_sequence() {
    let s = 1.0 / 2f64.sqrt();
    let cloud = PointCloud::new(vec![
        [s, 0.0, 0.0],
        [0.0, s, 0.0],
        [0.0, 0.0, s],
        [s, s, s],
        [10.0, 9.0, 11.0],
    ]);
    let bettis = |t: f64| {
        let k = build_alpha(&cloud, t).unwrap();
        [betti(&k, 0).unwrap(), betti(&k, 1).unwrap(), betti(&k, 2).unwrap()]
    };
    // the far point is an isolated extra component at all three scales
    assert_eq!(bettis(0.55), [2, 3, 0]);
    assert_eq!(bettis(0.60), [2, 0, 1]);
    assert_eq!(bettis(0.62), [2, 0, 0]);
}

#[test]
fn fiedler_path() {
    let f = fiedler_vector(&path_graph()).unwrap();
    let r = 1.0 / 2f64.sqrt();
    for (x, e) in f.vector.iter().zip([r, 0.0, -r]) {
        assert!((x - e).abs() < 1e-12);
    }
    assert!((f.eigenvalue - 1.0).abs() < 1e-12);
    assert_eq!(f.partition(), (vec![0], vec![2]));
    assert!(f.warnings.is_empty());
}

#[test]
fn fiedler_disconnected() {
    let two_edges = SimplicialComplex::from_maximal(
        vec![[0.0; 3], [1.0, 0.0, 0.0], [5.0, 0.0, 0.0], [6.0, 0.0, 0.0]],
        &[vec![0, 1], vec![2, 3]],
    )
    .unwrap();
    assert!(matches!(fiedler_vector(&two_edges), Err(Error::Disconnected(2))));
}

#[test]
fn fiedler_complete_graph_is_degenerate() {
    let f = fiedler_vector(&hollow_triangle()).unwrap();
    assert!((f.eigenvalue - 3.0).abs() < 1e-12);
    assert_eq!(f.warnings.len(), 1);
    let norm: f64 = f.vector.iter().map(|x| x * x).sum();
    assert!((norm - 1.0).abs() < 1e-12);
    assert!(f.vector.iter().sum::<f64>().abs() < 1e-12);
}

#[test]
fn tolerance_parsing() {
    assert_eq!("auto".parse::<Tolerance>().unwrap(), Tolerance::Auto);
    assert_eq!("1e-6".parse::<Tolerance>().unwrap(), Tolerance::Fixed(1e-6));
    assert!("-1".parse::<Tolerance>().is_err());
}

#[test]
fn boundary_composition_vanishes_on_random_complexes() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let k = random_vr(&mut rng, 10, 3);
        for p in 1..k.max_dim() {
            let b = boundary_matrix(&k, p).unwrap();
            let next = boundary_matrix(&k, p + 1).unwrap();
            assert!(b.composes_to_zero(&next));
        }
    }
}

#[test]
fn laplacian_routes_agree_on_random_complexes() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let k = random_vr(&mut rng, 12, 2);
        for p in 0..=2 {
            let a = hodge_laplacian(&k, p).unwrap();
            let b = adjacency_laplacian(&k, p).unwrap();
            let diff = (&a.matrix - &b.matrix).abs().max();
            assert!(diff <= 1e-12 || a.size() == 0, "p={p}: {diff}");
        }
    }
}

/// Build L_p from boundary matrices whose simplex orientations were flipped by `signs`.
fn flipped_laplacian(k: &SimplicialComplex, p: usize, signs: &[Vec<f64>]) -> DMatrix<f64> {
    let flip = |b: &BoundaryMatrix| {
        let d = b.to_dense();
        DMatrix::from_fn(d.nrows(), d.ncols(), |i, j| {
            signs[b.p - 1][i] * d[(i, j)] * signs[b.p][j]
        })
    };
    let n = k.count(p);
    let mut l = DMatrix::zeros(n, n);
    if p > 0 {
        let b = flip(&boundary_matrix(k, p).unwrap());
        l += b.transpose() * &b;
    }
    if p < k.max_dim() {
        let b = flip(&boundary_matrix(k, p + 1).unwrap());
        l += &b * b.transpose();
    }
    l
}

#[test]
fn spectra_ignore_orientation() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..50 {
        let k = random_vr(&mut rng, 10, 2);
        let signs: Vec<Vec<f64>> = (0..=k.max_dim())
            .map(|p| {
                (0..k.count(p))
                    .map(|_| if rng.gen_bool(0.5) { 1.0 } else { -1.0 })
                    .collect()
            })
            .collect();
        for p in 0..=2 {
            let base = spectrum(&hodge_laplacian(&k, p).unwrap()).unwrap();
            let flipped = spectrum(&Laplacian {
                p,
                matrix: flipped_laplacian(&k, p, &signs),
            })
            .unwrap();
            for (x, y) in base.eigenvalues.iter().zip(&flipped.eigenvalues) {
                assert!((x - y).abs() <= 1e-9);
            }
        }
    }
}

#[test]
fn generator_invariants_on_random_complexes() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..60 {
        let k = random_vr(&mut rng, 12, 2);
        for p in 0..=2 {
            let g = harmonic_generators(&k, p, Tolerance::Auto).unwrap();
            assert_eq!(g.len(), betti(&k, p).unwrap());
            let l = hodge_laplacian(&k, p).unwrap();
            for (a, v) in g.vectors.iter().enumerate() {
                let norm: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!((norm - 1.0).abs() <= 1e-10);
                let lv: f64 = l.apply(v).iter().map(|x| x * x).sum::<f64>().sqrt();
                assert!(lv <= g.tolerance, "{lv} > {}", g.tolerance);
                let first = v.iter().find(|x| x.abs() > SIGN_EPS).unwrap();
                assert!(*first > 0.0);
                for w in &g.vectors[a + 1..] {
                    let d: f64 = v.iter().zip(w).map(|(x, y)| x * y).sum();
                    assert!(d.abs() <= 1e-10);
                }
                // orthogonal to coboundaries: B_p v = 0
                if p > 0 {
                    let bv = boundary_matrix(&k, p).unwrap().apply(v);
                    assert!(bv.iter().all(|x| x.abs() <= 1e-8));
                }
            }
        }
    }
}

#[test]
fn spectrum_residuals() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..30 {
        let k = random_vr(&mut rng, 12, 2);
        for p in 0..=2 {
            let l = hodge_laplacian(&k, p).unwrap();
            let s = spectrum(&l).unwrap();
            let scale = s.lambda_max().max(1.0);
            for i in 0..l.size() {
                let v = s.vector(i);
                let lv = l.apply(&v);
                let res: f64 = lv
                    .iter()
                    .zip(&v)
                    .map(|(a, b)| (a - s.eigenvalues[i] * b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                assert!(res <= 1e-8 * scale);
            }
            let gram = s.eigenvectors.transpose() * &s.eigenvectors;
            let dev = (gram - DMatrix::identity(l.size(), l.size())).abs().max();
            assert!(l.size() == 0 || dev <= 1e-8);
            assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            assert!(s.eigenvalues.first().map_or(true, |&x| x >= -1e-9 * scale));
        }
    }
}

#[test]
fn size_limit() {
    let pts: Vec<[f64; 3]> = (0..120).map(|i| [i as f64 * 0.01, 0.0, 0.0]).collect();
    let k = build_vr(&PointCloud::new(pts), 10.0, 1).unwrap();
    assert!(k.count(1) > MAX_SIMPLICES);
    assert!(matches!(hodge_laplacian(&k, 1), Err(Error::TooLarge(_))));
}
