use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::synthetic::{cubic_lattice, lattice_benchmark};
use super::*;
use crate::ultra::ugh_bruteforce;

fn vr(metric: MetricKind) -> StageSpec {
    StageSpec {
        kind: ComplexKind::Vr,
        metric,
        p: 1,
        kmax_dim: 2,
    }
}

fn square(side: f64, offset: [f64; 3]) -> Vec<[f64; 3]> {
    [[0.0, 0.0], [side, 0.0], [side, side], [0.0, side]]
        .iter()
        .map(|q| [q[0] + offset[0], q[1] + offset[1], offset[2]])
        .collect()
}

fn two_squares() -> PointCloud {
    let mut pts = square(1.0, [0.0, 0.0, 0.0]);
    pts.extend(square(1.0, [5.0, 0.3, 0.0]));
    PointCloud::new(pts).with_tag("two")
}

fn one_square() -> PointCloud {
    PointCloud::new(square(1.0, [0.0, 0.0, 0.0])).with_tag("one")
}

fn segment() -> PointCloud {
    PointCloud::new(vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]).with_tag("line")
}

/// Pair-counting form of the adjusted Rand index.
fn ari_by_pairs(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len();
    let (mut both, mut only_a, mut only_b, mut neither) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        for j in i + 1..n {
            match (a[i] == a[j], b[i] == b[j]) {
                (true, true) => both += 1.0,
                (true, false) => only_a += 1.0,
                (false, true) => only_b += 1.0,
                (false, false) => neither += 1.0,
            }
        }
    }
    let den = (both + only_a) * (only_a + neither) + (both + only_b) * (only_b + neither);
    if den == 0.0 {
        return 1.0;
    }
    2.0 * (both * neither - only_a * only_b) / den
}

fn same_partition(a: &[usize], b: &[usize]) -> bool {
    (0..a.len()).all(|i| (0..a.len()).all(|j| (a[i] == a[j]) == (b[i] == b[j])))
}

#[test]
fn ari_examples() {
    assert_eq!(ari(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap(), 1.0);
    assert_eq!(ari(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap(), -0.5);
    assert_eq!(ari(&[2, 0, 1, 1], &[2, 0, 1, 1]).unwrap(), 1.0);
    assert_eq!(ari(&["a", "a", "b", "b"], &[0, 0, 0, 0]).unwrap(), 0.0);
    assert!(ari(&[0, 1], &[0]).is_err());
    assert!(ari(&[0], &[0]).is_err());
}

proptest! {
    #[test]
    fn ari_agrees_with_pair_counting(
        a in prop::collection::vec(0usize..4, 2..30),
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let b: Vec<usize> = a.iter().map(|_| rng.gen_range(0..3)).collect();
        let got = ari(&a, &b).unwrap();
        prop_assert!((got - ari_by_pairs(&a, &b)).abs() <= 1e-12);
        prop_assert!(got <= 1.0 + 1e-12);
        prop_assert_eq!(got == 1.0, same_partition(&a, &b));
        let relabeled: Vec<usize> = b.iter().map(|x| 7 - x).collect();
        prop_assert_eq!(ari(&a, &relabeled).unwrap(), got);
    }
}

#[test]
fn kmeans_examples() {
    let blobs: Vec<Vec<f64>> = [0.0, 0.1, 0.2, 10.0, 10.1].iter().map(|&x| vec![x]).collect();
    let c = kmeans(&blobs, 2, 0, 10).unwrap();
    assert_eq!(&c.labels[..3], &[c.labels[0]; 3]);
    assert_eq!(c.labels[3], c.labels[4]);
    assert_ne!(c.labels[0], c.labels[3]);
    assert!((c.inertia - 0.025).abs() < 1e-12);

    let one = kmeans(&blobs, 1, 3, 2).unwrap();
    assert_eq!(one.labels, vec![0; 5]);

    let all = kmeans(&blobs, 5, 3, 2).unwrap();
    let mut sorted = all.labels.clone();
    sorted.sort_unstable();
    assert_eq!(sorted, vec![0, 1, 2, 3, 4]);
    assert_eq!(all.inertia, 0.0);

    assert!(matches!(kmeans(&blobs, 6, 0, 1), Err(Error::Config(_))));
    assert!(kmeans(&blobs, 0, 0, 1).is_err());
    assert!(kmeans(&blobs, 2, 0, 0).is_err());
}

#[test]
fn kmeans_is_deterministic_and_near_optimal() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..30 {
        let n = rng.gen_range(3..=9);
        let data: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.gen_range(0.0..5.0), rng.gen_range(0.0..5.0)]).collect();
        let a = kmeans(&data, 2, 11, 10).unwrap();
        assert_eq!(a, kmeans(&data, 2, 11, 10).unwrap());
        assert!(a.labels.iter().all(|&l| l < 2));
        // exhaustive optimum over all two-cluster splits
        let mut best = f64::INFINITY;
        for mask in 1u32..(1 << n) - 1 {
            let labels: Vec<usize> = (0..n).map(|i| (mask >> i & 1) as usize).collect();
            let mut cost = 0.0;
            for c in 0..2 {
                let members: Vec<&Vec<f64>> = data.iter().zip(&labels).filter(|(_, &l)| l == c).map(|(x, _)| x).collect();
                let m = members.len() as f64;
                let centre: Vec<f64> = (0..2).map(|d| members.iter().map(|x| x[d]).sum::<f64>() / m).collect();
                cost += members.iter().map(|x| (0..2).map(|d| (x[d] - centre[d]).powi(2)).sum::<f64>()).sum::<f64>();
            }
            best = best.min(cost);
        }
        assert!(a.inertia >= best - 1e-9);
    }
}

#[test]
fn kmeans_reseeds_empty_clusters() {
    // duplicated points force k-means++ to pick coincident centres
    let data = vec![vec![0.0], vec![0.0], vec![0.0], vec![1.0]];
    let c = kmeans(&data, 3, 0, 4).unwrap();
    let mut used = c.labels.clone();
    used.sort_unstable();
    used.dedup();
    assert_eq!(used.len(), 3);
}

#[test]
fn identical_structures_have_zero_ugh() {
    let m = ugh_matrix(&[two_squares(), two_squares()], 1.2, &vr(MetricKind::L1)).unwrap();
    assert_eq!(m.values, vec![vec![0.0, 0.0], vec![0.0, 0.0]]);
    assert_eq!(m.substituted(), 0);
}

#[test]
fn three_structures_shape() {
    let structures = [two_squares(), one_square(), two_squares().scaled(1.1)];
    let m = ugh_matrix(&structures, 1.2, &vr(MetricKind::Cocycle)).unwrap();
    assert_eq!(m.n(), 3);
    for i in 0..3 {
        assert_eq!(m.values[i][i], 0.0);
        for j in 0..3 {
            assert_eq!(m.values[i][j], m.values[j][i]);
        }
    }
    assert!(ugh_matrix(&structures[..1], 1.2, &vr(MetricKind::L1)).is_err());
}

#[test]
fn rescaled_cloud_doubles_wasserstein_ugh() {
    let spec = vr(MetricKind::Wasserstein);
    let a = two_squares();
    let b = a.scaled(2.0);
    let sa = structure_space(&filtered_complex(&a, &spec, 1.2).unwrap(), 1.2, &spec, "a").unwrap();
    let sb = structure_space(&filtered_complex(&b, &spec, 2.4).unwrap(), 2.4, &spec, "b").unwrap();
    let (ua, ub) = (&sa.ultrametric, &sb.ultrametric);
    assert_eq!((ua.len(), ub.len()), (2, 2));
    let d = ua.dist(0, 1);
    assert!(d > 4.0);
    assert!((ub.dist(0, 1) - 2.0 * d).abs() <= 1e-9);
    let m = assemble(&[ua, ub], 1.2, MetricKind::Wasserstein).unwrap();
    assert_eq!(m.values[0][1], ub.dist(0, 1));
    assert_eq!(m.values[0][1], ugh_bruteforce(ua, ub).unwrap());
}

#[test]
fn empty_spaces_get_the_largest_ok_value() {
    let structures = [two_squares(), one_square(), segment(), segment()];
    let m = ugh_matrix(&structures, 1.2, &vr(MetricKind::L1)).unwrap();
    let d = m.values[0][1];
    assert!(d > 0.0);
    assert_eq!(m.status[0][1], EntryStatus::Ok);
    for (i, j) in [(0, 2), (1, 3), (2, 3)] {
        assert_eq!(m.status[i][j], EntryStatus::EmptySpaceSubstituted);
    }
    assert_eq!(m.values[0][2], d);
    assert_eq!(m.values[1][3], d);
    assert_eq!(m.values[2][3], 0.0);
    assert_eq!(m.substituted(), 5);
}

#[test]
fn permuting_structures_permutes_the_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let structures: Vec<PointCloud> = [1.0, 1.05, 0.95, 1.1, 1.0]
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            let mut c = cubic_lattice(a, 3, 0.03, &mut rng).unwrap();
            c.frame_id = i;
            c
        })
        .collect();
    let spec = vr(MetricKind::L1);
    let m = ugh_matrix(&structures, 1.25, &spec).unwrap();
    let perm = [3, 0, 4, 2, 1];
    let shuffled: Vec<PointCloud> = perm.iter().map(|&i| structures[i].clone()).collect();
    let p = ugh_matrix(&shuffled, 1.25, &spec).unwrap();
    for i in 0..5 {
        for j in 0..5 {
            assert_eq!(p.values[i][j], m.values[perm[i]][perm[j]]);
        }
    }
    assert!(m.ok_violation() <= ULTRAMETRIC_TOL);
}

fn toy_matrix(n: usize, t: f64) -> UghMatrix {
    UghMatrix {
        threshold: t,
        metric: MetricKind::L1,
        values: (0..n).map(|i| (0..n).map(|j| (i as f64 - j as f64).abs() * t).collect()).collect(),
        status: vec![vec![EntryStatus::Ok; n]; n],
    }
}

#[test]
fn feature_matrix_shapes() {
    let f = feature_matrix(&[toy_matrix(6, 1.0), toy_matrix(6, 2.0)]).unwrap();
    assert_eq!(f.shape(), (6, 12));
    assert_eq!(f.rows[2][6..], toy_matrix(6, 2.0).values[2][..]);
    let single = feature_matrix(&[toy_matrix(4, 3.0)]).unwrap();
    assert_eq!(single.rows, toy_matrix(4, 3.0).values);
    assert!(feature_matrix(&[toy_matrix(4, 1.0), toy_matrix(5, 2.0)]).is_err());
    assert!(feature_matrix(&[toy_matrix(4, 1.0), toy_matrix(4, 1.0)]).is_err());
    assert!(feature_matrix(&[]).is_err());
}

#[test]
fn config_parsing() {
    let c = RunConfig::from_json(r#"{"inputs": "data", "k": 3}"#).unwrap();
    assert_eq!(c.kind, ComplexKind::Alpha);
    assert_eq!(c.thresholds, DEFAULT_THRESHOLDS.to_vec());
    assert_eq!(c.metric, MetricKind::L1);
    assert_eq!((c.p, c.kmax_dim, c.seed, c.restarts), (1, 2, 0, 10));
    assert_eq!(c, RunConfig::new(Inputs::One("data".into()), 3));

    let c = RunConfig::from_json(
        r#"{"inputs": ["a.xyz", "b"], "kind": "vr", "thresholds": [1.5], "metric": "wasserstein",
            "p": 1, "kmax_dim": 3, "k": 2, "seed": 4, "restarts": 2, "jitter": "0.01,9"}"#,
    )
    .unwrap();
    assert_eq!(c.inputs.paths(), vec!["a.xyz", "b"]);
    assert_eq!(c.jitter, Some(Jitter { sigma: 0.01, seed: 9 }));
    let c = RunConfig::from_json(r#"{"k": 2, "jitter": {"sigma": 0.5, "seed": 1}}"#).unwrap();
    assert_eq!(c.jitter, Some(Jitter { sigma: 0.5, seed: 1 }));

    for bad in [
        r#"{"k": 2, "colour": 1}"#,
        r#"{"inputs": "x"}"#,
        r#"{"k": 2, "thresholds": []}"#,
        r#"{"k": 2, "thresholds": [1, 1]}"#,
        r#"{"k": 2, "p": 3, "kmax_dim": 2}"#,
        r#"{"k": 0}"#,
        r#"{"k": 2, "metric": "l7"}"#,
        r#"{"k": 2, "jitter": "abc"}"#,
        "not json",
    ] {
        assert!(matches!(RunConfig::from_json(bad), Err(Error::Config(_))), "{bad}");
    }
}

fn small_benchmark() -> Vec<PointCloud> {
    lattice_benchmark(&[1.0, 1.3], 4, 0.03, 5)
        .unwrap()
        .into_iter()
        .flat_map(|s| s.frames)
        .collect()
}

fn small_config(k: usize) -> RunConfig {
    let mut c = RunConfig::new(Inputs::default(), k);
    c.kind = ComplexKind::Vr;
    c.thresholds = vec![1.2, 1.5];
    c.restarts = 3;
    c
}

#[test]
fn run_on_memory_structures() {
    let run = run_clouds(&small_config(2), small_benchmark()).unwrap();
    assert_eq!(run.features.shape(), (8, 16));
    assert_eq!(run.matrices.len(), 2);
    assert_eq!(run.ids[0], "a1#0");
    assert_eq!(run.report.thresholds[0].generators.len(), 8);
    assert!(run.ari.is_some());

    let single = run_clouds(&small_config(1), small_benchmark()).unwrap();
    assert_eq!(single.ari, Some(0.0));

    let mut cfg = small_config(2);
    cfg.evaluate = false;
    assert_eq!(run_clouds(&cfg, small_benchmark()).unwrap().ari, None);
    assert!(matches!(run_clouds(&small_config(9), small_benchmark()), Err(Error::Config(_))));
}

#[test]
fn outputs_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small_config(2);
    cfg.jitter = Some(Jitter { sigma: 0.01, seed: 3 });
    let a = run_clouds(&cfg, small_benchmark()).unwrap();
    let written = a.write(&dir.path().join("a")).unwrap();
    let b = run_clouds(&cfg, small_benchmark()).unwrap();
    b.write(&dir.path().join("b")).unwrap();
    let names: Vec<String> = written
        .iter()
        .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, ["ugh_t1.2.csv", "ugh_t1.5.csv", "features.csv", "labels.csv", "report.json"]);
    for name in names.iter().filter(|n| n.ends_with(".csv")) {
        let x = std::fs::read(dir.path().join("a").join(name)).unwrap();
        let y = std::fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(x, y, "{name}");
    }
    let labels = std::fs::read_to_string(dir.path().join("a/labels.csv")).unwrap();
    assert!(labels.starts_with("id,group,cluster\na1#0,a1,"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("a/report.json")).unwrap()).unwrap();
    assert_eq!(report["feature_shape"], serde_json::json!([8, 16]));
}

#[test]
fn run_from_files() {
    let dir = tempfile::tempdir().unwrap();
    for set in lattice_benchmark(&[1.0, 1.3], 3, 0.03, 2).unwrap() {
        std::fs::write(dir.path().join(format!("{}.xyz", set.group_label)), crate::ingest::to_xyz(&set)).unwrap();
    }
    let mut cfg = small_config(2);
    cfg.inputs = Inputs::One(".".into());
    let run = run_pipeline(&cfg, dir.path()).unwrap();
    assert_eq!(run.ids.len(), 6);
    // "a1.3.xyz" sorts before "a1.xyz"
    assert_eq!(run.groups[0], "a1.3");
    assert_eq!(run.groups[5], "a1");

    cfg.inputs = Inputs::One("missing".into());
    assert!(matches!(run_pipeline(&cfg, dir.path()), Err(Error::Config(_))));
}
