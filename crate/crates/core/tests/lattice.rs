use cohomgh::pipeline::synthetic::lattice_benchmark;
use cohomgh::pipeline::{run_clouds, Inputs, RunConfig};

/// Alpha radii between half the edge and the face circumradius of the
/// three cells (a/√2 = 1.98, 2.12, 2.26 Å): square faces fill in one class
/// at a time, so the 1-cycle counts differ by class.
#[test]
fn lattice_classes_separate_at_face_scales() {
    let sets = lattice_benchmark(&[2.8, 3.0, 3.2], 30, 0.05, 0).unwrap();
    let clouds = sets.into_iter().flat_map(|s| s.frames).collect();
    let mut cfg = RunConfig::new(Inputs::default(), 3);
    cfg.thresholds = vec![3.5f64.sqrt(), 2.0, 5f64.sqrt(), 6f64.sqrt()];
    let run = run_clouds(&cfg, clouds).unwrap();
    assert_eq!(run.features.shape(), (90, 360));
    assert!(run.ari.unwrap() >= 0.9, "ARI {:?}", run.ari);
}
