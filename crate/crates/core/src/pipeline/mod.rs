//! End-to-end runs: structures → per-threshold u_GH matrices → feature
//! matrix → k-means → adjusted Rand index, with CSV/JSON outputs.

pub mod cluster;
mod config;
pub mod synthetic;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::complex::{build_vr, delaunay3d, jitter_cloud, ComplexKind, SimplicialComplex};
use crate::error::{Error, Result};
use crate::genmetric::{generator_metric_space, MetricKind, Provenance};
use crate::hodge::{harmonic_generators, Tolerance};
use crate::ingest::{load_inputs, validate_cloud, PointCloud};
use crate::ultra::{subdominant_ultrametric, ugh, Ultrametric};

pub use cluster::{ari, kmeans, Clustering};
pub use config::{Inputs, Jitter, RunConfig, DEFAULT_THRESHOLDS};

/// Largest strong-triangle violation tolerated among ok entries.
pub const ULTRAMETRIC_TOL: f64 = 1e-9;

#[cfg(feature = "parallel")]
fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    use rayon::prelude::*;
    items.par_iter().map(f).collect()
}

#[cfg(not(feature = "parallel"))]
fn par_map<T: Sync, U: Send>(items: &[T], f: impl Fn(&T) -> U + Sync + Send) -> Vec<U> {
    items.iter().map(f).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EntryStatus {
    Ok,
    EmptySpaceSubstituted,
}

/// Pairwise u_GH values over n structures at one threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UghMatrix {
    pub threshold: f64,
    pub metric: MetricKind,
    pub values: Vec<Vec<f64>>,
    pub status: Vec<Vec<EntryStatus>>,
}

impl UghMatrix {
    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn substituted(&self) -> usize {
        self.status
            .iter()
            .enumerate()
            .map(|(i, r)| r[i + 1..].iter().filter(|&&s| s != EntryStatus::Ok).count())
            .sum()
    }

    /// Strong-triangle violation over triples whose three entries are ok.
    pub fn ok_violation(&self) -> f64 {
        let n = self.n();
        let ok = |i: usize, j: usize| self.status[i][j] == EntryStatus::Ok;
        let mut worst = 0.0f64;
        for x in 0..n {
            for y in 0..n {
                if !ok(x, y) {
                    continue;
                }
                for z in 0..n {
                    if ok(x, z) && ok(y, z) {
                        let d = &self.values;
                        worst = worst.max(d[x][z] - d[x][y].max(d[y][z]));
                    }
                }
            }
        }
        worst
    }
}

/// Settings applied identically to every structure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageSpec {
    pub kind: ComplexKind,
    pub metric: MetricKind,
    pub p: usize,
    pub kmax_dim: usize,
}

impl From<&RunConfig> for StageSpec {
    fn from(c: &RunConfig) -> Self {
        StageSpec {
            kind: c.kind,
            metric: c.metric,
            p: c.p,
            kmax_dim: c.kmax_dim,
        }
    }
}

/// Generator space of one structure at one threshold.
#[derive(Debug, Clone)]
pub struct StructureSpace {
    pub ultrametric: Ultrametric,
    pub warnings: Vec<String>,
    pub max_truncated_mass: f64,
}

pub fn structure_id(cloud: &PointCloud, index: usize) -> String {
    if cloud.source_tag.is_empty() {
        format!("s{index}")
    } else {
        format!("{}#{}", cloud.source_tag, cloud.frame_id)
    }
}

/// Complex whose sublevel sets at every threshold ≤ `t_max` are the
/// per-threshold complexes.
pub fn filtered_complex(cloud: &PointCloud, spec: &StageSpec, t_max: f64) -> Result<SimplicialComplex> {
    match spec.kind {
        ComplexKind::Alpha => Ok(delaunay3d(cloud)?.skeleton(spec.kmax_dim)),
        ComplexKind::Vr => build_vr(cloud, t_max, spec.kmax_dim),
    }
}

pub fn structure_space(full: &SimplicialComplex, threshold: f64, spec: &StageSpec, id: &str) -> Result<StructureSpace> {
    let k = full.sublevel(threshold);
    let g = harmonic_generators(&k, spec.p, Tolerance::Auto)?;
    let m = generator_metric_space(&g, spec.metric, &k)?;
    let mut u = subdominant_ultrametric(&m)?;
    u.provenance = Provenance {
        structure: id.to_string(),
        threshold: Some(threshold),
        p: spec.p,
    };
    Ok(StructureSpace {
        ultrametric: u,
        warnings: g.warnings,
        max_truncated_mass: m.max_truncated_mass,
    })
}

/// All pairwise u_GH values. Pairs involving an empty space get the largest
/// ok value (0 when both are empty) and are flagged.
pub fn assemble(spaces: &[&Ultrametric], threshold: f64, metric: MetricKind) -> Result<UghMatrix> {
    let n = spaces.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let results = par_map(&pairs, |&(i, j)| {
        if spaces[i].is_empty() || spaces[j].is_empty() {
            Ok(None)
        } else {
            ugh(spaces[i], spaces[j]).map(Some)
        }
    });
    let mut values = vec![vec![0.0; n]; n];
    let mut status = vec![vec![EntryStatus::Ok; n]; n];
    let mut fill_max = 0.0f64;
    let mut pending = Vec::new();
    for (&(i, j), r) in pairs.iter().zip(results) {
        match r? {
            Some(v) => {
                values[i][j] = v;
                values[j][i] = v;
                fill_max = fill_max.max(v);
            }
            None => pending.push((i, j)),
        }
    }
    for (i, j) in pending {
        let v = if spaces[i].is_empty() && spaces[j].is_empty() { 0.0 } else { fill_max };
        values[i][j] = v;
        values[j][i] = v;
        status[i][j] = EntryStatus::EmptySpaceSubstituted;
        status[j][i] = EntryStatus::EmptySpaceSubstituted;
    }
    let m = UghMatrix {
        threshold,
        metric,
        values,
        status,
    };
    let v = m.ok_violation();
    if v > ULTRAMETRIC_TOL {
        return Err(Error::Consistency(format!(
            "u_GH matrix at threshold {threshold} breaks the strong triangle inequality by {v:e}"
        )));
    }
    Ok(m)
}

/// u_GH matrix of the given structures at one threshold.
pub fn ugh_matrix(structures: &[PointCloud], threshold: f64, spec: &StageSpec) -> Result<UghMatrix> {
    if structures.len() < 2 {
        return Err(Error::Config(format!(
            "need at least 2 structures, got {}",
            structures.len()
        )));
    }
    let idx: Vec<usize> = (0..structures.len()).collect();
    let spaces = par_map(&idx, |&i| {
        let id = structure_id(&structures[i], i);
        filtered_complex(&structures[i], spec, threshold)
            .and_then(|k| structure_space(&k, threshold, spec, &id))
            .map_err(|e| e.context(format!("structure {id}")))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let refs: Vec<&Ultrametric> = spaces.iter().map(|s| &s.ultrametric).collect();
    assemble(&refs, threshold, spec.metric)
}

/// Row i is the concatenation of row i of every matrix, in the given order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMatrix {
    pub rows: Vec<Vec<f64>>,
    pub thresholds: Vec<f64>,
}

impl FeatureMatrix {
    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.rows.first().map_or(0, Vec::len))
    }
}

pub fn feature_matrix(mats: &[UghMatrix]) -> Result<FeatureMatrix> {
    let Some(first) = mats.first() else {
        return Err(Error::Shape("no u_GH matrices to concatenate".into()));
    };
    let n = first.n();
    for (i, m) in mats.iter().enumerate() {
        if m.n() != n || m.values.iter().any(|r| r.len() != n) {
            return Err(Error::Shape(format!("matrix {i} is not {n} x {n}")));
        }
        if mats[..i].iter().any(|o| o.threshold == m.threshold) {
            return Err(Error::Shape(format!("threshold {} appears twice", m.threshold)));
        }
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| mats.iter().flat_map(|m| m.values[i].iter().copied()).collect())
        .collect();
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.len(), n * mats.len());
        for (t, m) in mats.iter().enumerate() {
            assert!(row[t * n..(t + 1) * n] == m.values[i][..]);
        }
    }
    Ok(FeatureMatrix {
        rows,
        thresholds: mats.iter().map(|m| m.threshold).collect(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub threshold: f64,
    /// Generator count per structure.
    pub generators: Vec<usize>,
    pub empty_structures: Vec<String>,
    pub substituted_entries: usize,
    pub max_ok_violation: f64,
    pub max_truncated_mass: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunReport {
    pub config: RunConfig,
    pub structures: Vec<String>,
    pub groups: Vec<String>,
    pub thresholds: Vec<ThresholdReport>,
    pub feature_shape: (usize, usize),
    pub clustering: Clustering,
    pub ari: Option<f64>,
    pub timings_ms: BTreeMap<String, f64>,
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub ids: Vec<String>,
    pub groups: Vec<String>,
    pub matrices: Vec<UghMatrix>,
    pub features: FeatureMatrix,
    pub clustering: Clustering,
    pub ari: Option<f64>,
    pub report: RunReport,
}

/// Per-structure jitter seed, independent of input order.
fn jitter_seed(seed: u64, id: &str) -> u64 {
    // FNV-1a
    let mut h: u64 = 0xcbf29ce484222325;
    for b in id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    seed ^ h
}

/// Runs every stage on in-memory structures. `cfg.inputs` is ignored.
pub fn run_clouds(cfg: &RunConfig, clouds: Vec<PointCloud>) -> Result<PipelineRun> {
    cfg.validate()?;
    let n = clouds.len();
    if n < 2 {
        return Err(Error::Config(format!("need at least 2 structures, got {n}")));
    }
    if cfg.k > n {
        return Err(Error::Config(format!("k = {} exceeds the {n} structures", cfg.k)));
    }
    let spec = StageSpec::from(cfg);
    let mut timings = BTreeMap::new();
    let ids: Vec<String> = clouds.iter().enumerate().map(|(i, c)| structure_id(c, i)).collect();
    let groups: Vec<String> = clouds.iter().map(|c| c.source_tag.clone()).collect();

    let clock = Instant::now();
    let mut prepared = Vec::with_capacity(n);
    for (c, id) in clouds.into_iter().zip(&ids) {
        let c = validate_cloud(c).map_err(|e| e.context(format!("structure {id}")))?;
        prepared.push(match cfg.jitter {
            Some(j) if j.sigma > 0.0 => jitter_cloud(&c, j.sigma, jitter_seed(j.seed, id))?,
            _ => c,
        });
    }
    let t_max = cfg.thresholds.iter().copied().fold(0.0, f64::max);
    let idx: Vec<usize> = (0..n).collect();
    let fulls = par_map(&idx, |&i| {
        filtered_complex(&prepared[i], &spec, t_max).map_err(|e| e.context(format!("structure {}", ids[i])))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    timings.insert("complexes".to_string(), ms(clock));

    let mut matrices = Vec::new();
    let mut reports = Vec::new();
    let mut spaces_ms = 0.0;
    let mut ugh_ms = 0.0;
    for &t in &cfg.thresholds {
        let clock = Instant::now();
        let spaces = par_map(&idx, |&i| {
            structure_space(&fulls[i], t, &spec, &ids[i])
                .map_err(|e| e.context(format!("structure {} at threshold {t}", ids[i])))
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        spaces_ms += ms(clock);
        let clock = Instant::now();
        let refs: Vec<&Ultrametric> = spaces.iter().map(|s| &s.ultrametric).collect();
        let m = assemble(&refs, t, cfg.metric)?;
        ugh_ms += ms(clock);
        reports.push(ThresholdReport {
            threshold: t,
            generators: spaces.iter().map(|s| s.ultrametric.len()).collect(),
            empty_structures: ids
                .iter()
                .zip(&spaces)
                .filter(|(_, s)| s.ultrametric.is_empty())
                .map(|(id, _)| id.clone())
                .collect(),
            substituted_entries: m.substituted(),
            max_ok_violation: m.ok_violation(),
            max_truncated_mass: spaces.iter().map(|s| s.max_truncated_mass).fold(0.0, f64::max),
            warnings: ids
                .iter()
                .zip(&spaces)
                .flat_map(|(id, s)| s.warnings.iter().map(move |w| format!("{id}: {w}")))
                .collect(),
        });
        matrices.push(m);
    }
    timings.insert("generators".to_string(), spaces_ms);
    timings.insert("ugh".to_string(), ugh_ms);

    let clock = Instant::now();
    let features = feature_matrix(&matrices)?;
    let clustering = kmeans(&features.rows, cfg.k, cfg.seed, cfg.restarts)?;
    let ari = if cfg.evaluate {
        Some(ari(&groups, &clustering.labels)?)
    } else {
        None
    };
    timings.insert("clustering".to_string(), ms(clock));

    let report = RunReport {
        config: cfg.clone(),
        structures: ids.clone(),
        groups: groups.clone(),
        thresholds: reports,
        feature_shape: features.shape(),
        clustering: clustering.clone(),
        ari,
        timings_ms: timings,
    };
    Ok(PipelineRun {
        ids,
        groups,
        matrices,
        features,
        clustering,
        ari,
        report,
    })
}

fn ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Loads `cfg.inputs` (relative paths resolve against `base`) and runs.
pub fn run_pipeline(cfg: &RunConfig, base: &Path) -> Result<PipelineRun> {
    cfg.validate()?;
    let paths = cfg.inputs.paths();
    if paths.is_empty() {
        return Err(Error::Config("no inputs given".into()));
    }
    let mut clouds = Vec::new();
    for p in paths {
        let path: PathBuf = base.join(p);
        if !path.exists() {
            return Err(Error::Config(format!("input {} does not exist", path.display())));
        }
        for set in load_inputs(&path)? {
            clouds.extend(set.frames);
        }
    }
    run_clouds(cfg, clouds)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Square matrix with structure ids as header row and first column.
pub fn matrix_csv(ids: &[String], values: &[Vec<f64>]) -> String {
    let mut out = String::from("id");
    for id in ids {
        out.push(',');
        out.push_str(&csv_field(id));
    }
    out.push('\n');
    for (id, row) in ids.iter().zip(values) {
        out.push_str(&csv_field(id));
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

impl PipelineRun {
    pub fn features_csv(&self) -> String {
        let mut out = String::from("id");
        for t in &self.features.thresholds {
            for id in &self.ids {
                let _ = write!(out, ",{}", csv_field(&format!("t{t}:{id}")));
            }
        }
        out.push('\n');
        for (id, row) in self.ids.iter().zip(&self.features.rows) {
            out.push_str(&csv_field(id));
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn labels_csv(&self) -> String {
        let mut out = String::from("id,group,cluster\n");
        for ((id, g), l) in self.ids.iter().zip(&self.groups).zip(&self.clustering.labels) {
            let _ = writeln!(out, "{},{},{l}", csv_field(id), csv_field(g));
        }
        out
    }

    /// Writes `ugh_t<T>.csv`, `features.csv`, `labels.csv` and
    /// `report.json` into `dir`, returning the written paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let io = |path: &Path| {
            let path = path.display().to_string();
            move |source| Error::Io { path, source }
        };
        std::fs::create_dir_all(dir).map_err(io(dir))?;
        let mut files: Vec<(PathBuf, String)> = self
            .matrices
            .iter()
            .map(|m| (dir.join(format!("ugh_t{}.csv", m.threshold)), matrix_csv(&self.ids, &m.values)))
            .collect();
        files.push((dir.join("features.csv"), self.features_csv()));
        files.push((dir.join("labels.csv"), self.labels_csv()));
        let report = serde_json::to_string_pretty(&self.report)
            .map_err(|e| Error::Shape(format!("report serialization: {e}")))?;
        files.push((dir.join("report.json"), report + "\n"));
        for (path, text) in &files {
            std::fs::write(path, text).map_err(io(path))?;
        }
        Ok(files.into_iter().map(|f| f.0).collect())
    }
}

#[cfg(test)]
mod tests;
