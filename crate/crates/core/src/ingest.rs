//! Multi-frame XYZ trajectories.
//!
//! Each frame is a count line, a free-form comment line and `count` rows of
//! `element x y z` (Å). Frames are concatenated back to back.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points closer than this are treated as the same atom.
pub const DUPLICATE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub points: Vec<[f64; 3]>,
    /// Element symbols; carried along but never used in distances. May be empty.
    pub elements: Vec<String>,
    pub frame_id: usize,
    pub source_tag: String,
}

impl PointCloud {
    pub fn new(points: Vec<[f64; 3]>) -> Self {
        PointCloud {
            points,
            elements: Vec::new(),
            frame_id: 0,
            source_tag: String::new(),
        }
    }

    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.source_tag = tag.into();
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Euclidean distance between points `i` and `j`.
    pub fn dist(&self, i: usize, j: usize) -> f64 {
        euclid(&self.points[i], &self.points[j])
    }

    /// Copy of the cloud with every coordinate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        for p in &mut out.points {
            for c in p.iter_mut() {
                *c *= factor;
            }
        }
        out
    }
}

pub(crate) fn euclid(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    (dx * dx + dy * dy + dz * dz).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySet {
    pub frames: Vec<PointCloud>,
    pub group_label: String,
}

/// Check the point-cloud invariants, returning the cloud untouched on success.
pub fn validate_cloud(cloud: PointCloud) -> Result<PointCloud> {
    if cloud.points.is_empty() {
        return Err(Error::Degenerate("point cloud is empty".into()));
    }
    if !cloud.elements.is_empty() && cloud.elements.len() != cloud.points.len() {
        return Err(Error::Shape(format!(
            "{} element symbols for {} points",
            cloud.elements.len(),
            cloud.points.len()
        )));
    }
    for (i, p) in cloud.points.iter().enumerate() {
        if p.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite(i));
        }
    }
    // Sweep along x so only nearby candidates are compared.
    let mut order: Vec<usize> = (0..cloud.points.len()).collect();
    order.sort_by(|&a, &b| cloud.points[a][0].total_cmp(&cloud.points[b][0]));
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            if cloud.points[j][0] - cloud.points[i][0] > DUPLICATE_TOLERANCE {
                break;
            }
            if euclid(&cloud.points[i], &cloud.points[j]) <= DUPLICATE_TOLERANCE {
                return Err(Error::DuplicatePoints(i.min(j), i.max(j)));
            }
        }
    }
    Ok(cloud)
}

/// Parse XYZ text. Every frame receives `tag` as its source tag.
pub fn parse_xyz(text: &str, tag: &str) -> Result<TrajectorySet> {
    let lines: Vec<&str> = text.lines().collect();
    let mut end = lines.len();
    while end > 0 && lines[end - 1].trim().is_empty() {
        end -= 1;
    }
    if end == 0 {
        return Err(Error::Parse {
            line: 1,
            message: "empty file".into(),
        });
    }

    let mut frames = Vec::new();
    let mut at = 0;
    while at < end {
        let count_line = at + 1;
        let count: usize = lines[at].trim().parse().map_err(|_| Error::Parse {
            line: count_line,
            message: format!("expected atom count, got '{}'", lines[at].trim()),
        })?;
        if count == 0 {
            return Err(Error::Parse {
                line: count_line,
                message: "frame declares zero atoms".into(),
            });
        }
        if at + 1 >= end {
            return Err(Error::Parse {
                line: count_line + 1,
                message: "missing comment line".into(),
            });
        }
        let first = at + 2;
        if first + count > end {
            return Err(Error::Parse {
                line: count_line,
                message: format!(
                    "frame declares {} atoms but only {} lines follow",
                    count,
                    end.saturating_sub(first)
                ),
            });
        }
        let mut points = Vec::with_capacity(count);
        let mut elements = Vec::with_capacity(count);
        for (row, line) in lines[first..first + count].iter().enumerate() {
            let line_no = first + row + 1;
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() < 4 {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected 'element x y z', got '{}'", line.trim()),
                });
            }
            let mut xyz = [0.0; 3];
            for (c, field) in fields[1..4].iter().enumerate() {
                xyz[c] = field.parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("invalid coordinate '{field}'"),
                })?;
            }
            elements.push(fields[0].to_string());
            points.push(xyz);
        }
        frames.push(PointCloud {
            points,
            elements,
            frame_id: frames.len(),
            source_tag: tag.to_string(),
        });
        at = first + count;
    }

    Ok(TrajectorySet {
        frames,
        group_label: tag.to_string(),
    })
}

/// Read one XYZ file; the group label is the file stem.
pub fn load_xyz(path: &Path) -> Result<TrajectorySet> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let tag = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_xyz(&text, &tag).map_err(|e| e.context(path.display().to_string()))
}

/// A single file, or every `*.xyz` in a directory in lexicographic order.
pub fn load_inputs(path: &Path) -> Result<Vec<TrajectorySet>> {
    if path.is_dir() {
        let entries = std::fs::read_dir(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut files: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.is_file() && p.extension().is_some_and(|ext| ext == "xyz"))
            .collect();
        files.sort();
        if files.is_empty() {
            return Err(Error::Config(format!(
                "no .xyz files in {}",
                path.display()
            )));
        }
        files.iter().map(|f| load_xyz(f)).collect()
    } else {
        Ok(vec![load_xyz(path)?])
    }
}

/// Serialize frames back to XYZ. Coordinates use the shortest exact decimal form.
pub fn to_xyz(set: &TrajectorySet) -> String {
    let mut out = String::new();
    for frame in &set.frames {
        let _ = writeln!(out, "{}", frame.points.len());
        let _ = writeln!(out, "{} frame {}", set.group_label, frame.frame_id);
        for (i, p) in frame.points.iter().enumerate() {
            let el = frame.elements.get(i).map(String::as_str).unwrap_or("X");
            let _ = writeln!(out, "{} {} {} {}", el, p[0], p[1], p[2]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn missing_comment_line_is_rejected() {
        let err = parse_xyz("1\nC 0 0 0\n", "t").unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");
    }

    #[test]
    fn minimal_frame() {
        let set = parse_xyz("2\nframe0\nH 0 0 0\nH 0 0 0.74\n", "h2").unwrap();
        assert_eq!(set.frames.len(), 1);
        assert_eq!(set.frames[0].points, vec![[0.0, 0.0, 0.0], [0.0, 0.0, 0.74]]);
        assert_eq!(set.frames[0].elements, vec!["H", "H"]);
        assert_eq!(set.frames[0].source_tag, "h2");
    }

    #[test]
    fn two_frames() {
        let text = "3\na\nO 0 0 0\nH 1 0 0\nH 0 1 0\n3\nb\nO 0 0 0.1\nH 1 0 0.1\nH 0 1 0.1\n";
        let set = parse_xyz(text, "w").unwrap();
        let ids: Vec<usize> = set.frames.iter().map(|f| f.frame_id).collect();
        assert_eq!(ids, vec![0, 1]);
        assert_eq!(set.frames[1].points[2], [0.0, 1.0, 0.1]);
    }

    #[test]
    fn count_mismatch_reports_line() {
        match parse_xyz("3\nc\nH 0 0 0\nH 1 0 0\n", "t") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_coordinate() {
        match parse_xyz("1\nc\nH 0 zero 0\n", "t") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn empty_file() {
        assert!(parse_xyz("", "t").is_err());
        assert!(parse_xyz("\n\n", "t").is_err());
    }

    #[test]
    fn validation() {
        let dup = PointCloud::new(vec![[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]]);
        assert!(matches!(validate_cloud(dup), Err(Error::DuplicatePoints(0, 1))));

        let single = PointCloud::new(vec![[0.0; 3]]);
        assert!(validate_cloud(single).is_ok());

        let nan = PointCloud::new(vec![[0.0; 3], [f64::NAN, 0.0, 0.0]]);
        assert!(matches!(validate_cloud(nan), Err(Error::NonFinite(1))));
    }

    #[test]
    fn near_duplicates_beyond_tolerance_pass() {
        let c = PointCloud::new(vec![[0.0; 3], [0.0, 0.0, 1e-6]]);
        assert!(validate_cloud(c).is_ok());
    }

    proptest! {
        #[test]
        fn xyz_round_trip(frames in prop::collection::vec(
            prop::collection::vec(prop::array::uniform3(-1e3f64..1e3), 1..8), 1..4)) {
            let set = TrajectorySet {
                frames: frames.into_iter().enumerate().map(|(i, pts)| PointCloud {
                    elements: vec!["C".to_string(); pts.len()],
                    points: pts,
                    frame_id: i,
                    source_tag: "g".into(),
                }).collect(),
                group_label: "g".into(),
            };
            let back = parse_xyz(&to_xyz(&set), "g").unwrap();
            prop_assert_eq!(back.frames.len(), set.frames.len());
            for (a, b) in back.frames.iter().zip(&set.frames) {
                for (p, q) in a.points.iter().zip(&b.points) {
                    for c in 0..3 {
                        prop_assert!((p[c] - q[c]).abs() <= 1e-12);
                    }
                }
            }
        }
    }
}
