//! Browser bindings. Every export takes and returns plain strings (JSON or
//! Newick) so the page needs no generated glue beyond wasm-bindgen's.

use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

use cohomgh::complex::{build_alpha, build_vr, ComplexKind, SimplicialComplex};
use cohomgh::hodge::{betti, fiedler_vector, harmonic_generators, Tolerance};
use cohomgh::ingest::parse_xyz;
use cohomgh::ultra::{parse_newick, subdominant_from_matrix, to_newick, ugh, Dendrogram};
use cohomgh::{Error, Result};

fn complex_from_xyz(xyz: &str, kind: &str, threshold: f64, pmax: usize) -> Result<SimplicialComplex> {
    let kind: ComplexKind = kind.parse()?;
    if !(1..=3).contains(&pmax) {
        return Err(Error::Config(format!("pmax must lie in 1..=3, got {pmax}")));
    }
    let set = parse_xyz(xyz, "input")?;
    let cloud = set
        .frames
        .into_iter()
        .next()
        .ok_or_else(|| Error::Config("no frames".into()))?;
    match kind {
        ComplexKind::Vr => build_vr(&cloud, threshold, pmax),
        ComplexKind::Alpha => Ok(build_alpha(&cloud, threshold)?.skeleton(pmax)),
    }
}

/// Simplex counts, Betti numbers, harmonic 1-generators and the Fiedler
/// vector of the first frame.
pub fn structure_summary(xyz: &str, kind: &str, threshold: f64, pmax: usize) -> Result<Value> {
    let k = complex_from_xyz(xyz, kind, threshold, pmax)?;
    let counts: Vec<usize> = (0..=k.max_dim()).map(|p| k.count(p)).collect();
    let bettis = (0..=k.max_dim()).map(|p| betti(&k, p)).collect::<Result<Vec<_>>>()?;
    let generators = harmonic_generators(&k, 1, Tolerance::Auto)?;
    let edges: Vec<&[usize]> = k.simplices(1).iter().map(|s| s.vertices.as_slice()).collect();
    let fiedler = match fiedler_vector(&k) {
        Ok(f) => json!({ "eigenvalue": f.eigenvalue, "vector": f.vector }),
        Err(Error::Disconnected(c)) => json!({ "components": c }),
        Err(e) => return Err(e),
    };
    Ok(json!({
        "points": k.points(),
        "counts": counts,
        "betti": bettis,
        "edges": edges,
        "generators": generators.vectors,
        "spectral_gap": generators.spectral_gap,
        "fiedler": fiedler,
        "warnings": generators.warnings,
    }))
}

/// Subdominant ultrametric of a JSON matrix, with its dendrogram in Newick.
pub fn ultrametric_summary(matrix_json: &str, labels_json: Option<&str>) -> Result<Value> {
    let m: Vec<Vec<f64>> =
        serde_json::from_str(matrix_json).map_err(|e| Error::Config(format!("matrix: {e}")))?;
    let labels: Option<Vec<String>> = labels_json
        .filter(|s| !s.trim().is_empty())
        .map(|s| serde_json::from_str(s).map_err(|e| Error::Config(format!("labels: {e}"))))
        .transpose()?;
    if labels.as_ref().is_some_and(|l| l.len() != m.len()) {
        return Err(Error::Shape("one label per row expected".into()));
    }
    let u = subdominant_from_matrix(&m)?;
    let newick = if u.is_empty() {
        String::from(";")
    } else {
        to_newick(&Dendrogram::new(&u)?, labels.as_deref())
    };
    Ok(json!({ "matrix": u.dmatrix, "newick": newick, "diameter": u.diameter() }))
}

/// u_GH between two Newick dendrograms.
pub fn ugh_newick(a: &str, b: &str) -> Result<f64> {
    let (x, _) = parse_newick(a)?;
    let (y, _) = parse_newick(b)?;
    ugh(&x, &y)
}

fn js(r: Result<Value>) -> std::result::Result<String, JsError> {
    r.map(|v| v.to_string()).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = structureSummary)]
pub fn structure_summary_js(xyz: &str, kind: &str, threshold: f64, pmax: usize) -> std::result::Result<String, JsError> {
    js(structure_summary(xyz, kind, threshold, pmax))
}

#[wasm_bindgen(js_name = ultrametricSummary)]
pub fn ultrametric_summary_js(matrix_json: &str, labels_json: Option<String>) -> std::result::Result<String, JsError> {
    js(ultrametric_summary(matrix_json, labels_json.as_deref()))
}

#[wasm_bindgen(js_name = ughNewick)]
pub fn ugh_newick_js(a: &str, b: &str) -> std::result::Result<f64, JsError> {
    ugh_newick(a, b).map_err(|e| JsError::new(&e.to_string()))
}
