//! Exact rank of a signed incidence matrix by elimination over GF(2^31 − 1).
//!
//! A rank computed modulo a prime never exceeds the rational rank; it can only
//! fall short when the prime divides every maximal nonzero minor, which for
//! ±1 incidence matrices of desk-scale complexes is vanishingly unlikely.

use std::collections::HashMap;

use super::BoundaryMatrix;

pub(crate) const PRIME: u64 = 2_147_483_647;

fn inv(a: u64) -> u64 {
    // Fermat: a^(p-2)
    let mut base = a % PRIME;
    let mut exp = PRIME - 2;
    let mut acc = 1u64;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % PRIME;
        }
        base = base * base % PRIME;
        exp >>= 1;
    }
    acc
}

fn to_field(x: i8) -> u64 {
    if x >= 0 {
        x as u64
    } else {
        PRIME - (-(x as i64)) as u64
    }
}

/// `col -= factor * other`, both sorted by row.
fn axpy(col: &[(usize, u64)], factor: u64, other: &[(usize, u64)]) -> Vec<(usize, u64)> {
    let mut out = Vec::with_capacity(col.len() + other.len());
    let (mut i, mut j) = (0, 0);
    while i < col.len() || j < other.len() {
        let take_col = j >= other.len() || (i < col.len() && col[i].0 < other[j].0);
        let take_other = i >= col.len() || (j < other.len() && other[j].0 < col[i].0);
        if take_col {
            out.push(col[i]);
            i += 1;
        } else if take_other {
            let v = (PRIME - factor * other[j].1 % PRIME) % PRIME;
            if v != 0 {
                out.push((other[j].0, v));
            }
            j += 1;
        } else {
            let v = (col[i].1 + PRIME - factor * other[j].1 % PRIME) % PRIME;
            if v != 0 {
                out.push((col[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Column-reduction rank: each column is cleared against earlier pivots
/// keyed by their largest row index.
pub(crate) fn rank_mod_p(b: &BoundaryMatrix) -> usize {
    let mut pivots: HashMap<usize, Vec<(usize, u64)>> = HashMap::new();
    for col in &b.columns {
        let mut c: Vec<(usize, u64)> = col.iter().map(|&(r, s)| (r, to_field(s))).collect();
        c.sort_unstable_by_key(|e| e.0);
        while let Some(&(low, val)) = c.last() {
            match pivots.get(&low) {
                Some(piv) => {
                    let pv = piv.last().expect("pivot column is non-empty").1;
                    let factor = val * inv(pv) % PRIME;
                    c = axpy(&c, factor, piv);
                }
                None => {
                    pivots.insert(low, c);
                    break;
                }
            }
        }
    }
    pivots.len()
}
