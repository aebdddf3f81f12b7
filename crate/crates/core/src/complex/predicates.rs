//! Sign conventions on top of the adaptive exact predicates of the `robust` crate.

use std::cmp::Ordering;

use robust::Coord3D;

fn c(p: &[f64; 3]) -> Coord3D<f64> {
    Coord3D {
        x: p[0],
        y: p[1],
        z: p[2],
    }
}

/// Sign of det[b − a, c − a, d − a]; `Greater` for a positively oriented tetrahedron.
pub(crate) fn orient(a: &[f64; 3], b: &[f64; 3], cc: &[f64; 3], d: &[f64; 3]) -> Ordering {
    // robust's orient3d is positive when d lies below the ccw plane abc,
    // which is the opposite sign of the determinant above.
    0.0.partial_cmp(&robust::orient3d(c(a), c(b), c(cc), c(d)))
        .unwrap_or(Ordering::Equal)
}

/// For a positively oriented (a, b, c, d): `Greater` when e is strictly
/// inside the circumsphere, `Equal` when on it.
pub(crate) fn in_sphere(
    a: &[f64; 3],
    b: &[f64; 3],
    cc: &[f64; 3],
    d: &[f64; 3],
    e: &[f64; 3],
) -> Ordering {
    // robust expects its own positive orientation, i.e. ours with a flipped sign.
    0.0.partial_cmp(&robust::insphere(c(a), c(b), c(cc), c(d), c(e)))
        .unwrap_or(Ordering::Equal)
}

#[cfg(test)]
mod tests {
    use super::*;

    const O: [f64; 3] = [0.0, 0.0, 0.0];
    const X: [f64; 3] = [1.0, 0.0, 0.0];
    const Y: [f64; 3] = [0.0, 1.0, 0.0];
    const Z: [f64; 3] = [0.0, 0.0, 1.0];

    #[test]
    fn orientation_matches_determinant() {
        assert_eq!(orient(&O, &X, &Y, &Z), Ordering::Greater);
        assert_eq!(orient(&O, &Y, &X, &Z), Ordering::Less);
        assert_eq!(orient(&O, &X, &Y, &[3.0, 5.0, 0.0]), Ordering::Equal);
    }

    #[test]
    fn sphere_test() {
        // circumsphere of the corner tetrahedron is centred at (1/2,1/2,1/2)
        assert_eq!(in_sphere(&O, &X, &Y, &Z, &[0.5, 0.5, 0.5]), Ordering::Greater);
        assert_eq!(in_sphere(&O, &X, &Y, &Z, &[1.0, 1.0, 1.0]), Ordering::Equal);
        assert_eq!(in_sphere(&O, &X, &Y, &Z, &[2.0, 2.0, 2.0]), Ordering::Less);
    }

    #[test]
    fn near_degenerate_is_exact() {
        let eps = f64::EPSILON * 0.5;
        let d = [0.5, 0.5, eps];
        assert_eq!(orient(&O, &X, &Y, &d), Ordering::Greater);
        let e = [0.5, 0.5, -eps];
        assert_eq!(orient(&O, &X, &Y, &e), Ordering::Less);
    }
}
