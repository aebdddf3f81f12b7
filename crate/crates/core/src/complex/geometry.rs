//! Smallest circumscribing spheres of low-dimensional simplices.

type V3 = [f64; 3];

fn sub(a: &V3, b: &V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: &V3, b: &V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &V3, b: &V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn axpy(a: &V3, s: f64, x: &V3) -> V3 {
    [a[0] + s * x[0], a[1] + s * x[1], a[2] + s * x[2]]
}

pub(crate) fn dist2(a: &V3, b: &V3) -> f64 {
    let d = sub(a, b);
    dot(&d, &d)
}

/// Centre and squared radius of the smallest sphere through all the given
/// points (the circumsphere within their affine hull). `None` for
/// affinely dependent input.
pub(crate) fn circumsphere(pts: &[V3]) -> Option<(V3, f64)> {
    match pts.len() {
        1 => Some((pts[0], 0.0)),
        2 => {
            let c = [
                0.5 * (pts[0][0] + pts[1][0]),
                0.5 * (pts[0][1] + pts[1][1]),
                0.5 * (pts[0][2] + pts[1][2]),
            ];
            Some((c, 0.25 * dist2(&pts[0], &pts[1])))
        }
        3 => {
            let a = &pts[0];
            let u = sub(&pts[1], a);
            let v = sub(&pts[2], a);
            let w = cross(&u, &v);
            let ww = dot(&w, &w);
            if ww == 0.0 {
                return None;
            }
            let t1 = cross(&v, &w);
            let t2 = cross(&w, &u);
            let (uu, vv) = (dot(&u, &u), dot(&v, &v));
            let off = [
                (uu * t1[0] + vv * t2[0]) / (2.0 * ww),
                (uu * t1[1] + vv * t2[1]) / (2.0 * ww),
                (uu * t1[2] + vv * t2[2]) / (2.0 * ww),
            ];
            Some((axpy(a, 1.0, &off), dot(&off, &off)))
        }
        4 => {
            let a = &pts[0];
            let u = sub(&pts[1], a);
            let v = sub(&pts[2], a);
            let w = sub(&pts[3], a);
            let vw = cross(&v, &w);
            let det = dot(&u, &vw);
            if det == 0.0 {
                return None;
            }
            let wu = cross(&w, &u);
            let uv = cross(&u, &v);
            let (uu, vv, ww) = (dot(&u, &u), dot(&v, &v), dot(&w, &w));
            let off = [
                (uu * vw[0] + vv * wu[0] + ww * uv[0]) / (2.0 * det),
                (uu * vw[1] + vv * wu[1] + ww * uv[1]) / (2.0 * det),
                (uu * vw[2] + vv * wu[2] + ww * uv[2]) / (2.0 * det),
            ];
            Some((axpy(a, 1.0, &off), dot(&off, &off)))
        }
        _ => None,
    }
}
