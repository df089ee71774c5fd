//! Euclidean helpers shared by the mesh validator: triangle-triangle
//! contact classification, point/segment/triangle distances, and the
//! minimum of a quadratic form along a segment.

use nalgebra::{Matrix3, Vector3};

pub type Tri = [Vector3<f64>; 3];

/// How two triangles touch, measured against a length tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TriContact {
    /// Separated by more than the tolerance.
    Disjoint,
    /// Transversal contact along a segment (possibly a single point),
    /// returned with its endpoints.
    Segment(Vector3<f64>, Vector3<f64>),
    /// Coplanar within tolerance, interiors overlap with the given area.
    CoplanarOverlap(f64),
    /// Coplanar within tolerance, interiors disjoint.
    CoplanarDisjoint,
}

fn tri_normal(t: &Tri) -> Vector3<f64> {
    (t[1] - t[0]).cross(&(t[2] - t[0]))
}

pub fn tri_area(t: &Tri) -> f64 {
    tri_normal(t).norm() / 2.0
}

/// Crossing interval of a triangle with the other plane: the 3D
/// points where the triangle meets the plane, keyed by their
/// coordinate along the intersection-line axis. `dist` holds signed
/// vertex distances to the plane (within `eps` counts as on-plane).
fn straddle_interval(
    t: &Tri,
    dist: [f64; 3],
    axis: &Vector3<f64>,
    eps: f64,
) -> Option<((f64, Vector3<f64>), (f64, Vector3<f64>))> {
    let mut hits: Vec<(f64, Vector3<f64>)> = Vec::new();
    let zero = |d: f64| d.abs() <= eps;
    let mut push = |p: Vector3<f64>| hits.push((axis.dot(&p), p));
    for (i, j) in [(0, 1), (1, 2), (2, 0)] {
        let (di, dj) = (dist[i], dist[j]);
        match (zero(di), zero(dj)) {
            (true, true) => {
                push(t[i]);
                push(t[j]);
            }
            (true, false) => push(t[i]),
            (false, true) => push(t[j]),
            (false, false) => {
                if di.signum() != dj.signum() {
                    let w = di / (di - dj);
                    push(t[i] + (t[j] - t[i]) * w);
                }
            }
        }
    }
    let lo = hits
        .iter()
        .cloned()
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())?;
    let hi = hits
        .iter()
        .cloned()
        .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap())?;
    Some((lo, hi))
}

/// Sutherland-Hodgman clip of polygon `poly` by the halfplane
/// `{x : n . (x - a) <= 0}` within the common plane.
fn clip_halfplane(poly: &[Vector3<f64>], a: &Vector3<f64>, n: &Vector3<f64>) -> Vec<Vector3<f64>> {
    let mut out = Vec::new();
    let m = poly.len();
    for i in 0..m {
        let p = poly[i];
        let q = poly[(i + 1) % m];
        let dp = n.dot(&(p - a));
        let dq = n.dot(&(q - a));
        if dp <= 0.0 {
            out.push(p);
        }
        if (dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0) {
            let w = dp / (dp - dq);
            out.push(p + (q - p) * w);
        }
    }
    out
}

fn polygon_area(poly: &[Vector3<f64>]) -> f64 {
    if poly.len() < 3 {
        return 0.0;
    }
    let mut s = Vector3::zeros();
    for i in 1..poly.len() - 1 {
        s += (poly[i] - poly[0]).cross(&(poly[i + 1] - poly[0]));
    }
    s.norm() / 2.0
}

/// Overlap area of two coplanar triangles: clip `a` by the three edge
/// halfplanes of `b` (in-plane normals).
fn coplanar_overlap_area(a: &Tri, b: &Tri, normal: &Vector3<f64>) -> f64 {
    let mut poly: Vec<Vector3<f64>> = a.to_vec();
    for i in 0..3 {
        let p = b[i];
        let q = b[(i + 1) % 3];
        let edge = q - p;
        let mut inward = normal.cross(&edge);
        // make it point towards the third vertex of b
        let r = b[(i + 2) % 3];
        if inward.dot(&(r - p)) < 0.0 {
            inward = -inward;
        }
        // keep x with inward . (x - p) >= 0
        poly = clip_halfplane(&poly, &p, &(-inward));
        if poly.is_empty() {
            return 0.0;
        }
    }
    polygon_area(&poly)
}

/// Classifies the contact of two triangles. `eps` is an absolute length
/// tolerance (callers scale it by the instance diameter).
pub fn tri_tri_contact(t1: &Tri, t2: &Tri, eps: f64) -> TriContact {
    let n1 = tri_normal(t1);
    let n2 = tri_normal(t2);
    let scale1 = n1.norm();
    let scale2 = n2.norm();
    let d2: Vec<f64> = t2.iter().map(|v| n1.dot(&(v - t1[0])) / scale1).collect();
    let d1: Vec<f64> = t1.iter().map(|v| n2.dot(&(v - t2[0])) / scale2).collect();

    let coplanar = d2.iter().all(|d| d.abs() <= eps);
    if coplanar {
        let n = n1 / scale1;
        let area = coplanar_overlap_area(t1, t2, &n);
        if area > 0.0 {
            return TriContact::CoplanarOverlap(area);
        }
        return TriContact::CoplanarDisjoint;
    }

    // strict one-side separation with tolerance
    if d2.iter().all(|&d| d > eps) || d2.iter().all(|&d| d < -eps) {
        return TriContact::Disjoint;
    }
    if d1.iter().all(|&d| d > eps) || d1.iter().all(|&d| d < -eps) {
        return TriContact::Disjoint;
    }

    // intersection line of the two planes
    let dir = n1.cross(&n2);
    if dir.norm() <= 1e-14 * scale1 * scale2 {
        // parallel but not coplanar
        return TriContact::Disjoint;
    }
    let dir = dir.normalize();
    // each triangle meets the other plane in an interval of crossing
    // points; the contact is the overlap of the two intervals
    let i1 = straddle_interval(t1, [d1[0], d1[1], d1[2]], &dir, eps);
    let i2 = straddle_interval(t2, [d2[0], d2[1], d2[2]], &dir, eps);
    let (Some((lo1, hi1)), Some((lo2, hi2))) = (i1, i2) else {
        return TriContact::Disjoint;
    };
    let lo = if lo1.0 >= lo2.0 { lo1 } else { lo2 };
    let hi = if hi1.0 <= hi2.0 { hi1 } else { hi2 };
    if lo.0 > hi.0 + eps {
        return TriContact::Disjoint;
    }
    TriContact::Segment(lo.1, hi.1)
}

fn point_segment_distance(p: &Vector3<f64>, a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    let d = b - a;
    let dd = d.norm_squared();
    if dd == 0.0 {
        return (p - a).norm();
    }
    let t = ((p - a).dot(&d) / dd).clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

fn point_triangle_distance(p: &Vector3<f64>, t: &Tri) -> f64 {
    let n = tri_normal(t);
    let nn = n.norm_squared();
    if nn > 0.0 {
        let proj = p - n * (n.dot(&(p - t[0])) / nn);
        // inside test via same-side checks
        let mut inside = true;
        for i in 0..3 {
            let a = t[i];
            let b = t[(i + 1) % 3];
            let c = t[(i + 2) % 3];
            let edge_n = n.cross(&(b - a));
            if edge_n.dot(&(proj - a)) * edge_n.dot(&(c - a)) < 0.0 {
                inside = false;
                break;
            }
        }
        if inside {
            return (p - proj).norm();
        }
    }
    (0..3)
        .map(|i| point_segment_distance(p, &t[i], &t[(i + 1) % 3]))
        .fold(f64::INFINITY, f64::min)
}

fn segment_segment_distance(
    p1: &Vector3<f64>,
    q1: &Vector3<f64>,
    p2: &Vector3<f64>,
    q2: &Vector3<f64>,
) -> f64 {
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    let (s, t);
    if a <= 1e-30 && e <= 1e-30 {
        return r.norm();
    }
    if a <= 1e-30 {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= 1e-30 {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let s0 = if denom > 1e-30 {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t = 0.0;
                s = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t = 1.0;
                s = ((b - c) / a).clamp(0.0, 1.0);
            } else {
                s = s0;
                t = t0;
            }
        }
    }
    ((p1 + d1 * s) - (p2 + d2 * t)).norm()
}

/// Minimum distance between two triangles (0 when they intersect is the
/// caller's concern; this is the candidate-based separation distance).
pub fn tri_tri_distance(t1: &Tri, t2: &Tri) -> f64 {
    let mut d = f64::INFINITY;
    for i in 0..3 {
        d = d.min(point_triangle_distance(&t1[i], t2));
        d = d.min(point_triangle_distance(&t2[i], t1));
        for j in 0..3 {
            d = d.min(segment_segment_distance(
                &t1[i],
                &t1[(i + 1) % 3],
                &t2[j],
                &t2[(j + 1) % 3],
            ));
        }
    }
    d
}

/// Minimum of the quadratic `(x - c)^T A (x - c)` along the segment
/// `[p, q]`.
pub fn quadric_min_on_segment(
    a: &Matrix3<f64>,
    c: &Vector3<f64>,
    p: &Vector3<f64>,
    q: &Vector3<f64>,
) -> f64 {
    let u = p - c;
    let d = q - p;
    let qa = (a * d).dot(&d);
    let qb = (a * u).dot(&d) * 2.0;
    let qc = (a * u).dot(&u);
    let eval = |t: f64| qa * t * t + qb * t + qc;
    let mut best = eval(0.0).min(eval(1.0));
    if qa > 0.0 {
        let t = (-qb / (2.0 * qa)).clamp(0.0, 1.0);
        best = best.min(eval(t));
    }
    best
}
