//! Shared fixtures and independent oracles for the integration suites.
//!
//! Everything here deliberately avoids the implementation paths it is
//! used to check: distances come from cross-ratios, volumes from an
//! adaptive refinement driven by local error estimates, and the ideal
//! tetrahedron volume from the Lobachevsky series.

#![allow(dead_code)]

use nalgebra::{Matrix3, Matrix4, Vector3};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use polyrigid_core::hyp::KleinPoint;
use polyrigid_core::mesh::{
    instance_mesh, triangulate_cellulation, validate_cellulation, validate_mesh, Instance,
    Triangulation,
};
use polyrigid_core::shapes;
use polyrigid_core::simplex::HyperidealSimplex;

/// Lobachevsky function by its Fourier series:
/// `Λ(θ) = 1/2 Σ sin(2nθ)/n²`.
pub fn lobachevsky(theta: f64, terms: usize) -> f64 {
    let mut sum = 0.0;
    for n in 1..=terms {
        let nf = n as f64;
        sum += (2.0 * nf * theta).sin() / (nf * nf);
    }
    sum / 2.0
}

/// Volume of the regular ideal tetrahedron, `3 Λ(π/3)`.
pub fn ideal_regular_volume() -> f64 {
    3.0 * lobachevsky(std::f64::consts::FRAC_PI_3, 2_000_000)
}

/// Hyperbolic distance between interior chart points by the half-log
/// cross-ratio along the chord (independent of the lift formula).
pub fn cross_ratio_distance(p: &Vector3<f64>, q: &Vector3<f64>) -> f64 {
    let d = q - p;
    let len = d.norm();
    if len == 0.0 {
        return 0.0;
    }
    let dir = d / len;
    // chord endpoints: solve |p + t dir| = 1
    let b = p.dot(&dir);
    let c = p.norm_squared() - 1.0;
    let disc = (b * b - c).sqrt();
    let t_a = -b - disc; // behind p
    let t_b = -b + disc; // beyond q
    let a_point = p + dir * t_a;
    let b_point = p + dir * t_b;
    let aq = (q - a_point).norm();
    let ap = (p - a_point).norm();
    let bp = (p - b_point).norm();
    let bq = (q - b_point).norm();
    ((aq * bp) / (ap * bq)).ln() / 2.0
}

/// Path length of the straight chord from `p` to `q` in the Klein
/// metric, by composite Simpson quadrature (oracle for `hyp_distance`).
pub fn klein_chord_length(p: &Vector3<f64>, q: &Vector3<f64>, panels: usize) -> f64 {
    let speed = |t: f64| -> f64 {
        let x = p + (q - p) * t;
        let g = polyrigid_core::hyp::klein_metric(&KleinPoint(x)).unwrap();
        let v = q - p;
        (g * v).dot(&v).sqrt()
    };
    let h = 1.0 / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let a = k as f64 * h;
        total += h / 6.0 * (speed(a) + 4.0 * speed(a + h / 2.0) + speed(a + h));
    }
    total
}

fn keast15() -> Vec<([f64; 4], f64)> {
    let s15 = 15.0f64.sqrt();
    let b1 = (7.0 - s15) / 34.0;
    let a1 = 1.0 - 3.0 * b1;
    let w1 = (2665.0 + 14.0 * s15) / 37800.0;
    let b2 = (7.0 + s15) / 34.0;
    let a2 = 1.0 - 3.0 * b2;
    let w2 = (2665.0 - 14.0 * s15) / 37800.0;
    let c = (10.0 - 2.0 * s15) / 40.0;
    let d = (10.0 + 2.0 * s15) / 40.0;
    let w3 = 10.0 / 189.0;
    let mut pts = vec![([0.25; 4], 16.0 / 135.0)];
    for k in 0..4 {
        let mut p = [b1; 4];
        p[k] = a1;
        pts.push((p, w1));
        let mut p = [b2; 4];
        p[k] = a2;
        pts.push((p, w2));
    }
    for i in 0..4 {
        for j in (i + 1)..4 {
            let mut p = [d; 4];
            p[i] = c;
            p[j] = c;
            pts.push((p, w3));
        }
    }
    pts
}

fn density(x: &Vector3<f64>) -> f64 {
    let d = 1.0 - x.norm_squared();
    1.0 / (d * d)
}

fn rule_apply(t: &[Vector3<f64>; 4], rule: &[([f64; 4], f64)]) -> f64 {
    let a = t[1] - t[0];
    let b = t[2] - t[0];
    let c = t[3] - t[0];
    let vol = a.dot(&b.cross(&c)).abs() / 6.0;
    rule.iter()
        .map(|(bary, w)| {
            let x = t[0] * bary[0] + t[1] * bary[1] + t[2] * bary[2] + t[3] * bary[3];
            w * density(&x)
        })
        .sum::<f64>()
        * vol
}

fn split8(t: &[Vector3<f64>; 4]) -> [[Vector3<f64>; 4]; 8] {
    let m01 = (t[0] + t[1]) / 2.0;
    let m02 = (t[0] + t[2]) / 2.0;
    let m03 = (t[0] + t[3]) / 2.0;
    let m12 = (t[1] + t[2]) / 2.0;
    let m13 = (t[1] + t[3]) / 2.0;
    let m23 = (t[2] + t[3]) / 2.0;
    [
        [t[0], m01, m02, m03],
        [t[1], m01, m12, m13],
        [t[2], m02, m12, m23],
        [t[3], m03, m13, m23],
        [m02, m13, m01, m03],
        [m02, m13, m03, m23],
        [m02, m13, m23, m12],
        [m02, m13, m12, m01],
    ]
}

fn adaptive_tet(t: &[Vector3<f64>; 4], budget: f64, rule: &[([f64; 4], f64)], depth: usize) -> f64 {
    let coarse = rule_apply(t, rule);
    let children = split8(t);
    let fine: f64 = children.iter().map(|c| rule_apply(c, rule)).sum();
    let err = (fine - coarse).abs();
    if err <= budget || depth >= 12 {
        return fine + (fine - coarse) / 63.0;
    }
    children
        .iter()
        .map(|c| adaptive_tet(c, budget / 8.0, rule, depth + 1))
        .sum()
}

/// Adaptive hyperbolic volume of the truncated simplex: per-tetrahedron
/// recursion driven by local error estimates, independent of the
/// uniform-refinement strategy used by `simplex_volume`.
pub fn adaptive_volume(s: &HyperidealSimplex, tol: f64) -> f64 {
    let truncated = polyrigid_core::simplex::truncate(s).unwrap();
    let p = &truncated.polytope;
    let centroid = p.vertex_mean();
    let rule = keast15();
    let mut tets = Vec::new();
    for facet in &p.facets {
        for k in 1..facet.len() - 1 {
            tets.push([
                centroid,
                p.vertices[facet[0]],
                p.vertices[facet[k]],
                p.vertices[facet[k + 1]],
            ]);
        }
    }
    let rough: f64 = tets.iter().map(|t| rule_apply(t, &rule)).sum();
    let budget = tol * rough.abs() / tets.len() as f64;
    tets.iter().map(|t| adaptive_tet(t, budget, &rule, 0)).sum()
}

/// Random hyperideal simplex: regular simplex at a random scale with
/// each vertex perturbed, retried until it validates.
pub fn random_simplex(rng: &mut StdRng) -> HyperidealSimplex {
    loop {
        let scale = rng.random_range(1.15..1.45);
        let dirs = shapes::regular_tetra_directions();
        let mut vs = [KleinPoint::new(0.0, 0.0, 0.0); 4];
        for (k, dir) in dirs.iter().enumerate() {
            let noise = Vector3::new(
                rng.random_range(-0.08..0.08),
                rng.random_range(-0.08..0.08),
                rng.random_range(-0.08..0.08),
            );
            vs[k] = KleinPoint(dir * scale + noise);
        }
        if let Ok(s) = HyperidealSimplex::new(vs) {
            return s;
        }
    }
}

/// Random interior point of the unit ball, away from the boundary.
pub fn random_interior(rng: &mut StdRng) -> KleinPoint {
    loop {
        let v = Vector3::new(
            rng.random_range(-0.9..0.9),
            rng.random_range(-0.9..0.9),
            rng.random_range(-0.9..0.9),
        );
        if v.norm() < 0.9 {
            return KleinPoint(v);
        }
    }
}

/// Random hyperideal point with norm in the given range.
pub fn random_hyperideal(rng: &mut StdRng, lo: f64, hi: f64) -> KleinPoint {
    loop {
        let v = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if v.norm() > 0.1 {
            return KleinPoint(v / v.norm() * rng.random_range(lo..hi));
        }
    }
}

/// Random invertible affine map with determinant kept away from zero.
pub fn random_affine(rng: &mut StdRng) -> (Matrix3<f64>, Vector3<f64>) {
    loop {
        let m: Matrix3<f64> = Matrix3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let det = m.determinant().abs();
        if (0.3..3.0).contains(&det) {
            let t = Vector3::from_fn(|_, _| rng.random_range(-0.5..0.5));
            return (m, t);
        }
    }
}

/// Random Minkowski isometry: rotation–boost–rotation with bounded
/// rapidity.
pub fn random_isometry(rng: &mut StdRng) -> Matrix4<f64> {
    use polyrigid_core::hyp::so31;
    let r1 = so31::rotation(0, 1, rng.random_range(0.0..std::f64::consts::TAU));
    let r2 = so31::rotation(1, 2, rng.random_range(0.0..std::f64::consts::TAU));
    let b = so31::boost(rng.random_range(0..3usize), rng.random_range(-0.4..0.4));
    r1 * b * r2
}

/// Validated triangulation of an instance.
pub fn triangulation_of(inst: &Instance) -> Triangulation {
    let mesh = validate_mesh(instance_mesh(inst)).expect("valid mesh");
    let cells =
        validate_cellulation(&mesh, inst.cells.as_ref().expect("cells")).expect("valid cells");
    triangulate_cellulation(&cells).expect("triangulates")
}

pub fn seeded(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}
