//! Hyperideal simplex geometry: dihedral angles, truncated edge
//! lengths, volume by quadrature, the Schläfli gradient, the
//! angles -> simplex solver, and the volume Hessian.
//!
//! A hyperideal simplex is four Klein-chart points outside the closed
//! unit ball whose six edges all cross the open ball. Its volume is the
//! hyperbolic volume of the compact polytope obtained by cutting each
//! end with the dual plane of its vertex; in the chart this is
//! `integral over the truncated polytope of (1 - |x|^2)^{-2} dx`.
//!
//! Edge indexing is fixed as `(e12, e13, e14, e23, e24, e34)` in vertex
//! order `v1..v4` (0-based pairs below).

use nalgebra::{Matrix3, Matrix4, Matrix6, Vector3, Vector4, Vector6};

use crate::error::SimplexError;
use crate::hyp::{
    self, dihedral_angle, lift_hyperideal, plane_of_face, segment_min_norm, truncated_edge_length,
    HPlane, KleinPoint, MinkowskiVec,
};
use crate::polytope::{polytope_from_halfspaces, ConvexPolytope, Halfspace};
use crate::tol::{EPS_CLASS, HESS_STEP, SOLVE_TOL};

/// Vertex-index pairs of the six edges, in canonical order.
pub const EDGE_PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Edges incident to each vertex (indices into `EDGE_PAIRS`).
pub const VERTEX_EDGES: [[usize; 3]; 4] = [[0, 1, 2], [0, 3, 4], [1, 3, 5], [2, 4, 5]];

/// Four hyperideal Klein points with all six edges crossing the ball.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperidealSimplex {
    vertices: [KleinPoint; 4],
}

/// Six interior dihedral angles in `EDGE_PAIRS` order, each in (0, pi),
/// with the strict vertex-sum condition: at every vertex the three
/// exterior angles `pi - theta` sum to more than `2 pi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexAngles(pub [f64; 6]);

impl SimplexAngles {
    /// Margin of the vertex-sum condition at each vertex:
    /// `sum(pi - theta) - 2 pi`, strictly positive inside the polytope.
    pub fn vertex_margins(&self) -> [f64; 4] {
        let mut m = [0.0; 4];
        for (v, edges) in VERTEX_EDGES.iter().enumerate() {
            let sum: f64 = edges
                .iter()
                .map(|&e| std::f64::consts::PI - self.0[e])
                .sum();
            m[v] = sum - 2.0 * std::f64::consts::PI;
        }
        m
    }

    /// Distance from the open polytope boundary: the smallest of the
    /// vertex margins and the distances of each angle to {0, pi}.
    pub fn interior_margin(&self) -> f64 {
        let mut m = f64::INFINITY;
        for &t in &self.0 {
            m = m.min(t).min(std::f64::consts::PI - t);
        }
        for v in self.vertex_margins() {
            m = m.min(v);
        }
        m
    }
}

impl HyperidealSimplex {
    /// Validates and wraps four chart points.
    pub fn new(vertices: [KleinPoint; 4]) -> Result<Self, SimplexError> {
        for v in &vertices {
            lift_hyperideal(v)?;
        }
        for &(i, j) in &EDGE_PAIRS {
            let d = segment_min_norm(&vertices[i].0, &vertices[j].0);
            if d >= 1.0 - EPS_CLASS {
                return Err(SimplexError::Hyp(crate::error::HypError::EdgeMissesBall {
                    dist: d,
                }));
            }
        }
        let a = vertices[1].0 - vertices[0].0;
        let b = vertices[2].0 - vertices[0].0;
        let c = vertices[3].0 - vertices[0].0;
        if a.dot(&b.cross(&c)).abs() / 6.0 <= 1e-14 {
            return Err(SimplexError::DegenerateTruncation);
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[KleinPoint; 4] {
        &self.vertices
    }

    /// Outward-oriented plane of the face opposite vertex `k`.
    pub fn face_plane(&self, k: usize) -> Result<HPlane, SimplexError> {
        let idx: Vec<usize> = (0..4).filter(|&i| i != k).collect();
        let plane = plane_of_face(
            &self.vertices[idx[0]],
            &self.vertices[idx[1]],
            &self.vertices[idx[2]],
        )?;
        // outward: the opposite vertex lies strictly on the negative side
        if plane.chart_eval(&self.vertices[k].0) > 0.0 {
            let p = plane.polar();
            Ok(HPlane::from_polar(MinkowskiVec(-p.0)))
        } else {
            Ok(plane)
        }
    }
}

/// Interior dihedral angles of the simplex at its six edges.
pub fn simplex_dihedrals(s: &HyperidealSimplex) -> Result<SimplexAngles, SimplexError> {
    let planes: Vec<HPlane> = (0..4).map(|k| s.face_plane(k)).collect::<Result<_, _>>()?;
    let mut angles = [0.0; 6];
    for (e, &(i, j)) in EDGE_PAIRS.iter().enumerate() {
        // faces containing edge (i, j) are those opposite the other two
        let others: Vec<usize> = (0..4).filter(|&k| k != i && k != j).collect();
        angles[e] = dihedral_angle(&planes[others[0]], &planes[others[1]])?;
    }
    Ok(SimplexAngles(angles))
}

/// Truncated edge lengths at the six edges.
pub fn simplex_lengths(s: &HyperidealSimplex) -> Result<[f64; 6], SimplexError> {
    let mut lengths = [0.0; 6];
    for (e, &(i, j)) in EDGE_PAIRS.iter().enumerate() {
        lengths[e] = truncated_edge_length(&s.vertices[i], &s.vertices[j])?;
    }
    Ok(lengths)
}

/// Compact polytope obtained by truncating each end of the simplex with
/// the dual plane of its vertex, with the facets classified.
#[derive(Debug, Clone)]
pub struct TruncatedPolytope {
    pub polytope: ConvexPolytope,
    /// Facet indices carried by the four dual (truncation) planes.
    pub truncation_facets: Vec<usize>,
    /// Facet indices carried by the four simplex face planes.
    pub face_facets: Vec<usize>,
}

/// Intersects the Euclidean tetrahedron with the four dual halfspaces
/// `{x . v_i <= 1}` and enumerates the vertices.
pub fn truncate(s: &HyperidealSimplex) -> Result<TruncatedPolytope, SimplexError> {
    let mut halfspaces = Vec::with_capacity(8);
    for k in 0..4 {
        let plane = s.face_plane(k)?;
        let (n, c) = plane.chart();
        halfspaces.push(Halfspace::new(n, c));
    }
    for v in s.vertices() {
        halfspaces.push(Halfspace::new(v.0, 1.0));
    }
    let eps = 1e-11;
    let Some(polytope) = polytope_from_halfspaces(&halfspaces, eps) else {
        return Err(SimplexError::DegenerateTruncation);
    };
    for v in &polytope.vertices {
        if v.norm() >= 1.0 {
            return Err(SimplexError::DegenerateTruncation);
        }
    }
    // classify facets by matching supporting planes
    let mut truncation_facets = Vec::new();
    let mut face_facets = Vec::new();
    for (fi, plane) in polytope.planes.iter().enumerate() {
        let mut matched = false;
        for (hi, h) in halfspaces.iter().enumerate() {
            if (plane.normal - h.normal).norm() < 1e-7 && (plane.offset - h.offset).abs() < 1e-7 {
                if hi < 4 {
                    face_facets.push(fi);
                } else {
                    truncation_facets.push(fi);
                }
                matched = true;
                break;
            }
        }
        if !matched {
            return Err(SimplexError::DegenerateTruncation);
        }
    }
    if truncation_facets.len() != 4 || face_facets.len() != 4 {
        return Err(SimplexError::DegenerateTruncation);
    }
    Ok(TruncatedPolytope {
        polytope,
        truncation_facets,
        face_facets,
    })
}

/// Klein-model hyperbolic volume element.
#[inline]
fn volume_density(x: &Vector3<f64>) -> f64 {
    let d = 1.0 - x.norm_squared();
    1.0 / (d * d)
}

// Keast degree-5 symmetric rule on the tetrahedron: 15 points, all
// weights positive, exact for polynomials of total degree <= 5.
fn keast15() -> [([f64; 4], f64); 15] {
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
    let wc = 16.0 / 135.0;
    let mut pts = Vec::with_capacity(15);
    pts.push(([0.25, 0.25, 0.25, 0.25], wc));
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
    pts.try_into().unwrap()
}

fn tet_vol(t: &[Vector3<f64>; 4]) -> f64 {
    let a = t[1] - t[0];
    let b = t[2] - t[0];
    let c = t[3] - t[0];
    a.dot(&b.cross(&c)).abs() / 6.0
}

fn rule_integral(t: &[Vector3<f64>; 4], rule: &[([f64; 4], f64); 15]) -> f64 {
    let vol = tet_vol(t);
    let mut sum = 0.0;
    for (bary, w) in rule {
        let x = t[0] * bary[0] + t[1] * bary[1] + t[2] * bary[2] + t[3] * bary[3];
        sum += w * volume_density(&x);
    }
    sum * vol
}

fn subdivide(t: &[Vector3<f64>; 4]) -> [[Vector3<f64>; 4]; 8] {
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

fn integrate_level(t: &[Vector3<f64>; 4], level: usize, rule: &[([f64; 4], f64); 15]) -> f64 {
    if level == 0 {
        return rule_integral(t, rule);
    }
    subdivide(t)
        .iter()
        .map(|c| integrate_level(c, level - 1, rule))
        .sum()
}

/// Cones the facet fans of a truncated polytope from its vertex mean.
pub(crate) fn decompose_polytope(p: &ConvexPolytope) -> Vec<[Vector3<f64>; 4]> {
    let centroid = p.vertex_mean();
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
    tets
}

const MAX_REFINE_LEVEL: usize = 7;

/// Hyperbolic volume of the truncated simplex to relative accuracy
/// `tol`: fixed-order quadrature over the centroid-cone decomposition,
/// uniformly refined until the Richardson estimate drops below `tol`,
/// then extrapolated.
pub fn simplex_volume(s: &HyperidealSimplex, tol: f64) -> Result<f64, SimplexError> {
    let truncated = truncate(s)?;
    polytope_hyperbolic_volume(&truncated.polytope, tol)
}

/// Same quadrature applied to an arbitrary polytope strictly inside the
/// ball (used for assembled cell volumes).
pub fn polytope_hyperbolic_volume(p: &ConvexPolytope, tol: f64) -> Result<f64, SimplexError> {
    let rule = keast15();
    let base = decompose_polytope(p);
    // degree-5 rule: order-6 convergence under 2x refinement
    const ORDER_FACTOR: f64 = 63.0; // 2^6 - 1
    let mut prev: Option<f64> = None;
    for level in 0..=MAX_REFINE_LEVEL {
        let cur: f64 = base.iter().map(|t| integrate_level(t, level, &rule)).sum();
        if let Some(p) = prev {
            let est = (cur - p).abs() / ORDER_FACTOR;
            if est <= tol * cur.abs() {
                return Ok(cur + (cur - p) / ORDER_FACTOR);
            }
        }
        prev = Some(cur);
    }
    Err(SimplexError::QuadratureFailure {
        estimate: prev.unwrap_or(f64::NAN),
    })
}

/// Schläfli gradient of the volume with respect to the interior
/// dihedral angles: `dV/dtheta_e = -L_e / 2`.
pub fn schlafli_gradient(s: &HyperidealSimplex) -> Result<[f64; 6], SimplexError> {
    let lengths = simplex_lengths(s)?;
    Ok(lengths.map(|l| -l / 2.0))
}

/// Volume at a fixed refinement level (no adaptivity). Differences of
/// volumes taken at the same level carry strongly correlated quadrature
/// errors, which keeps finite-difference tests of the volume gradient
/// clean.
pub fn simplex_volume_at_level(s: &HyperidealSimplex, level: usize) -> Result<f64, SimplexError> {
    let truncated = truncate(s)?;
    let rule = keast15();
    Ok(decompose_polytope(&truncated.polytope)
        .iter()
        .map(|t| integrate_level(t, level, &rule))
        .sum())
}

/// Symmetric finite-difference test of the Schläfli formula: perturbs
/// the angles by `+/- step * direction` through the solver and returns
/// `|dV + 1/2 sum L_e dtheta_e| / |dtheta|`, which decays quadratically
/// in the step.
///
/// Volumes are evaluated at the fixed level pair `(level, level + 1)`
/// with Richardson extrapolation: a smooth function of the angles, so
/// the quadrature error cancels in the symmetric difference instead of
/// polluting the quadratic signal.
pub fn schlafli_residual(
    s: &HyperidealSimplex,
    direction: &[f64; 6],
    step: f64,
    level: usize,
) -> Result<f64, SimplexError> {
    let angles = simplex_dihedrals(s)?;
    let lengths = simplex_lengths(s)?;
    let extrapolated = |sx: &HyperidealSimplex| -> Result<f64, SimplexError> {
        let a = simplex_volume_at_level(sx, level)?;
        let b = simplex_volume_at_level(sx, level + 1)?;
        Ok(b + (b - a) / 63.0)
    };
    let mut plus = angles;
    let mut minus = angles;
    for k in 0..6 {
        plus.0[k] += step * direction[k];
        minus.0[k] -= step * direction[k];
    }
    // the solves must land well below the quadratic signal
    let tol = 1e-12;
    let sp = solve_from_angles_with_init(&plus, tol, &lengths)?;
    let sm = solve_from_angles_with_init(&minus, tol, &lengths)?;
    let dv = extrapolated(&sp)? - extrapolated(&sm)?;
    let mut linear = 0.0;
    let mut norm2 = 0.0;
    for k in 0..6 {
        let dtheta = 2.0 * step * direction[k];
        linear += lengths[k] / 2.0 * dtheta;
        norm2 += dtheta * dtheta;
    }
    Ok((dv + linear).abs() / norm2.sqrt())
}

// ---------------------------------------------------------------------
// angles -> simplex solver
// ---------------------------------------------------------------------

/// Builds the simplex with prescribed truncated edge lengths from the
/// Gram matrix `G_ii = 1`, `G_ij = -cosh(l_ij)` of its de Sitter lifts,
/// in a canonical position: the lift factorization is boosted so the
/// (timelike) lift sum points along the vertical axis, then rotated so
/// v1 sits on the positive x3-axis, v2 in the x1x3-plane with positive
/// x1, and v3 with positive x2.
pub fn simplex_from_lengths(lengths: &[f64; 6]) -> Result<HyperidealSimplex, SimplexError> {
    let mut g = Matrix4::<f64>::identity();
    for (e, &(i, j)) in EDGE_PAIRS.iter().enumerate() {
        if !(lengths[e] > 0.0 && lengths[e].is_finite()) {
            return Err(SimplexError::DegenerateTruncation);
        }
        let v = -lengths[e].cosh();
        g[(i, j)] = v;
        g[(j, i)] = v;
    }
    let eig = g.symmetric_eigen();
    // need signature (3, 1): three positive, one negative eigenvalue
    let mut neg = Vec::new();
    let mut pos = Vec::new();
    for k in 0..4 {
        if eig.eigenvalues[k] < 0.0 {
            neg.push(k);
        } else if eig.eigenvalues[k] > 0.0 {
            pos.push(k);
        }
    }
    if neg.len() != 1 || pos.len() != 3 {
        return Err(SimplexError::DegenerateTruncation);
    }
    // lift coordinates: spatial from positive eigenpairs, vertical from
    // the negative one
    let mut lifts = [Vector4::<f64>::zeros(); 4];
    for (col, &k) in pos.iter().enumerate() {
        let s = eig.eigenvalues[k].sqrt();
        for i in 0..4 {
            lifts[i][col] = s * eig.eigenvectors[(i, k)];
        }
    }
    let s = (-eig.eigenvalues[neg[0]]).sqrt();
    for i in 0..4 {
        lifts[i][3] = s * eig.eigenvectors[(i, neg[0])];
    }

    // interior timelike direction: the lift sum (always timelike here)
    let u: Vector4<f64> = lifts.iter().sum();
    let mink = |a: &Vector4<f64>, b: &Vector4<f64>| a.x * b.x + a.y * b.y + a.z * b.z - a.w * b.w;
    let uu = mink(&u, &u);
    if uu >= 0.0 {
        return Err(SimplexError::DegenerateTruncation);
    }
    let mut u = u / (-uu).sqrt();
    // make the interior direction future-pointing by a time reflection
    // of the whole configuration (an isometry, Gram unchanged)
    if u.w < 0.0 {
        u.w = -u.w;
        for l in lifts.iter_mut() {
            l.w = -l.w;
        }
    }
    // boost taking u to e4 as a double reflection
    let e4 = Vector4::new(0.0, 0.0, 0.0, 1.0);
    let reflect = |x: &Vector4<f64>, a: &Vector4<f64>| -> Vector4<f64> {
        let aa = a.x * a.x + a.y * a.y + a.z * a.z - a.w * a.w;
        let xa = x.x * a.x + x.y * a.y + x.z * a.z - x.w * a.w;
        x - a * (2.0 * xa / aa)
    };
    let axis = u + e4;
    let mut chart = [Vector3::<f64>::zeros(); 4];
    for i in 0..4 {
        let y = reflect(&reflect(&lifts[i], &axis), &e4);
        if y.w <= 0.0 {
            return Err(SimplexError::DegenerateTruncation);
        }
        chart[i] = y.xyz() / y.w;
    }

    // canonical rotation: v1 -> +x3 axis
    let r1 = rotation_to_z(&chart[0]);
    for c in chart.iter_mut() {
        *c = r1 * *c;
    }
    // v2 into the x1x3-plane with positive x1
    let phi = chart[1].y.atan2(chart[1].x);
    let r2 = Matrix3::new(
        phi.cos(),
        phi.sin(),
        0.0,
        -phi.sin(),
        phi.cos(),
        0.0,
        0.0,
        0.0,
        1.0,
    );
    for c in chart.iter_mut() {
        *c = r2 * *c;
    }
    // v3 with positive x2 (reflection is an isometry)
    if chart[2].y < 0.0 {
        for c in chart.iter_mut() {
            c.y = -c.y;
        }
    }

    HyperidealSimplex::new(chart.map(KleinPoint))
}

/// Rotation taking `v` to the positive x3-axis.
fn rotation_to_z(v: &Vector3<f64>) -> Matrix3<f64> {
    let a = v.normalize();
    let z = Vector3::z();
    let c = a.dot(&z);
    let axis = a.cross(&z);
    let s = axis.norm();
    if s < 1e-14 {
        if c > 0.0 {
            return Matrix3::identity();
        }
        // v along -z: rotate by pi about x
        return Matrix3::new(1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0);
    }
    let k = axis / s;
    let kx = Matrix3::new(0.0, -k.z, k.y, k.z, 0.0, -k.x, -k.y, k.x, 0.0);
    Matrix3::identity() + kx * s + kx * kx * (1.0 - c)
}

/// Lengths of the regular simplex at vertex norm `s`:
/// `cosh l = (3 + s^2) / (3 (s^2 - 1))`.
pub fn regular_lengths(scale: f64) -> [f64; 6] {
    let c = (3.0 + scale * scale) / (3.0 * (scale * scale - 1.0));
    [c.acosh(); 6]
}

/// Interior dihedral angle of the regular simplex at vertex norm `s`:
/// `cos theta = (3 + s^2) / (9 - s^2)`.
pub fn regular_angle(scale: f64) -> f64 {
    ((3.0 + scale * scale) / (9.0 - scale * scale)).acos()
}

fn angles_of_lengths(lengths: &[f64; 6]) -> Result<[f64; 6], SimplexError> {
    let s = simplex_from_lengths(lengths)?;
    Ok(simplex_dihedrals(&s)?.0)
}

/// Solves for the unique hyperideal simplex with the target interior
/// dihedral angles: damped Newton on the six edge lengths, initialized
/// at the regular simplex of scale 1.2, converging when the angle
/// residual infinity-norm drops below `tol`. The result is returned in
/// the canonical gauge-fixed position.
pub fn solve_from_angles(
    target: &SimplexAngles,
    tol: f64,
) -> Result<HyperidealSimplex, SimplexError> {
    solve_from_angles_with_init(target, tol, &regular_lengths(1.2))
}

/// Same solver with an explicit starting point in length space (used to
/// warm-start finite-difference sweeps).
pub fn solve_from_angles_with_init(
    target: &SimplexAngles,
    tol: f64,
    init: &[f64; 6],
) -> Result<HyperidealSimplex, SimplexError> {
    for (e, &t) in target.0.iter().enumerate() {
        if !(t > 0.0 && t < std::f64::consts::PI) {
            return Err(SimplexError::OutsidePolytope {
                vertex: EDGE_PAIRS[e].0,
                margin: f64::NEG_INFINITY,
            });
        }
    }
    let margins = target.vertex_margins();
    for (v, &m) in margins.iter().enumerate() {
        if m <= 1e-9 {
            return Err(SimplexError::OutsidePolytope {
                vertex: v,
                margin: m,
            });
        }
    }

    let mut lengths = *init;
    let residual = |l: &[f64; 6]| -> Result<Vector6<f64>, SimplexError> {
        let th = angles_of_lengths(l)?;
        Ok(Vector6::from_iterator(
            th.iter().zip(target.0.iter()).map(|(a, t)| a - t),
        ))
    };
    let mut r = residual(&lengths)?;
    let max_iter = 100;
    for _iter in 0..max_iter {
        if r.amax() < tol {
            return simplex_from_lengths(&lengths);
        }
        // finite-difference Jacobian d theta / d length
        let mut jac = Matrix6::<f64>::zeros();
        for col in 0..6 {
            let h = 1e-6 * lengths[col].max(1.0);
            let mut lp = lengths;
            lp[col] += h;
            let mut lm = lengths;
            lm[col] -= h;
            let tp = angles_of_lengths(&lp)?;
            let tm = angles_of_lengths(&lm)?;
            for row in 0..6 {
                jac[(row, col)] = (tp[row] - tm[row]) / (2.0 * h);
            }
        }
        let Some(delta) = jac.lu().solve(&r) else {
            return Err(SimplexError::NoConvergence {
                residual: r.amax(),
                iterations: _iter,
            });
        };
        // damped step: halve until the residual decreases and the
        // lengths stay valid
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let mut cand = lengths;
            let mut valid = true;
            for k in 0..6 {
                cand[k] -= step * delta[k];
                if cand[k] <= 1e-8 {
                    valid = false;
                    break;
                }
            }
            if valid {
                if let Ok(rc) = residual(&cand) {
                    if rc.amax() < r.amax() {
                        lengths = cand;
                        r = rc;
                        accepted = true;
                        break;
                    }
                }
            }
            step /= 2.0;
        }
        if !accepted {
            return Err(SimplexError::NoConvergence {
                residual: r.amax(),
                iterations: _iter,
            });
        }
    }
    if r.amax() < tol {
        return simplex_from_lengths(&lengths);
    }
    Err(SimplexError::NoConvergence {
        residual: r.amax(),
        iterations: max_iter,
    })
}

/// Hessian of the volume in angle coordinates: `-1/2` times the matrix
/// of length variations with respect to the angles, obtained by central
/// differences through the solver at steps `(h, h/2)` with Richardson
/// extrapolation, then symmetrized.
///
/// Also returns the relative asymmetry `|H - H^T| / |H|` observed before
/// symmetrization, a direct check of the Schläfli symmetry.
pub fn hessian_volume(s: &HyperidealSimplex) -> Result<(Matrix6<f64>, f64), SimplexError> {
    let base_angles = simplex_dihedrals(s)?;
    let base_lengths = simplex_lengths(s)?;
    let dl_dtheta_at = |h: f64| -> Result<Matrix6<f64>, SimplexError> {
        let mut m = Matrix6::zeros();
        for col in 0..6 {
            let mut tp = base_angles;
            tp.0[col] += h;
            let mut tm = base_angles;
            tm.0[col] -= h;
            let sp = solve_from_angles_with_init(&tp, SOLVE_TOL, &base_lengths)?;
            let sm = solve_from_angles_with_init(&tm, SOLVE_TOL, &base_lengths)?;
            let lp = simplex_lengths(&sp)?;
            let lm = simplex_lengths(&sm)?;
            for row in 0..6 {
                m[(row, col)] = (lp[row] - lm[row]) / (2.0 * h);
            }
        }
        Ok(m)
    };
    let d_h = dl_dtheta_at(HESS_STEP)?;
    let d_h2 = dl_dtheta_at(HESS_STEP / 2.0)?;
    let d = (d_h2 * 4.0 - d_h) / 3.0;
    let h = d * (-0.5);
    let asym = (h - h.transpose()).norm() / h.norm();
    Ok(((h + h.transpose()) / 2.0, asym))
}

/// Applies a Minkowski isometry to all four vertices.
pub fn transform_simplex(
    s: &HyperidealSimplex,
    m: &Matrix4<f64>,
) -> Result<HyperidealSimplex, SimplexError> {
    let mut vs = [KleinPoint::new(0.0, 0.0, 0.0); 4];
    for (k, v) in s.vertices().iter().enumerate() {
        vs[k] = hyp::apply_isometry_hyperideal(m, v)?;
    }
    HyperidealSimplex::new(vs)
}
