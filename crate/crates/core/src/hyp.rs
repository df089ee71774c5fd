//! Minkowski and Klein-model primitives.
//!
//! Hyperbolic 3-space is the open unit ball `B0` in the affine chart
//! `{t = 1}` of Minkowski space R^4 with signature (+,+,+,-); de Sitter
//! space is the unit quadric `<X,X> = 1` of the same form. A hyperideal
//! point (outside the closed ball) lifts to de Sitter space, and its
//! polar plane with respect to the unit sphere is the hyperbolic plane
//! orthogonal to every line through the point.
//!
//! Conventions fixed here and relied on everywhere else:
//! * lifts are normalized with positive 4th coordinate, so that
//!   `-<V,W> > 1` exactly when the chord between the chart points
//!   crosses the ball and `arccosh` is defined;
//! * face conormals point out of the measured wedge, so the interior
//!   dihedral angle is `arccos(-<N1,N2>)`.

use nalgebra::{Matrix3, Vector3, Vector4};

use crate::error::HypError;
use crate::tol::EPS_CLASS;

/// Vector of Minkowski R^4 with signature (+,+,+,-).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinkowskiVec(pub Vector4<f64>);

impl MinkowskiVec {
    pub fn new(x1: f64, x2: f64, x3: f64, x4: f64) -> Self {
        Self(Vector4::new(x1, x2, x3, x4))
    }

    /// Spatial part (first three coordinates).
    pub fn spatial(&self) -> Vector3<f64> {
        self.0.xyz()
    }

    /// Vertical (timelike) coordinate.
    pub fn t(&self) -> f64 {
        self.0.w
    }
}

/// Minkowski inner product `x1 y1 + x2 y2 + x3 y3 - x4 y4`.
pub fn mink_inner(x: &MinkowskiVec, y: &MinkowskiVec) -> f64 {
    x.0.x * y.0.x + x.0.y * y.0.y + x.0.z * y.0.z - x.0.w * y.0.w
}

/// Point of the affine chart `{t = 1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KleinPoint(pub Vector3<f64>);

/// Classification of a chart point against the unit sphere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PointClass {
    Interior,
    Ideal,
    Hyperideal,
}

impl KleinPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self(Vector3::new(x, y, z))
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Classifies the point with the `EPS_CLASS` tolerance; points within
    /// tolerance of the sphere are `Ideal` and rejected by the lifting
    /// operations.
    pub fn classify(&self) -> PointClass {
        let n = self.norm();
        if n < 1.0 - EPS_CLASS {
            PointClass::Interior
        } else if n > 1.0 + EPS_CLASS {
            PointClass::Hyperideal
        } else {
            PointClass::Ideal
        }
    }
}

/// Hyperbolic plane, stored as its de Sitter polar point `N` with
/// `<N,N> = 1`. The plane is `{X in H^3 : <X,N> = 0}`; in the chart it
/// is the affine plane `{x . n = c}` with `n` the spatial part of `N`
/// and `c` its vertical coordinate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HPlane {
    normal: MinkowskiVec,
}

impl HPlane {
    /// Wraps a unit de Sitter vector as a plane. Callers must pass
    /// `<N,N> = 1`; this is debug-asserted, not re-normalized.
    pub fn from_polar(normal: MinkowskiVec) -> Self {
        debug_assert!((mink_inner(&normal, &normal) - 1.0).abs() < 1e-9);
        Self { normal }
    }

    pub fn polar(&self) -> MinkowskiVec {
        self.normal
    }

    /// Chart description `(n, c)` of the plane `{x . n = c}` with `n`
    /// of unit Euclidean length.
    pub fn chart(&self) -> (Vector3<f64>, f64) {
        let n = self.normal.spatial();
        let scale = n.norm();
        (n / scale, self.normal.t() / scale)
    }

    /// Signed chart evaluation `x . n - c` with the unit chart normal.
    pub fn chart_eval(&self, x: &Vector3<f64>) -> f64 {
        let (n, c) = self.chart();
        x.dot(&n) - c
    }
}

/// Lifts a hyperideal chart point to de Sitter space:
/// `V = (v, 1) / sqrt(|v|^2 - 1)`, so `<V,V> = 1` and `t > 0`.
pub fn lift_hyperideal(v: &KleinPoint) -> Result<MinkowskiVec, HypError> {
    if v.classify() != PointClass::Hyperideal {
        return Err(HypError::NotHyperideal { norm: v.norm() });
    }
    let s = (v.0.norm_squared() - 1.0).sqrt();
    Ok(MinkowskiVec::new(v.0.x / s, v.0.y / s, v.0.z / s, 1.0 / s))
}

/// Lifts an interior chart point to the hyperboloid:
/// `P = (p, 1) / sqrt(1 - |p|^2)`, so `<P,P> = -1` and `t > 0`.
pub fn lift_interior(p: &KleinPoint) -> Result<MinkowskiVec, HypError> {
    if p.classify() != PointClass::Interior {
        return Err(HypError::NotInterior { norm: p.norm() });
    }
    let s = (1.0 - p.0.norm_squared()).sqrt();
    Ok(MinkowskiVec::new(p.0.x / s, p.0.y / s, p.0.z / s, 1.0 / s))
}

/// Projects a Minkowski vector with nonzero vertical coordinate back to
/// the chart `{t = 1}`.
pub fn project_to_chart(x: &MinkowskiVec) -> KleinPoint {
    KleinPoint(x.spatial() / x.t())
}

/// Dual (polar) plane of a hyperideal point: `{x . v = 1}` in the chart,
/// i.e. the plane whose de Sitter polar point is the lift of `v`.
pub fn dual_plane(v: &KleinPoint) -> Result<HPlane, HypError> {
    Ok(HPlane::from_polar(lift_hyperideal(v)?))
}

/// Klein-model metric tensor at an interior point:
/// `g_ij = d_ij / (1 - |x|^2) + x_i x_j / (1 - |x|^2)^2`.
pub fn klein_metric(x: &KleinPoint) -> Result<Matrix3<f64>, HypError> {
    if x.classify() != PointClass::Interior {
        return Err(HypError::NotInterior { norm: x.norm() });
    }
    let r2 = x.0.norm_squared();
    let a = 1.0 / (1.0 - r2);
    let b = a * a;
    let mut g = Matrix3::identity() * a;
    g += b * x.0 * x.0.transpose();
    Ok(g)
}

/// Hyperbolic distance between interior points: `cosh d = -<P,Q>`.
///
/// Evaluated through `cosh d - 1` to stay accurate for nearby points:
/// `(1 - p.q)^2 - (1-|p|^2)(1-|q|^2) = |p-q|^2 - |p x q|^2`.
pub fn hyp_distance(p: &KleinPoint, q: &KleinPoint) -> Result<f64, HypError> {
    if p.classify() != PointClass::Interior {
        return Err(HypError::NotInterior { norm: p.norm() });
    }
    if q.classify() != PointClass::Interior {
        return Err(HypError::NotInterior { norm: q.norm() });
    }
    let s = 1.0 - p.0.dot(&q.0);
    let ab = ((1.0 - p.0.norm_squared()) * (1.0 - q.0.norm_squared())).sqrt();
    let num = (p.0 - q.0).norm_squared() - p.0.cross(&q.0).norm_squared();
    let x = (num / (ab * (s + ab))).max(0.0); // cosh d - 1
    Ok((x + (x * (x + 2.0)).sqrt()).ln_1p())
}

/// Closest approach of the closed segment `[a, b]` to the origin.
pub(crate) fn segment_min_norm(a: &Vector3<f64>, b: &Vector3<f64>) -> f64 {
    let d = b - a;
    let dd = d.norm_squared();
    if dd == 0.0 {
        return a.norm();
    }
    let t = (-a.dot(&d) / dd).clamp(0.0, 1.0);
    (a + t * d).norm()
}

/// Truncated edge length between two hyperideal points: the hyperbolic
/// distance, along the edge, between the dual planes of its endpoints.
/// Equals `arccosh(-<V,W>)` for the positive lifts.
pub fn truncated_edge_length(v: &KleinPoint, w: &KleinPoint) -> Result<f64, HypError> {
    let vl = lift_hyperideal(v)?;
    let wl = lift_hyperideal(w)?;
    let dist = segment_min_norm(&v.0, &w.0);
    if dist >= 1.0 - EPS_CLASS {
        return Err(HypError::EdgeMissesBall { dist });
    }
    let c = -mink_inner(&vl, &wl);
    debug_assert!(c > 1.0);
    Ok(c.max(1.0).acosh())
}

/// Plane through three chart points, oriented by the ordered triple's
/// normal `(p2 - p1) x (p3 - p1)`.
pub fn plane_of_face(
    p1: &KleinPoint,
    p2: &KleinPoint,
    p3: &KleinPoint,
) -> Result<HPlane, HypError> {
    let a = p2.0 - p1.0;
    let b = p3.0 - p1.0;
    let m = a.cross(&b);
    let scale = a.norm().max(b.norm()).max(1e-300);
    if m.norm() <= 1e-12 * scale * scale {
        return Err(HypError::DegenerateFace);
    }
    let m = m.normalize();
    let c = m.dot(&p1.0);
    if c.abs() >= 1.0 - EPS_CLASS {
        return Err(HypError::PlaneMissesBall { dist: c.abs() });
    }
    let s = (1.0 - c * c).sqrt();
    Ok(HPlane::from_polar(MinkowskiVec::new(
        m.x / s,
        m.y / s,
        m.z / s,
        c / s,
    )))
}

/// Interior dihedral angle between two intersecting planes whose
/// conormals point out of the measured wedge: `theta = arccos(-<N1,N2>)`.
pub fn dihedral_angle(n1: &HPlane, n2: &HPlane) -> Result<f64, HypError> {
    let inner = mink_inner(&n1.polar(), &n2.polar());
    if inner.abs() >= 1.0 {
        return Err(HypError::PlanesDisjoint { inner });
    }
    Ok((-inner).acos())
}

/// Applies a linear Minkowski isometry to a chart point by lifting,
/// transforming, and re-projecting. The caller must ensure the image
/// keeps a nonzero vertical coordinate.
pub fn apply_isometry_hyperideal(
    m: &nalgebra::Matrix4<f64>,
    v: &KleinPoint,
) -> Result<KleinPoint, HypError> {
    let lifted = lift_hyperideal(v)?;
    let image = MinkowskiVec(m * lifted.0);
    Ok(project_to_chart(&image))
}

/// Rotation about the x3-axis and boost in the (x3, t)-plane, the two
/// generators used by the test isometries.
pub mod so31 {
    use nalgebra::Matrix4;

    /// Rotation by `angle` in the (x_i, x_j) coordinate plane.
    pub fn rotation(i: usize, j: usize, angle: f64) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        let (c, s) = (angle.cos(), angle.sin());
        m[(i, i)] = c;
        m[(j, j)] = c;
        m[(i, j)] = -s;
        m[(j, i)] = s;
        m
    }

    /// Boost of rapidity `phi` in the (x_i, t)-plane, `i < 3`.
    pub fn boost(i: usize, phi: f64) -> Matrix4<f64> {
        let mut m = Matrix4::identity();
        let (c, s) = (phi.cosh(), phi.sinh());
        m[(i, i)] = c;
        m[(i, 3)] = s;
        m[(3, i)] = s;
        m[(3, 3)] = c;
        m
    }
}
