//! The Pogorelov transformation between tangent vectors of the positive
//! de Sitter hemisphere and of the ball exterior, with numerical
//! Killing-field and metric-scaling verification.
//!
//! The positive hemisphere `{<X,X> = 1, x4 > 0}` charts onto the ball
//! exterior by the map `phi_S(X) = spatial(X)/x4`. Fixing the plane
//! `P0 = {t = 0}`, every point carries a radial direction (along the
//! timelike geodesic through the point orthogonal to `P0`) and lateral
//! directions (tangent to the spheres `{rho = const}`). The
//! transformation keeps the lateral part projectively (through
//! `d phi_S`) and transports the radial part by direction and norm; it
//! carries Killing fields to Killing fields, scaling metric Lie
//! derivatives by `sinh^2(rho)`.

use nalgebra::{Matrix4, Vector3, Vector4};

use crate::error::PogoError;
use crate::hyp::{lift_hyperideal, mink_inner, KleinPoint, MinkowskiVec};

/// Point of the positive de Sitter hemisphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeSitterPoint(MinkowskiVec);

impl DeSitterPoint {
    /// Validates `<X,X> = 1` (renormalizing small drift) and `x4 > 0`.
    pub fn new(x: MinkowskiVec) -> Result<Self, PogoError> {
        let q = mink_inner(&x, &x);
        if q <= 0.0 || (q - 1.0).abs() > 1e-6 {
            return Err(PogoError::NotPositiveHemisphere { x4: x.t() });
        }
        let x = MinkowskiVec(x.0 / q.sqrt());
        if x.t() <= 0.0 {
            return Err(PogoError::NotPositiveHemisphere { x4: x.t() });
        }
        Ok(Self(x))
    }

    /// Lift of a hyperideal chart point.
    pub fn from_chart(v: &KleinPoint) -> Result<Self, PogoError> {
        let lifted = lift_hyperideal(v).map_err(|_| PogoError::NotHyperideal { norm: v.norm() })?;
        Self::new(lifted)
    }

    pub fn coords(&self) -> MinkowskiVec {
        self.0
    }

    /// Oriented distance to `P0` along the radial geodesic:
    /// `rho = arcsinh(x4) = artanh(1/|phi_S(X)|)`.
    pub fn rho(&self) -> f64 {
        self.0.t().asinh()
    }

    /// Unit radial vector (towards increasing `rho`):
    /// `N = (tanh(rho) x_spatial, cosh(rho))`, with `<N,N> = -1`.
    pub fn radial_vector(&self) -> MinkowskiVec {
        let rho = self.rho();
        let sp = self.0.spatial() * rho.tanh();
        MinkowskiVec(Vector4::new(sp.x, sp.y, sp.z, rho.cosh()))
    }
}

/// Projective chart of the positive hemisphere: `spatial(X)/x4`, a point
/// outside the closed unit ball.
pub fn phi_s(x: &DeSitterPoint) -> KleinPoint {
    KleinPoint(x.coords().spatial() / x.coords().t())
}

/// Differential of `phi_S` at `x` applied to an ambient vector.
pub fn dphi_s(x: &DeSitterPoint, u: &MinkowskiVec) -> Vector3<f64> {
    let t = x.coords().t();
    (u.spatial() - phi_s(x).0 * u.t()) / t
}

/// Tangent vector at a de Sitter point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentAtDeSitter {
    pub base: DeSitterPoint,
    pub vec: MinkowskiVec,
}

impl TangentAtDeSitter {
    /// Validates Minkowski-orthogonality to the base point and stores
    /// the exactly projected vector.
    pub fn new(base: DeSitterPoint, vec: MinkowskiVec) -> Result<Self, PogoError> {
        let inner = mink_inner(&vec, &base.coords());
        let scale = vec.0.norm().max(1.0);
        if inner.abs() > 1e-9 * scale {
            return Err(PogoError::NotTangent { inner });
        }
        let projected = MinkowskiVec(vec.0 - base.coords().0 * inner);
        Ok(Self {
            base,
            vec: projected,
        })
    }
}

/// Radial/lateral decomposition of a tangent vector: `v = f N + u` with
/// `N` the unit radial vector and `u` lateral (tangent to the sphere
/// `{rho = const}`, equivalently `u4 = 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialLateralSplit {
    pub f: f64,
    pub lateral: MinkowskiVec,
}

pub fn split_radial_lateral(v: &TangentAtDeSitter) -> RadialLateralSplit {
    let n = v.base.radial_vector();
    // <N,N> = -1, so the radial coefficient is -<v,N>
    let f = -mink_inner(&v.vec, &n);
    let lateral = MinkowskiVec(v.vec.0 - n.0 * f);
    RadialLateralSplit { f, lateral }
}

/// Pushes a de Sitter tangent to the ball exterior: the lateral part
/// maps through `d phi_S`, the radial part keeps its direction class
/// and its norm.
pub fn pogorelov_push(v: &TangentAtDeSitter) -> (KleinPoint, Vector3<f64>) {
    let split = split_radial_lateral(v);
    let chart = phi_s(&v.base);
    let radial_chart = chart.0 / chart.norm();
    let w = radial_chart * split.f + dphi_s(&v.base, &split.lateral);
    (chart, w)
}

/// Inverse transformation: Euclidean vector at a hyperideal point back
/// to a de Sitter tangent.
pub fn pogorelov_pull(x: &KleinPoint, w: &Vector3<f64>) -> Result<TangentAtDeSitter, PogoError> {
    let base = DeSitterPoint::from_chart(x)?;
    let radial_chart = x.0 / x.norm();
    let f = w.dot(&radial_chart);
    let w_lat = w - radial_chart * f;
    // lateral part: u = (x4 * w_lat, 0) inverts d phi_S on laterals
    let t = base.coords().t();
    let u = Vector4::new(t * w_lat.x, t * w_lat.y, t * w_lat.z, 0.0);
    let n = base.radial_vector();
    let vec = MinkowskiVec(u + n.0 * f);
    TangentAtDeSitter::new(base, vec)
}

/// Killing field of a Minkowski-skew generator evaluated at a point:
/// `vec = M X`, automatically tangent.
pub fn desitter_killing(
    m: &Matrix4<f64>,
    x: &DeSitterPoint,
) -> Result<TangentAtDeSitter, PogoError> {
    let g = Matrix4::from_diagonal(&Vector4::new(1.0, 1.0, 1.0, -1.0));
    let skew_residual = (m.transpose() * g + g * m).norm();
    if skew_residual > 1e-12 * m.norm().max(1.0) {
        return Err(PogoError::NotSkew {
            residual: skew_residual,
        });
    }
    TangentAtDeSitter::new(*x, MinkowskiVec(m * x.coords().0))
}

// ---------------------------------------------------------------------
// Lie-derivative estimates
// ---------------------------------------------------------------------

/// One RK4 step of the augmented flow (point and two transported
/// vectors) for a field given by an ambient sampler. `dv` is the
/// directional derivative of the field, evaluated by central
/// differences along projected curves.
fn rk4_transport<const N: usize>(
    p: [f64; N],
    a: [f64; N],
    b: [f64; N],
    h: f64,
    f: &dyn Fn(&[f64; N]) -> Option<[f64; N]>,
    dv: &dyn Fn(&[f64; N], &[f64; N]) -> Option<[f64; N]>,
) -> Option<([f64; N], [f64; N], [f64; N])> {
    let add = |x: &[f64; N], y: &[f64; N], s: f64| {
        let mut out = *x;
        for k in 0..N {
            out[k] += s * y[k];
        }
        out
    };
    let deriv =
        |p: &[f64; N], a: &[f64; N], b: &[f64; N]| -> Option<([f64; N], [f64; N], [f64; N])> {
            Some((f(p)?, dv(p, a)?, dv(p, b)?))
        };
    let (k1p, k1a, k1b) = deriv(&p, &a, &b)?;
    let (k2p, k2a, k2b) = deriv(
        &add(&p, &k1p, h / 2.0),
        &add(&a, &k1a, h / 2.0),
        &add(&b, &k1b, h / 2.0),
    )?;
    let (k3p, k3a, k3b) = deriv(
        &add(&p, &k2p, h / 2.0),
        &add(&a, &k2a, h / 2.0),
        &add(&b, &k2b, h / 2.0),
    )?;
    let (k4p, k4a, k4b) = deriv(&add(&p, &k3p, h), &add(&a, &k3a, h), &add(&b, &k3b, h))?;
    let comb = |x: &[f64; N], k1: &[f64; N], k2: &[f64; N], k3: &[f64; N], k4: &[f64; N]| {
        let mut out = *x;
        for k in 0..N {
            out[k] += h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
        }
        out
    };
    Some((
        comb(&p, &k1p, &k2p, &k3p, &k4p),
        comb(&a, &k1a, &k2a, &k3a, &k4a),
        comb(&b, &k1b, &k2b, &k3b, &k4b),
    ))
}

fn pullback_metric_derivative<const N: usize>(
    p: [f64; N],
    a: [f64; N],
    b: [f64; N],
    h: f64,
    f: &dyn Fn(&[f64; N]) -> Option<[f64; N]>,
    dv: &dyn Fn(&[f64; N], &[f64; N]) -> Option<[f64; N]>,
    metric: &dyn Fn(&[f64; N], &[f64; N], &[f64; N]) -> Option<f64>,
) -> Option<f64> {
    let estimate = |step: f64| -> Option<f64> {
        let (pp, ap, bp) = rk4_transport(p, a, b, step, f, dv)?;
        let (pm, am, bm) = rk4_transport(p, a, b, -step, f, dv)?;
        let gp = metric(&pp, &ap, &bp)?;
        let gm = metric(&pm, &am, &bm)?;
        Some((gp - gm) / (2.0 * step))
    };
    let f_h = estimate(h)?;
    let f_h2 = estimate(h / 2.0)?;
    Some((4.0 * f_h2 - f_h) / 3.0)
}

/// Central-difference estimate of the metric Lie derivative
/// `(L_v g)(a, b)` of a Euclidean field at `x`, with Richardson
/// extrapolation over `(h, h/2)`. The field sampler returns `None`
/// outside its domain, which surfaces as `StepTooLarge`.
pub fn lie_derivative_euclidean(
    field: &dyn Fn(&Vector3<f64>) -> Option<Vector3<f64>>,
    x: &Vector3<f64>,
    a: &Vector3<f64>,
    b: &Vector3<f64>,
    h: f64,
) -> Result<f64, PogoError> {
    let f = |p: &[f64; 3]| -> Option<[f64; 3]> {
        field(&Vector3::new(p[0], p[1], p[2])).map(|v| [v.x, v.y, v.z])
    };
    let delta = h / 10.0;
    let dv = |p: &[f64; 3], u: &[f64; 3]| -> Option<[f64; 3]> {
        let shift = |s: f64| {
            let q = Vector3::new(p[0] + s * u[0], p[1] + s * u[1], p[2] + s * u[2]);
            field(&q)
        };
        let vp = shift(delta)?;
        let vm = shift(-delta)?;
        let d = (vp - vm) / (2.0 * delta);
        Some([d.x, d.y, d.z])
    };
    let metric = |_p: &[f64; 3], u: &[f64; 3], w: &[f64; 3]| -> Option<f64> {
        Some(u[0] * w[0] + u[1] * w[1] + u[2] * w[2])
    };
    pullback_metric_derivative(
        [x.x, x.y, x.z],
        [a.x, a.y, a.z],
        [b.x, b.y, b.z],
        h,
        &f,
        &dv,
        &metric,
    )
    .ok_or(PogoError::StepTooLarge)
}

fn project_quadric(p: &[f64; 4]) -> Option<Vector4<f64>> {
    let v = Vector4::new(p[0], p[1], p[2], p[3]);
    let q = v.x * v.x + v.y * v.y + v.z * v.z - v.w * v.w;
    if q <= 0.0 {
        return None;
    }
    let v = v / q.sqrt();
    if v.w <= 0.0 {
        return None;
    }
    Some(v)
}

/// Same estimate for a field on the positive de Sitter hemisphere, with
/// the ambient Minkowski form restricted to tangent spaces as metric.
/// The flow is projected back to the quadric at every evaluation.
pub fn lie_derivative_desitter(
    field: &dyn Fn(&DeSitterPoint) -> Option<MinkowskiVec>,
    x: &DeSitterPoint,
    a: &MinkowskiVec,
    b: &MinkowskiVec,
    h: f64,
) -> Result<f64, PogoError> {
    let sample = |p: &[f64; 4]| -> Option<[f64; 4]> {
        let v = project_quadric(p)?;
        let vec = field(&DeSitterPoint(MinkowskiVec(v)))?;
        Some([vec.0.x, vec.0.y, vec.0.z, vec.0.w])
    };
    let delta = h / 10.0;
    let dv = |p: &[f64; 4], u: &[f64; 4]| -> Option<[f64; 4]> {
        let shift = |s: f64| -> Option<[f64; 4]> {
            let q = [
                p[0] + s * u[0],
                p[1] + s * u[1],
                p[2] + s * u[2],
                p[3] + s * u[3],
            ];
            sample(&q)
        };
        let vp = shift(delta)?;
        let vm = shift(-delta)?;
        let mut d = [0.0; 4];
        for k in 0..4 {
            d[k] = (vp[k] - vm[k]) / (2.0 * delta);
        }
        Some(d)
    };
    let metric = |p: &[f64; 4], u: &[f64; 4], w: &[f64; 4]| -> Option<f64> {
        // restrict to the tangent space at the projected point
        let x = project_quadric(p)?;
        let uv = Vector4::new(u[0], u[1], u[2], u[3]);
        let wv = Vector4::new(w[0], w[1], w[2], w[3]);
        let minkv =
            |a: &Vector4<f64>, b: &Vector4<f64>| a.x * b.x + a.y * b.y + a.z * b.z - a.w * b.w;
        let ut = uv - x * minkv(&uv, &x);
        let wt = wv - x * minkv(&wv, &x);
        Some(minkv(&ut, &wt))
    };
    let p0 = x.coords().0;
    pullback_metric_derivative(
        [p0.x, p0.y, p0.z, p0.w],
        [a.0.x, a.0.y, a.0.z, a.0.w],
        [b.0.x, b.0.y, b.0.z, b.0.w],
        h,
        &sample,
        &dv,
        &metric,
    )
    .ok_or(PogoError::StepTooLarge)
}

/// One sample of the proportionality check.
#[derive(Debug, Clone)]
pub struct EqPogoSample {
    pub rho: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// Relative deviation of `lhs / rhs` from `sinh^2(rho)`, `None` when
    /// both sides vanish (Killing case).
    pub rel_error: Option<f64>,
}

/// Verifies `(L_v g)(x, y) = sinh^2(rho) (L_{Phi v} gbar)(xbar, ybar)`
/// for a de Sitter field on the given samples; returns the per-sample
/// data and the maximum relative deviation.
pub fn verify_eq_pogo(
    field: &dyn Fn(&DeSitterPoint) -> Option<MinkowskiVec>,
    samples: &[(DeSitterPoint, MinkowskiVec, MinkowskiVec)],
    h: f64,
) -> Result<(Vec<EqPogoSample>, f64), PogoError> {
    // the pushed field on the ball exterior
    let pushed = |p: &Vector3<f64>| -> Option<Vector3<f64>> {
        let kp = KleinPoint(*p);
        let base = DeSitterPoint::from_chart(&kp).ok()?;
        let vec = field(&base)?;
        let tangent = TangentAtDeSitter::new(base, vec).ok()?;
        Some(pogorelov_push(&tangent).1)
    };

    let mut report = Vec::with_capacity(samples.len());
    let mut max_rel: f64 = 0.0;
    for (x, u, w) in samples {
        let lhs = lie_derivative_desitter(field, x, u, w, h)?;
        let chart = phi_s(x);
        let ubar = dphi_s(x, u);
        let wbar = dphi_s(x, w);
        let rhs = lie_derivative_euclidean(&pushed, &chart.0, &ubar, &wbar, h)?;
        let rho = x.rho();
        let scale = rho.sinh().powi(2);
        let rel_error = if lhs.abs() < 1e-7 && rhs.abs() < 1e-7 {
            None
        } else {
            Some((lhs / rhs - scale).abs() / scale)
        };
        if let Some(e) = rel_error {
            max_rel = max_rel.max(e);
        }
        report.push(EqPogoSample {
            rho,
            lhs,
            rhs,
            rel_error,
        });
    }
    Ok((report, max_rel))
}

/// First and second fundamental forms of the de Sitter sphere
/// `{rho = const}` on lateral tangents, with the outward radial normal:
/// `I(u,w) = <u,w>`, `II(u,w) = tanh(rho) <u,w>`.
pub fn desitter_sphere_forms(x: &DeSitterPoint, u: &MinkowskiVec, w: &MinkowskiVec) -> (f64, f64) {
    let i = mink_inner(u, w);
    (i, x.rho().tanh() * i)
}

/// First and second fundamental forms of the Euclidean sphere of radius
/// `|x|` on tangents at `x` (outward normal): `I(u,w) = u.w`,
/// `II(u,w) = u.w / |x|`.
pub fn euclidean_sphere_forms(x: &Vector3<f64>, u: &Vector3<f64>, w: &Vector3<f64>) -> (f64, f64) {
    let i = u.dot(w);
    (i, i / x.norm())
}
