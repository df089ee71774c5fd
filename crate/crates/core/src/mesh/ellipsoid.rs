//! Ellipsoids: least-squares quadric fitting, shrinking, and the affine
//! normalization onto the unit ball.

use nalgebra::{DMatrix, Matrix3, Vector3};

use crate::error::MeshError;

use super::EllipsoidJson;

/// Ellipsoid `{x : (x - c)^T A (x - c) = 1}` with `A` symmetric
/// positive-definite.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    pub a: Matrix3<f64>,
    pub c: Vector3<f64>,
}

/// Affine map `x -> m x + t`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub m: Matrix3<f64>,
    pub t: Vector3<f64>,
}

impl AffineMap {
    pub fn apply(&self, x: &Vector3<f64>) -> Vector3<f64> {
        self.m * x + self.t
    }
}

/// Fit diagnostics alongside the fitted ellipsoid.
#[derive(Debug, Clone)]
pub struct EllipsoidReport {
    pub ellipsoid: Ellipsoid,
    /// Largest absolute quadric residual over the input points.
    pub max_residual: f64,
}

impl Ellipsoid {
    pub fn unit_sphere() -> Self {
        Self {
            a: Matrix3::identity(),
            c: Vector3::zeros(),
        }
    }

    pub fn sphere(radius: f64, center: Vector3<f64>) -> Self {
        Self {
            a: Matrix3::identity() / (radius * radius),
            c: center,
        }
    }

    /// Quadric value `(x - c)^T A (x - c)`; 1 on the surface.
    pub fn eval(&self, x: &Vector3<f64>) -> f64 {
        let d = x - self.c;
        (self.a * d).dot(&d)
    }

    /// Same center, semi-axes multiplied by `factor` in (0, 1).
    pub fn shrink(&self, factor: f64) -> Result<Ellipsoid, MeshError> {
        if !(factor > 0.0 && factor < 1.0) {
            return Err(MeshError::BadFactor(factor));
        }
        Ok(Ellipsoid {
            a: self.a / (factor * factor),
            c: self.c,
        })
    }

    /// Affine map sending the ellipsoid surface onto the unit sphere:
    /// `T(x) = A^{1/2} (x - c)` via the symmetric square root.
    pub fn normalize_to_ball(&self) -> AffineMap {
        let eig = self.a.symmetric_eigen();
        let sqrt_vals = Matrix3::from_diagonal(&eig.eigenvalues.map(|l| l.sqrt()));
        let m = eig.eigenvectors * sqrt_vals * eig.eigenvectors.transpose();
        AffineMap { m, t: -m * self.c }
    }

    pub fn to_json(&self) -> EllipsoidJson {
        let mut a = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                a[i][j] = self.a[(i, j)];
            }
        }
        EllipsoidJson {
            a,
            c: [self.c.x, self.c.y, self.c.z],
        }
    }

    pub fn from_json(j: &EllipsoidJson) -> Self {
        let mut a = Matrix3::zeros();
        for i in 0..3 {
            for k in 0..3 {
                a[(i, k)] = j.a[i][k];
            }
        }
        Self {
            a,
            c: Vector3::from(j.c),
        }
    }
}

/// Least-squares quadric through `points`, accepted only when the
/// quadratic part normalizes to positive-definite.
///
/// The quadric `x^T Q x + b^T x + d = 0` is found from the smallest
/// singular directions of the 10-column design matrix
/// `[x^2, y^2, z^2, xy, xz, yz, x, y, z, 1]`. When several directions
/// fit equally well (an underdetermined exact fit), the combination
/// minimizing the traceless part of `Q` is chosen, so symmetric point
/// sets recover the sphere that passes through them.
pub fn fit_ellipsoid(points: &[Vector3<f64>]) -> Result<EllipsoidReport, MeshError> {
    let n = points.len();
    if n < 6 {
        return Err(MeshError::DegeneratePointSet);
    }
    let mut design = DMatrix::zeros(n, 10);
    for (r, p) in points.iter().enumerate() {
        let (x, y, z) = (p.x, p.y, p.z);
        let row = [x * x, y * y, z * z, x * y, x * z, y * z, x, y, z, 1.0];
        for (c, v) in row.iter().enumerate() {
            design[(r, c)] = *v;
        }
    }
    // normal-matrix eigendecomposition exposes the full (near-)null
    // space of the design matrix, which a thin SVD of a wide matrix
    // does not
    let normal = design.transpose() * &design;
    let eig = normal.symmetric_eigen();
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    if lmax <= 0.0 {
        return Err(MeshError::DegeneratePointSet);
    }
    let mut order: Vec<usize> = (0..10).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());

    // candidates: every direction fitting essentially exactly, or just
    // the single best one for a genuine least-squares fit
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for &k in &order {
        if basis.is_empty() || eig.eigenvalues[k] <= 1e-14 * lmax {
            basis.push(eig.eigenvectors.column(k).iter().cloned().collect());
        }
    }

    // choose within the candidate span the direction minimizing the
    // traceless part of Q (unit-norm coefficients)
    let coeffs = if basis.len() == 1 {
        basis.pop().unwrap()
    } else {
        pick_roundest(&basis)
    };

    let q = Matrix3::new(
        coeffs[0],
        coeffs[3] / 2.0,
        coeffs[4] / 2.0,
        coeffs[3] / 2.0,
        coeffs[1],
        coeffs[5] / 2.0,
        coeffs[4] / 2.0,
        coeffs[5] / 2.0,
        coeffs[2],
    );
    let b = Vector3::new(coeffs[6], coeffs[7], coeffs[8]);
    let d = coeffs[9];

    // sign normalization: positive trace for the quadratic part
    let (q, b, d) = if q.trace() < 0.0 {
        (-q, -b, -d)
    } else {
        (q, b, d)
    };

    // center solves 2 Q c = -b
    let Some(y) = q.lu().solve(&(b / 2.0)) else {
        return Err(MeshError::DegeneratePointSet);
    };
    let center = -y;

    let rhs = (q * center).dot(&center) - d;
    if rhs <= 0.0 {
        return Err(MeshError::DegeneratePointSet);
    }
    let a = q / rhs;
    let eig = a.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(MeshError::DegeneratePointSet);
    }
    let ellipsoid = Ellipsoid { a, c: center };
    let max_residual = points
        .iter()
        .map(|p| (ellipsoid.eval(p) - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(EllipsoidReport {
        ellipsoid,
        max_residual,
    })
}

/// Among unit combinations of the candidate quadrics, minimizes the
/// Frobenius norm of the traceless part of the quadratic form: the
/// smallest eigenvector of the induced PSD form.
fn pick_roundest(basis: &[Vec<f64>]) -> Vec<f64> {
    let k = basis.len();
    // traceless(Q) depends linearly on the coefficients; build the
    // 6-vector of independent entries scaled so the Frobenius norm is
    // the Euclidean norm: diag (x1), off-diagonals (x sqrt 2)
    let traceless = |c: &[f64]| -> [f64; 6] {
        let tr = (c[0] + c[1] + c[2]) / 3.0;
        [
            c[0] - tr,
            c[1] - tr,
            c[2] - tr,
            c[3] / 2.0 * std::f64::consts::SQRT_2,
            c[4] / 2.0 * std::f64::consts::SQRT_2,
            c[5] / 2.0 * std::f64::consts::SQRT_2,
        ]
    };
    let mut m = DMatrix::<f64>::zeros(k, k);
    for i in 0..k {
        let ti = traceless(&basis[i]);
        for j in 0..k {
            let tj = traceless(&basis[j]);
            m[(i, j)] = ti.iter().zip(tj.iter()).map(|(a, b)| a * b).sum();
        }
    }
    let eig = m.symmetric_eigen();
    let mut best = 0;
    for i in 1..k {
        if eig.eigenvalues[i] < eig.eigenvalues[best] {
            best = i;
        }
    }
    let alpha = eig.eigenvectors.column(best);
    let mut coeffs = vec![0.0; 10];
    for (i, base) in basis.iter().enumerate() {
        for (c, v) in coeffs.iter_mut().zip(base.iter()) {
            *c += alpha[i] * v;
        }
    }
    coeffs
}
