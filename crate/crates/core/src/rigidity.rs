//! Rigidity engine: Jacobians of edge-length and dihedral-angle maps,
//! trivial-motion spaces, and SVD-based verdicts.
//!
//! A first-order deformation assigns one displacement vector to each
//! vertex. The polyhedron is infinitesimally rigid when every
//! deformation that kills the first-order variation of the measured
//! quantities (edge lengths, or total dihedral angles) is the
//! restriction of an ambient infinitesimal isometry. The verdict is a
//! rank decision on the corresponding Jacobian, made auditable by the
//! singular-value margin reported alongside it.

use nalgebra::{DMatrix, DVector, Matrix3, Matrix4, Vector3};
use serde::Serialize;

use crate::error::RigidityError;
use crate::hyp::KleinPoint;
use crate::mesh::{SurfaceMesh, Triangulation};

/// One 3-vector per vertex: a first-order vertex displacement field.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationField(pub Vec<Vector3<f64>>);

impl DeformationField {
    pub fn flatten(&self) -> DVector<f64> {
        let mut v = DVector::zeros(3 * self.0.len());
        for (i, x) in self.0.iter().enumerate() {
            v[3 * i] = x.x;
            v[3 * i + 1] = x.y;
            v[3 * i + 2] = x.z;
        }
        v
    }

    pub fn from_flat(v: &DVector<f64>) -> Self {
        let n = v.len() / 3;
        Self(
            (0..n)
                .map(|i| Vector3::new(v[3 * i], v[3 * i + 1], v[3 * i + 2]))
                .collect(),
        )
    }
}

/// Which map the Jacobian differentiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RigidityMode {
    #[serde(rename = "euclidean-length")]
    EuclideanLength,
    #[serde(rename = "hyperbolic-length")]
    HyperbolicLength,
    #[serde(rename = "hyperbolic-angle")]
    HyperbolicAngle,
}

/// Edge selection for the hyperbolic length Jacobian.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeSet {
    /// Edges of the polyhedron boundary only.
    Boundary,
    /// Every distinct cell edge of the triangulation.
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Rigid,
    Flexible,
    Inconclusive,
}

/// Outcome of a rank decision on a deformation Jacobian.
#[derive(Debug, Clone, Serialize)]
pub struct RigidityReport {
    pub mode: RigidityMode,
    pub rows: usize,
    pub cols: usize,
    /// Singular values in descending order.
    pub singular_values: Vec<f64>,
    pub trivial_dim: usize,
    /// Number of singular values below `sigma_tol * sigma_max`.
    pub kernel_dim: usize,
    pub verdict: Verdict,
    /// Smallest singular value of the Jacobian restricted to the
    /// orthogonal complement of the trivial motions, in units of
    /// (measured variation) per (unit vertex displacement).
    pub margin: f64,
}

/// Jacobian of the squared-edge-length map (up to the factor 2): the
/// row of edge `(i, j)` holds `(p_i - p_j)^T` in block `i` and its
/// negative in block `j`.
pub fn euclidean_length_jacobian(mesh: &SurfaceMesh) -> DMatrix<f64> {
    let edges = mesh.edges();
    let nv = mesh.vertices.len();
    let mut jac = DMatrix::zeros(edges.len(), 3 * nv);
    for (r, &(i, j)) in edges.iter().enumerate() {
        let d = mesh.vertices[i] - mesh.vertices[j];
        for k in 0..3 {
            jac[(r, 3 * i + k)] = d[k];
            jac[(r, 3 * j + k)] = -d[k];
        }
    }
    jac
}

/// Basis of the Euclidean infinitesimal isometries restricted to the
/// vertex set: three translations and three rotations `b x p`.
pub fn euclidean_trivial_motions(
    mesh: &SurfaceMesh,
) -> Result<Vec<DeformationField>, RigidityError> {
    let mut fields = Vec::with_capacity(6);
    for k in 0..3 {
        let mut b = Vector3::zeros();
        b[k] = 1.0;
        fields.push(DeformationField(vec![b; mesh.vertices.len()]));
    }
    for k in 0..3 {
        let mut b = Vector3::zeros();
        b[k] = 1.0;
        fields.push(DeformationField(
            mesh.vertices.iter().map(|p| b.cross(p)).collect(),
        ));
    }
    check_independent(&fields)?;
    Ok(fields)
}

/// The six Minkowski-skew generators: rotations in the three spatial
/// planes and boosts in the three (x_i, t)-planes.
pub fn so31_generators() -> [Matrix4<f64>; 6] {
    let mut gens = [Matrix4::zeros(); 6];
    let planes = [(0usize, 1usize), (0, 2), (1, 2)];
    for (k, &(i, j)) in planes.iter().enumerate() {
        gens[k][(i, j)] = -1.0;
        gens[k][(j, i)] = 1.0;
    }
    for i in 0..3 {
        gens[3 + i][(i, 3)] = 1.0;
        gens[3 + i][(3, i)] = 1.0;
    }
    gens
}

/// Projective vector field of a Minkowski-skew generator at a chart
/// point: `w_M(v) = (M (v,1))_{1..3} - v (M (v,1))_4`.
pub fn so31_field_at(m: &Matrix4<f64>, v: &Vector3<f64>) -> Vector3<f64> {
    let x = nalgebra::Vector4::new(v.x, v.y, v.z, 1.0);
    let mx = m * x;
    mx.xyz() - v * mx.w
}

/// Basis of the hyperbolic trivial motions on a hyperideal vertex set:
/// the six projective Killing fields restricted to the vertices.
pub fn so31_trivial_motions(
    vertices: &[KleinPoint],
) -> Result<Vec<DeformationField>, RigidityError> {
    if vertices.len() < 3 {
        return Err(RigidityError::DegenerateVertexSet);
    }
    let fields: Vec<DeformationField> = so31_generators()
        .iter()
        .map(|m| DeformationField(vertices.iter().map(|v| so31_field_at(m, &v.0)).collect()))
        .collect();
    check_independent(&fields)?;
    Ok(fields)
}

fn check_independent(fields: &[DeformationField]) -> Result<(), RigidityError> {
    let n = fields[0].0.len() * 3;
    let mut m = DMatrix::zeros(n, fields.len());
    for (c, f) in fields.iter().enumerate() {
        m.set_column(c, &f.flatten());
    }
    let svd = m.svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smax <= 0.0 || smin <= 1e-10 * smax {
        return Err(RigidityError::DegenerateVertexSet);
    }
    Ok(())
}

/// Gradient of the truncated edge length `arccosh(-<V_i, V_j>)` with
/// respect to the chart coordinates of both endpoints.
///
/// With `A = |v|^2 - 1`, `B = |w|^2 - 1`, `S = 1 - v.w` and
/// `c = S / sqrt(AB)`:
/// `d l / d v = -(w + (S/A) v) / (sqrt(AB) sqrt(c^2 - 1))`.
pub fn truncated_length_gradient(
    v: &Vector3<f64>,
    w: &Vector3<f64>,
) -> (Vector3<f64>, Vector3<f64>) {
    let a = v.norm_squared() - 1.0;
    let b = w.norm_squared() - 1.0;
    let s = 1.0 - v.dot(w);
    let sqrt_ab = (a * b).sqrt();
    let c = s / sqrt_ab;
    let root = (c * c - 1.0).sqrt();
    let gv = -(w + v * (s / a)) / (sqrt_ab * root);
    let gw = -(v + w * (s / b)) / (sqrt_ab * root);
    (gv, gw)
}

/// Jacobian of the truncated edge lengths over the chosen edge set with
/// respect to all vertex coordinates. Returns the matrix and the edge
/// list indexing its rows.
pub fn hyperbolic_length_jacobian(
    t: &Triangulation,
    edge_set: EdgeSet,
) -> Result<(DMatrix<f64>, Vec<(usize, usize)>), RigidityError> {
    let mesh = t.mesh();
    let edges = match edge_set {
        EdgeSet::Boundary => t.boundary_edges(),
        EdgeSet::All => t.edges(),
    };
    let mut jac = DMatrix::zeros(edges.len(), 3 * mesh.vertices.len());
    for (r, &(i, j)) in edges.iter().enumerate() {
        // validates hyperideality and ball crossing
        crate::hyp::truncated_edge_length(
            &KleinPoint(mesh.vertices[i]),
            &KleinPoint(mesh.vertices[j]),
        )
        .map_err(RigidityError::Hyp)?;
        let (gi, gj) = truncated_length_gradient(&mesh.vertices[i], &mesh.vertices[j]);
        for k in 0..3 {
            jac[(r, 3 * i + k)] = gi[k];
            jac[(r, 3 * j + k)] = gj[k];
        }
    }
    Ok((jac, edges))
}

fn cross_matrix(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w.z, w.y, w.z, 0.0, -w.x, -w.y, w.x, 0.0)
}

/// Gradients of one tetrahedron's interior dihedral angle at the edge
/// `(q[0], q[1])` (faces through `q[2]` resp. `q[3]`) with respect to
/// the four vertex positions.
pub fn tet_dihedral_gradient(q: &[Vector3<f64>; 4]) -> (f64, [Vector3<f64>; 4]) {
    // face 1 = (q0, q1, q2) opposite q3; face 2 = (q0, q1, q3) opposite q2
    let u = q[1] - q[0];
    let m1_raw = u.cross(&(q[2] - q[0]));
    let m2_raw = u.cross(&(q[3] - q[0]));
    let d1_raw = m1_raw.dot(&q[0]);
    let d2_raw = m2_raw.dot(&q[0]);
    let s1 = if m1_raw.dot(&q[3]) - d1_raw > 0.0 {
        -1.0
    } else {
        1.0
    };
    let s2 = if m2_raw.dot(&q[2]) - d2_raw > 0.0 {
        -1.0
    } else {
        1.0
    };
    let m1 = m1_raw * s1;
    let m2 = m2_raw * s2;
    let d1 = d1_raw * s1;
    let d2 = d2_raw * s2;

    let g1 = m1.norm_squared() - d1 * d1;
    let g2 = m2.norm_squared() - d2 * d2;
    let f = m1.dot(&m2) - d1 * d2;
    let val = -f / (g1 * g2).sqrt();
    let theta = val.clamp(-1.0, 1.0).acos();

    // dm as matrices: dm = J dx per vertex (J in the cross-matrix form)
    let jm1 = |x: usize| -> Matrix3<f64> {
        match x {
            0 => cross_matrix(&(q[2] - q[1])) * s1,
            1 => -cross_matrix(&(q[2] - q[0])) * s1,
            2 => cross_matrix(&(q[1] - q[0])) * s1,
            _ => Matrix3::zeros(),
        }
    };
    let jm2 = |x: usize| -> Matrix3<f64> {
        match x {
            0 => cross_matrix(&(q[3] - q[1])) * s2,
            1 => -cross_matrix(&(q[3] - q[0])) * s2,
            3 => cross_matrix(&(q[1] - q[0])) * s2,
            _ => Matrix3::zeros(),
        }
    };

    let sin_theta = (1.0 - val * val).max(1e-30).sqrt();
    let mut grads = [Vector3::zeros(); 4];
    for x in 0..4 {
        let j1 = jm1(x);
        let j2 = jm2(x);
        // d d1 = q0 . dm1 + m1 . [x == 0]
        let mut gd1 = j1.transpose() * q[0];
        let mut gd2 = j2.transpose() * q[0];
        if x == 0 {
            gd1 += m1;
            gd2 += m2;
        }
        let gf = j1.transpose() * m2 + j2.transpose() * m1 - gd1 * d2 - gd2 * d1;
        let gg1 = (j1.transpose() * m1 - gd1 * d1) * 2.0;
        let gg2 = (j2.transpose() * m2 - gd2 * d2) * 2.0;
        let gu = -(gf - (gg1 / g1 + gg2 / g2) * (f / 2.0)) / (g1 * g2).sqrt();
        grads[x] = -gu / sin_theta;
    }
    (theta, grads)
}

/// Interior dihedral angle of a tetrahedral cell at one of its edges.
pub fn tet_dihedral(q: &[Vector3<f64>; 4]) -> f64 {
    tet_dihedral_gradient(q).0
}

/// Jacobian of the total interior dihedral angle of the polyhedron at
/// each boundary edge (sum over incident cells, never reduced mod 2 pi)
/// with respect to all vertex coordinates.
pub fn hyperbolic_angle_jacobian(
    t: &Triangulation,
) -> Result<(DMatrix<f64>, Vec<(usize, usize)>), RigidityError> {
    let mesh = t.mesh();
    let edges = t.boundary_edges();
    let index: std::collections::BTreeMap<(usize, usize), usize> =
        edges.iter().cloned().zip(0..).collect();
    let mut jac = DMatrix::zeros(edges.len(), 3 * mesh.vertices.len());
    for cell in t.tetrahedra() {
        for (i_loc, j_loc) in crate::simplex::EDGE_PAIRS {
            let (vi, vj) = (cell[i_loc], cell[j_loc]);
            let key = (vi.min(vj), vi.max(vj));
            let Some(&row) = index.get(&key) else {
                continue;
            };
            // order the cell as (edge i, edge j, other, other)
            let others: Vec<usize> = (0..4).filter(|&k| k != i_loc && k != j_loc).collect();
            let order = [cell[i_loc], cell[j_loc], cell[others[0]], cell[others[1]]];
            let q = [
                mesh.vertices[order[0]],
                mesh.vertices[order[1]],
                mesh.vertices[order[2]],
                mesh.vertices[order[3]],
            ];
            let (_, grads) = tet_dihedral_gradient(&q);
            for (slot, &vertex) in order.iter().enumerate() {
                for k in 0..3 {
                    jac[(row, 3 * vertex + k)] += grads[slot][k];
                }
            }
        }
    }
    Ok((jac, edges))
}

/// Total interior dihedral angle of the triangulated polyhedron at an
/// edge: the sum of the incident cells' dihedral angles there.
pub fn assembled_edge_angle(t: &Triangulation, edge: (usize, usize)) -> f64 {
    let mesh = t.mesh();
    let key = (edge.0.min(edge.1), edge.0.max(edge.1));
    let mut total = 0.0;
    for cell in t.tetrahedra() {
        for (i_loc, j_loc) in crate::simplex::EDGE_PAIRS {
            let (vi, vj) = (cell[i_loc], cell[j_loc]);
            if (vi.min(vj), vi.max(vj)) != key {
                continue;
            }
            let others: Vec<usize> = (0..4).filter(|&k| k != i_loc && k != j_loc).collect();
            let q = [
                mesh.vertices[cell[i_loc]],
                mesh.vertices[cell[j_loc]],
                mesh.vertices[cell[others[0]]],
                mesh.vertices[cell[others[1]]],
            ];
            total += tet_dihedral(&q);
        }
    }
    total
}

/// Deterministic orthonormal basis of the orthogonal complement of the
/// span of `basis` inside R^n (Gram-Schmidt against the standard basis).
fn orthogonal_complement(basis: &[DVector<f64>], n: usize) -> DMatrix<f64> {
    let mut ortho: Vec<DVector<f64>> = Vec::new();
    for b in basis {
        let mut v = b.clone();
        for o in &ortho {
            let p = o.dot(&v);
            v -= o * p;
        }
        let norm = v.norm();
        if norm > 1e-12 {
            ortho.push(v / norm);
        }
    }
    let span_dim = ortho.len();
    let mut complement: Vec<DVector<f64>> = Vec::new();
    for k in 0..n {
        if complement.len() == n - span_dim {
            break;
        }
        let mut v = DVector::zeros(n);
        v[k] = 1.0;
        for o in ortho.iter().chain(complement.iter()) {
            let p = o.dot(&v);
            v -= o * p;
        }
        let norm = v.norm();
        if norm > 1e-8 {
            complement.push(v / norm);
        }
    }
    let mut c = DMatrix::zeros(n, complement.len());
    for (i, v) in complement.iter().enumerate() {
        c.set_column(i, v);
    }
    c
}

/// Rank decision on a deformation Jacobian.
///
/// `kernel_dim` counts singular values below `sigma_tol * sigma_max`;
/// the margin is the smallest singular value of the Jacobian restricted
/// to the orthogonal complement of the trivial motions. Verdicts within
/// a factor 10 of the threshold are inconclusive rather than guessed,
/// and the trivial basis must itself sit in the kernel up to
/// `10 sigma_tol` for any verdict to be made.
pub fn rigidity_verdict(
    jac: &DMatrix<f64>,
    trivial: &[DeformationField],
    sigma_tol: f64,
    mode: RigidityMode,
) -> RigidityReport {
    let rows = jac.nrows();
    let cols = jac.ncols();
    let svd = jac.clone().svd(false, false);
    let mut singular_values: Vec<f64> = svd.singular_values.iter().cloned().collect();
    singular_values.sort_by(|a, b| b.partial_cmp(a).unwrap());
    // a square-or-wide map can still have kernel via rank deficiency;
    // count implicit zero singular values when rows < cols
    let implicit_zeros = cols.saturating_sub(singular_values.len());
    let smax = singular_values.first().cloned().unwrap_or(0.0);
    let thresh = sigma_tol * smax;
    let kernel_dim = singular_values.iter().filter(|&&s| s < thresh).count() + implicit_zeros;

    let trivial_dim = trivial.len();
    let trivial_flat: Vec<DVector<f64>> = trivial
        .iter()
        .map(|f| {
            let v = f.flatten();
            let n = v.norm();
            v / n
        })
        .collect();
    let trivial_residual = trivial_flat
        .iter()
        .map(|v| (jac * v).norm())
        .fold(0.0, f64::max);

    let complement = orthogonal_complement(&trivial_flat, cols);
    let restricted = jac * &complement;
    let margin = restricted.svd(false, false).singular_values.min();

    let verdict = if smax <= 0.0 || trivial_residual > 10.0 * thresh {
        Verdict::Inconclusive
    } else if kernel_dim == trivial_dim && margin > 10.0 * thresh {
        Verdict::Rigid
    } else if kernel_dim > trivial_dim && margin < thresh / 10.0 {
        Verdict::Flexible
    } else {
        Verdict::Inconclusive
    };

    RigidityReport {
        mode,
        rows,
        cols,
        singular_values,
        trivial_dim,
        kernel_dim,
        verdict,
        margin,
    }
}
