//! Angle structures on a hyperideal triangulation: the product polytope
//! of per-cell dihedral angles, the linear edge-sum map, total volume,
//! concave maximization on edge-sum fibers, and the chart/concavity
//! checks for the boundary-angle parametrization.
//!
//! The total volume is strictly concave on the angle polytope, and an
//! assignment is critical for the volume restricted to its edge-sum
//! fiber exactly when every edge is assigned the same length by all
//! the simplices containing it. The geometric angles of a triangulated
//! polyhedron are therefore the unique in-fiber maximizer near which
//! everything here operates.

use nalgebra::{DMatrix, DVector};

use crate::error::OptError;
use crate::hyp::{truncated_edge_length, KleinPoint};
use crate::mesh::Triangulation;
use crate::rigidity::{
    hyperbolic_angle_jacobian, so31_trivial_motions, tet_dihedral, DeformationField,
};
use crate::simplex::{
    simplex_dihedrals, simplex_lengths, simplex_volume, solve_from_angles, HyperidealSimplex,
    SimplexAngles, EDGE_PAIRS,
};
use crate::tol::{
    EPS_HESSIAN, HESS_STEP, OPT_COND_LIMIT, OPT_CRIT_TOL, OPT_GRAD_TOL, OPT_INTERIOR_MARGIN,
    SOLVE_TOL,
};

/// Per-cell interior dihedral angles; an element of the product of the
/// open 6-dimensional angle polytopes.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleAssignment(pub Vec<SimplexAngles>);

impl AngleAssignment {
    pub fn dim(&self) -> usize {
        6 * self.0.len()
    }

    pub fn flatten(&self) -> DVector<f64> {
        DVector::from_iterator(self.dim(), self.0.iter().flat_map(|a| a.0.into_iter()))
    }

    pub fn from_flat(v: &DVector<f64>) -> Self {
        let n = v.len() / 6;
        Self(
            (0..n)
                .map(|c| {
                    let mut a = [0.0; 6];
                    for k in 0..6 {
                        a[k] = v[6 * c + k];
                    }
                    SimplexAngles(a)
                })
                .collect(),
        )
    }

    /// Smallest distance of any cell's angles from the polytope
    /// boundary.
    pub fn interior_margin(&self) -> f64 {
        self.0
            .iter()
            .map(|a| a.interior_margin())
            .fold(f64::INFINITY, f64::min)
    }
}

/// One total angle per distinct edge of the triangulation, indexed like
/// `Triangulation::edges()`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSums(pub Vec<f64>);

/// Incidence structure of the edge-sum map.
pub struct EdgeMap {
    /// Distinct edges in sorted order.
    pub edges: Vec<(usize, usize)>,
    /// For each edge, the (cell, local edge) slots summing into it.
    pub incidences: Vec<Vec<(usize, usize)>>,
}

impl EdgeMap {
    pub fn new(t: &Triangulation) -> Self {
        let edges = t.edges();
        let index: std::collections::BTreeMap<(usize, usize), usize> =
            edges.iter().cloned().zip(0..).collect();
        let mut incidences = vec![Vec::new(); edges.len()];
        for (ci, cell) in t.tetrahedra().iter().enumerate() {
            for (le, &(i, j)) in EDGE_PAIRS.iter().enumerate() {
                let key = (cell[i].min(cell[j]), cell[i].max(cell[j]));
                incidences[index[&key]].push((ci, le));
            }
        }
        Self { edges, incidences }
    }

    /// Matrix of the linear map from stacked angles to edge sums.
    pub fn matrix(&self, cells: usize) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.edges.len(), 6 * cells);
        for (e, slots) in self.incidences.iter().enumerate() {
            for &(ci, le) in slots {
                m[(e, 6 * ci + le)] = 1.0;
            }
        }
        m
    }
}

/// Geometric simplex of cell `ci` read off the triangulation.
pub fn cell_simplex(t: &Triangulation, ci: usize) -> Result<HyperidealSimplex, OptError> {
    let mesh = t.mesh();
    let c = &t.cells()[ci].vertices;
    let s = HyperidealSimplex::new([
        KleinPoint(mesh.vertices[c[0]]),
        KleinPoint(mesh.vertices[c[1]]),
        KleinPoint(mesh.vertices[c[2]]),
        KleinPoint(mesh.vertices[c[3]]),
    ])?;
    Ok(s)
}

/// The geometric angle assignment of the triangulation: every cell's
/// dihedral angles in place.
pub fn base_point(t: &Triangulation) -> Result<AngleAssignment, OptError> {
    let mut out = Vec::with_capacity(t.cells().len());
    for ci in 0..t.cells().len() {
        let s = cell_simplex(t, ci)?;
        out.push(simplex_dihedrals(&s)?);
    }
    Ok(AngleAssignment(out))
}

/// Edge-sum map: the total angle contributed to each distinct edge.
pub fn edge_sums(t: &Triangulation, theta: &AngleAssignment) -> Result<EdgeSums, OptError> {
    if theta.0.len() != t.cells().len() {
        return Err(OptError::IndexMismatch);
    }
    let map = EdgeMap::new(t);
    let mut sums = vec![0.0; map.edges.len()];
    for (e, slots) in map.incidences.iter().enumerate() {
        for &(ci, le) in slots {
            sums[e] += theta.0[ci].0[le];
        }
    }
    Ok(EdgeSums(sums))
}

fn solve_cells(theta: &AngleAssignment) -> Result<Vec<HyperidealSimplex>, OptError> {
    theta
        .0
        .iter()
        .map(|a| solve_from_angles(a, SOLVE_TOL).map_err(OptError::from))
        .collect()
}

/// Total volume of the angle assignment: each cell is realized by the
/// angle solver and its truncated volume summed.
pub fn total_volume(t: &Triangulation, theta: &AngleAssignment, tol: f64) -> Result<f64, OptError> {
    if theta.0.len() != t.cells().len() {
        return Err(OptError::IndexMismatch);
    }
    let mut v = 0.0;
    for s in solve_cells(theta)? {
        v += simplex_volume(&s, tol)?;
    }
    Ok(v)
}

/// Schläfli gradient of the total volume in stacked angle coordinates:
/// `-L/2` per (cell, local edge), lengths from the solved simplices.
pub fn volume_gradient(
    t: &Triangulation,
    theta: &AngleAssignment,
) -> Result<DVector<f64>, OptError> {
    if theta.0.len() != t.cells().len() {
        return Err(OptError::IndexMismatch);
    }
    let mut g = DVector::zeros(theta.dim());
    for (ci, s) in solve_cells(theta)?.iter().enumerate() {
        let lengths = simplex_lengths(s)?;
        for (le, &l) in lengths.iter().enumerate() {
            g[6 * ci + le] = -l / 2.0;
        }
    }
    Ok(g)
}

/// Criticality measure: the largest disagreement (max minus min) of the
/// lengths assigned to an edge by its incident solved simplices. Zero
/// exactly at critical points of the volume on the edge-sum fiber.
pub fn criticality_residual(t: &Triangulation, theta: &AngleAssignment) -> Result<f64, OptError> {
    if theta.0.len() != t.cells().len() {
        return Err(OptError::IndexMismatch);
    }
    let map = EdgeMap::new(t);
    let mut per_cell_lengths = Vec::with_capacity(theta.0.len());
    for s in solve_cells(theta)? {
        per_cell_lengths.push(simplex_lengths(&s)?);
    }
    let mut worst = 0.0f64;
    for slots in &map.incidences {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for &(ci, le) in slots {
            let l = per_cell_lengths[ci][le];
            lo = lo.min(l);
            hi = hi.max(l);
        }
        if slots.len() > 1 {
            worst = worst.max(hi - lo);
        }
    }
    Ok(worst)
}

/// Orthonormal basis of the null space of the edge-sum map, from the
/// eigendecomposition of `F^T F` (a thin SVD of the wide `F` does not
/// expose the null space).
fn fiber_basis(map: &EdgeMap, cells: usize) -> DMatrix<f64> {
    let f = map.matrix(cells);
    let normal = f.transpose() * &f;
    let eig = normal.symmetric_eigen();
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let n = 6 * cells;
    let mut cols: Vec<usize> = (0..n)
        .filter(|&k| eig.eigenvalues[k] <= 1e-12 * lmax)
        .collect();
    cols.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let mut basis = DMatrix::zeros(n, cols.len());
    for (c, &k) in cols.iter().enumerate() {
        basis.set_column(c, &eig.eigenvectors.column(k));
    }
    basis
}

/// Result of the in-fiber maximization.
#[derive(Debug, Clone)]
pub struct FiberMax {
    pub theta: AngleAssignment,
    pub iterations: usize,
    pub grad_norm: f64,
    pub criticality: f64,
}

/// Maximizes the total volume on the fiber of prescribed edge sums:
/// Newton ascent in null-space coordinates with backtracking and an
/// interior safeguard, falling back to gradient steps when the reduced
/// Hessian is ill-conditioned. Deterministic for fixed inputs.
pub fn maximize_on_fiber(
    t: &Triangulation,
    alpha: &EdgeSums,
    theta_init: &AngleAssignment,
) -> Result<FiberMax, OptError> {
    let cells = t.cells().len();
    if theta_init.0.len() != cells {
        return Err(OptError::IndexMismatch);
    }
    let map = EdgeMap::new(t);
    if alpha.0.len() != map.edges.len() {
        return Err(OptError::IndexMismatch);
    }
    for (e, &a) in alpha.0.iter().enumerate() {
        let cap = map.incidences[e].len() as f64 * std::f64::consts::PI;
        if !(a > 0.0 && a < cap) {
            return Err(OptError::EmptyFiber);
        }
    }

    // move onto the fiber by the minimum-norm correction
    let f = map.matrix(cells);
    let alpha_vec = DVector::from_column_slice(&alpha.0);
    let r0 = &alpha_vec - &f * theta_init.flatten();
    let correction = f
        .clone()
        .svd(true, true)
        .solve(&r0, 1e-12)
        .map_err(|_| OptError::EmptyFiber)?;
    let mut theta = theta_init.flatten() + correction;
    if AngleAssignment::from_flat(&theta).interior_margin() <= OPT_INTERIOR_MARGIN {
        return Err(OptError::LeftPolytope);
    }

    let z = fiber_basis(&map, cells);
    let nz = z.ncols();
    let grad_z = |th: &DVector<f64>| -> Result<DVector<f64>, OptError> {
        let g = volume_gradient(t, &AngleAssignment::from_flat(th))?;
        Ok(z.transpose() * g)
    };

    let mut g = grad_z(&theta)?;
    let mut iterations = 0;
    let max_iter = 60;
    while g.norm() >= OPT_GRAD_TOL && iterations < max_iter {
        iterations += 1;
        // reduced Hessian by central differences of the projected
        // gradient along the null-space directions, with Richardson
        // extrapolation over (h, h/2)
        let mut hess = DMatrix::zeros(nz, nz);
        for c in 0..nz {
            let dir = z.column(c).into_owned();
            let col_at = |h: f64| -> Result<DVector<f64>, OptError> {
                let gp = grad_z(&(&theta + &dir * h))?;
                let gm = grad_z(&(&theta - &dir * h))?;
                Ok((gp - gm) / (2.0 * h))
            };
            let c_h = col_at(HESS_STEP)?;
            let c_h2 = col_at(HESS_STEP / 2.0)?;
            hess.set_column(c, &((c_h2 * 4.0 - c_h) / 3.0));
        }
        let hess = (&hess + &hess.transpose()) / 2.0;

        let svd = hess.clone().svd(false, false);
        let cond = svd.singular_values.max() / svd.singular_values.min().max(1e-300);
        let direction = if cond < OPT_COND_LIMIT {
            match hess.clone().lu().solve(&g) {
                // Newton step towards the critical point
                Some(d) => -d,
                None => g.clone(),
            }
        } else {
            g.clone()
        };

        // backtracking: accept when the projected gradient shrinks and
        // the iterate keeps a safe distance from the polytope boundary
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = &theta + &z * (&direction * step);
            let assignment = AngleAssignment::from_flat(&cand);
            if assignment.interior_margin() > OPT_INTERIOR_MARGIN {
                if let Ok(gc) = grad_z(&cand) {
                    if gc.norm() < g.norm() {
                        theta = cand;
                        g = gc;
                        accepted = true;
                        break;
                    }
                }
            }
            step /= 2.0;
        }
        if !accepted {
            return Err(OptError::NoConvergence {
                grad_norm: g.norm(),
            });
        }
    }
    if g.norm() >= OPT_GRAD_TOL {
        return Err(OptError::NoConvergence {
            grad_norm: g.norm(),
        });
    }
    let theta = AngleAssignment::from_flat(&theta);
    let criticality = criticality_residual(t, &theta)?;
    if criticality >= OPT_CRIT_TOL {
        return Err(OptError::NoConvergence {
            grad_norm: criticality,
        });
    }
    Ok(FiberMax {
        grad_norm: g.norm(),
        criticality,
        iterations,
        theta,
    })
}

/// Samples the reduced volume along the segment between two edge-sum
/// targets and checks midpoint concavity of the sampled sequence.
#[derive(Debug, Clone)]
pub struct ConcavityProbe {
    pub values: Vec<f64>,
    pub concave: bool,
}

pub fn reduced_volume_probe(
    t: &Triangulation,
    alpha1: &EdgeSums,
    alpha2: &EdgeSums,
    samples: usize,
    quad_tol: f64,
) -> Result<ConcavityProbe, OptError> {
    let theta0 = base_point(t)?;
    let mut values = Vec::with_capacity(samples + 1);
    let mut warm = theta0;
    for k in 0..=samples {
        let lam = k as f64 / samples as f64;
        let alpha: Vec<f64> = alpha1
            .0
            .iter()
            .zip(alpha2.0.iter())
            .map(|(a, b)| (1.0 - lam) * a + lam * b)
            .collect();
        let result = maximize_on_fiber(t, &EdgeSums(alpha), &warm)?;
        warm = result.theta.clone();
        values.push(total_volume(t, &result.theta, quad_tol)?);
    }
    let concave =
        (1..values.len() - 1).all(|i| values[i] > (values[i - 1] + values[i + 1]) / 2.0 - 1e-12);
    Ok(ConcavityProbe { values, concave })
}

/// Report of the boundary-angle chart and concavity checks.
#[derive(Debug, Clone)]
pub struct TheoremEReport {
    /// Rank of the boundary-angle Jacobian on the complement of the
    /// trivial motions.
    pub chart_rank: usize,
    /// Expected rank `3V - 6`.
    pub expected_rank: usize,
    /// Eigenvalues of the assembled volume Hessian in boundary-angle
    /// coordinates, ascending.
    pub hessian_eigenvalues: Vec<f64>,
    /// Relative asymmetry of the Hessian before symmetrization.
    pub hessian_asymmetry: f64,
    pub concave: bool,
}

/// Boundary angles of the triangulated polyhedron at given vertex
/// positions (sum of incident cell dihedrals per boundary edge).
fn boundary_angles_at(
    tets: &[[usize; 4]],
    boundary: &[(usize, usize)],
    positions: &[nalgebra::Vector3<f64>],
) -> DVector<f64> {
    let index: std::collections::BTreeMap<(usize, usize), usize> =
        boundary.iter().cloned().zip(0..).collect();
    let mut angles = DVector::zeros(boundary.len());
    for cell in tets {
        for &(i, j) in EDGE_PAIRS.iter() {
            let key = (cell[i].min(cell[j]), cell[i].max(cell[j]));
            let Some(&row) = index.get(&key) else {
                continue;
            };
            let others: Vec<usize> = (0..4).filter(|&k| k != i && k != j).collect();
            let q = [
                positions[cell[i]],
                positions[cell[j]],
                positions[cell[others[0]]],
                positions[cell[others[1]]],
            ];
            angles[row] += tet_dihedral(&q);
        }
    }
    angles
}

/// Newton solve for vertex positions realizing prescribed boundary
/// angles, with the gauge fixed by freezing the six coordinates picked
/// by column-pivoted QR of the trivial-motion basis.
struct AngleChartSolver {
    tets: Vec<[usize; 4]>,
    boundary: Vec<(usize, usize)>,
    free: Vec<usize>,
    base: Vec<nalgebra::Vector3<f64>>,
}

impl AngleChartSolver {
    fn new(t: &Triangulation) -> Result<Self, OptError> {
        let mesh = t.mesh();
        let points: Vec<KleinPoint> = mesh.vertices.iter().map(|v| KleinPoint(*v)).collect();
        let trivial = so31_trivial_motions(&points).map_err(|_| OptError::ChartSingular {
            rank: 0,
            expected: 0,
        })?;
        let n = 3 * mesh.vertices.len();
        let mut tmat = DMatrix::zeros(6, n);
        for (r, f) in trivial.iter().enumerate() {
            tmat.set_row(r, &f.flatten().transpose());
        }
        // pivoted column selection: freeze the six coordinates on which
        // the trivial motions act most independently
        let mut frozen: Vec<usize> = Vec::with_capacity(6);
        let mut chosen: Vec<DVector<f64>> = Vec::with_capacity(6);
        for _ in 0..6 {
            let mut best: Option<(usize, f64, DVector<f64>)> = None;
            for c in 0..n {
                if frozen.contains(&c) {
                    continue;
                }
                let mut col = tmat.column(c).into_owned();
                for q in &chosen {
                    let p = q.dot(&col);
                    col -= q * p;
                }
                let norm = col.norm();
                if best.as_ref().is_none_or(|(_, b, _)| norm > *b) {
                    best = Some((c, norm, col));
                }
            }
            let (c, norm, col) = best.ok_or(OptError::ChartSingular {
                rank: 0,
                expected: 6,
            })?;
            if norm <= 1e-10 {
                return Err(OptError::ChartSingular {
                    rank: frozen.len(),
                    expected: 6,
                });
            }
            chosen.push(col / norm);
            frozen.push(c);
        }
        frozen.sort_unstable();
        let free: Vec<usize> = (0..n).filter(|k| !frozen.contains(k)).collect();
        Ok(Self {
            tets: t.tetrahedra(),
            boundary: t.boundary_edges(),
            free,
            base: mesh.vertices.clone(),
        })
    }

    fn positions_from_free(&self, free_vals: &DVector<f64>) -> Vec<nalgebra::Vector3<f64>> {
        let mut pos = self.base.clone();
        for (k, &idx) in self.free.iter().enumerate() {
            pos[idx / 3][idx % 3] = free_vals[k];
        }
        pos
    }

    fn free_from_positions(&self, pos: &[nalgebra::Vector3<f64>]) -> DVector<f64> {
        DVector::from_iterator(
            self.free.len(),
            self.free.iter().map(|&idx| pos[idx / 3][idx % 3]),
        )
    }

    /// Jacobian of boundary angles with respect to the free coordinates.
    fn jacobian(&self, positions: &[nalgebra::Vector3<f64>]) -> DMatrix<f64> {
        let index: std::collections::BTreeMap<(usize, usize), usize> =
            self.boundary.iter().cloned().zip(0..).collect();
        let mut full = DMatrix::zeros(self.boundary.len(), 3 * positions.len());
        for cell in &self.tets {
            for &(i, j) in EDGE_PAIRS.iter() {
                let key = (cell[i].min(cell[j]), cell[i].max(cell[j]));
                let Some(&row) = index.get(&key) else {
                    continue;
                };
                let others: Vec<usize> = (0..4).filter(|&k| k != i && k != j).collect();
                let order = [cell[i], cell[j], cell[others[0]], cell[others[1]]];
                let q = [
                    positions[order[0]],
                    positions[order[1]],
                    positions[order[2]],
                    positions[order[3]],
                ];
                let (_, grads) = crate::rigidity::tet_dihedral_gradient(&q);
                for (slot, &vertex) in order.iter().enumerate() {
                    for k in 0..3 {
                        full[(row, 3 * vertex + k)] += grads[slot][k];
                    }
                }
            }
        }
        let mut jac = DMatrix::zeros(self.boundary.len(), self.free.len());
        for (c, &idx) in self.free.iter().enumerate() {
            jac.set_column(c, &full.column(idx));
        }
        jac
    }

    fn solve(
        &self,
        target: &DVector<f64>,
        tol: f64,
    ) -> Result<Vec<nalgebra::Vector3<f64>>, OptError> {
        let mut free_vals = self.free_from_positions(&self.base);
        let mut pos = self.positions_from_free(&free_vals);
        let mut residual = boundary_angles_at(&self.tets, &self.boundary, &pos) - target;
        for _ in 0..50 {
            if residual.amax() < tol {
                return Ok(pos);
            }
            let jac = self.jacobian(&pos);
            let delta = jac.lu().solve(&residual).ok_or(OptError::NoConvergence {
                grad_norm: residual.amax(),
            })?;
            let mut step = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let cand = &free_vals - &delta * step;
                let cand_pos = self.positions_from_free(&cand);
                let cand_res = boundary_angles_at(&self.tets, &self.boundary, &cand_pos) - target;
                if cand_res.amax() < residual.amax() {
                    free_vals = cand;
                    pos = cand_pos;
                    residual = cand_res;
                    accepted = true;
                    break;
                }
                step /= 2.0;
            }
            if !accepted {
                return Err(OptError::NoConvergence {
                    grad_norm: residual.amax(),
                });
            }
        }
        if residual.amax() < tol {
            Ok(pos)
        } else {
            Err(OptError::NoConvergence {
                grad_norm: residual.amax(),
            })
        }
    }
}

fn boundary_lengths(
    boundary: &[(usize, usize)],
    positions: &[nalgebra::Vector3<f64>],
) -> Result<DVector<f64>, OptError> {
    let mut l = DVector::zeros(boundary.len());
    for (k, &(i, j)) in boundary.iter().enumerate() {
        l[k] = truncated_edge_length(&KleinPoint(positions[i]), &KleinPoint(positions[j]))
            .map_err(|e| OptError::Simplex(crate::error::SimplexError::Hyp(e)))?;
    }
    Ok(l)
}

/// Chart and concavity checks for the boundary-angle parametrization:
/// (a) the boundary-angle Jacobian has rank `3V - 6` transverse to the
/// trivial motions; (b) the volume Hessian in boundary-angle
/// coordinates, assembled by differencing the Schläfli gradient through
/// the local inverse, is negative definite.
pub fn theorem_e_check(t: &Triangulation, sigma_tol: f64) -> Result<TheoremEReport, OptError> {
    let mesh = t.mesh();
    let expected_rank = 3 * mesh.vertices.len() - 6;
    let (jac, boundary) = hyperbolic_angle_jacobian(t).map_err(|_| OptError::ChartSingular {
        rank: 0,
        expected: expected_rank,
    })?;
    if boundary.len() != expected_rank {
        return Err(OptError::ChartSingular {
            rank: boundary.len(),
            expected: expected_rank,
        });
    }
    let points: Vec<KleinPoint> = mesh.vertices.iter().map(|v| KleinPoint(*v)).collect();
    let trivial = so31_trivial_motions(&points).map_err(|_| OptError::ChartSingular {
        rank: 0,
        expected: expected_rank,
    })?;
    let trivial_flat: Vec<DVector<f64>> = trivial
        .iter()
        .map(|f: &DeformationField| {
            let v = f.flatten();
            let n = v.norm();
            v / n
        })
        .collect();
    // rank on the complement of the trivial motions
    let n = jac.ncols();
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for v in &trivial_flat {
        let mut u = v.clone();
        for o in &basis {
            let p = o.dot(&u);
            u -= o * p;
        }
        if u.norm() > 1e-12 {
            let nu = u.norm();
            basis.push(u / nu);
        }
    }
    let mut complement_cols: Vec<DVector<f64>> = Vec::new();
    for k in 0..n {
        if complement_cols.len() == n - basis.len() {
            break;
        }
        let mut u = DVector::zeros(n);
        u[k] = 1.0;
        for o in basis.iter().chain(complement_cols.iter()) {
            let p = o.dot(&u);
            u -= o * p;
        }
        if u.norm() > 1e-8 {
            let nu = u.norm();
            complement_cols.push(u / nu);
        }
    }
    let mut complement = DMatrix::zeros(n, complement_cols.len());
    for (i, v) in complement_cols.iter().enumerate() {
        complement.set_column(i, v);
    }
    let restricted = &jac * &complement;
    let svd = restricted.svd(false, false);
    let smax = svd.singular_values.max();
    let chart_rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s >= sigma_tol * smax)
        .count();
    if chart_rank != expected_rank {
        return Err(OptError::ChartSingular {
            rank: chart_rank,
            expected: expected_rank,
        });
    }

    // Hessian of the volume in boundary-angle coordinates through the
    // local inverse, via the Schläfli gradient -L/2
    let solver = AngleChartSolver::new(t)?;
    let base_angles = boundary_angles_at(&solver.tets, &solver.boundary, &mesh.vertices);
    let m = boundary.len();
    let dl_at = |h: f64| -> Result<DMatrix<f64>, OptError> {
        let mut d = DMatrix::zeros(m, m);
        for col in 0..m {
            let mut tp = base_angles.clone();
            tp[col] += h;
            let mut tm = base_angles.clone();
            tm[col] -= h;
            let pp = solver.solve(&tp, 1e-11)?;
            let pm = solver.solve(&tm, 1e-11)?;
            let lp = boundary_lengths(&solver.boundary, &pp)?;
            let lm = boundary_lengths(&solver.boundary, &pm)?;
            d.set_column(col, &((lp - lm) / (2.0 * h)));
        }
        Ok(d)
    };
    let d_h = dl_at(HESS_STEP)?;
    let d_h2 = dl_at(HESS_STEP / 2.0)?;
    let d = (d_h2 * 4.0 - d_h) / 3.0;
    let hess = d * (-0.5);
    let asym = (&hess - &hess.transpose()).norm() / hess.norm();
    let hess = (&hess + &hess.transpose()) / 2.0;
    let eig = hess.symmetric_eigen();
    let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().cloned().collect();
    eigenvalues.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let concave = eigenvalues.iter().all(|&l| l < -EPS_HESSIAN);
    Ok(TheoremEReport {
        chart_rank,
        expected_rank,
        hessian_eigenvalues: eigenvalues,
        hessian_asymmetry: asym,
        concave,
    })
}
