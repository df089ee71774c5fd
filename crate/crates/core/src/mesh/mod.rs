//! Polyhedron data model: triangulated surface meshes, cellulations of
//! the enclosed solid, and their validation.
//!
//! A polyhedron is a closed, embedded, triangulated 2-sphere. A
//! cellulation decomposes its interior into convex cells meeting
//! face-to-face, using only the polyhedron's vertices; a triangulation
//! is a cellulation whose cells are all tetrahedra. The validator
//! checks every structural invariant with scale-invariant tolerances
//! and reports the first offending simplex by name.

mod ellipsoid;
mod off;

pub use ellipsoid::{fit_ellipsoid, AffineMap, Ellipsoid, EllipsoidReport};
pub use off::{parse_off, write_off_polytopes};

use std::collections::BTreeMap;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::MeshError;
use crate::geom::{quadric_min_on_segment, tri_tri_contact, tri_tri_distance, Tri, TriContact};
use crate::polytope::{hull_facets, ConvexPolytope, Halfspace};
use crate::tol::{EPS_CLASS, EPS_GEO_REL, EPS_VOL_REL};

/// Closed, embedded, triangulated sphere in R^3.
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    pub vertices: Vec<Vector3<f64>>,
    /// Oriented triangles (consistent outward orientation after
    /// validation).
    pub triangles: Vec<[usize; 3]>,
}

/// Convex cell of a cellulation: vertex indices into the mesh table
/// plus the facet cycles of its hull.
#[derive(Debug, Clone)]
pub struct Cell {
    pub vertices: Vec<usize>,
    /// Facet cycles in mesh-vertex indices, outward oriented planes in
    /// `polytope`.
    pub facets: Vec<Vec<usize>>,
    pub polytope: ConvexPolytope,
}

/// Validated cellulation of the solid bounded by `mesh`.
#[derive(Debug, Clone)]
pub struct Cellulation {
    pub mesh: SurfaceMesh,
    pub cells: Vec<Cell>,
}

/// Cellulation whose cells are all tetrahedra. Constructed through
/// `triangulate_cellulation`, which establishes the invariants.
#[derive(Debug, Clone)]
pub struct Triangulation {
    pub(crate) cellulation: Cellulation,
}

/// One instance file: the canonical JSON container consumed by every
/// CLI subcommand.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Instance {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cells: Option<Vec<Vec<usize>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ellipsoid: Option<EllipsoidJson>,
}

/// JSON form of an ellipsoid `{A, c}` with `(x-c)^T A (x-c) = 1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EllipsoidJson {
    #[serde(rename = "A")]
    pub a: [[f64; 3]; 3],
    pub c: [f64; 3],
}

/// Input format accepted by `load_mesh`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Json,
}

impl SurfaceMesh {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Undirected edges, each listed once (sorted pairs).
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut set = std::collections::BTreeSet::new();
        for t in &self.triangles {
            for k in 0..3 {
                let a = t[k];
                let b = t[(k + 1) % 3];
                set.insert((a.min(b), a.max(b)));
            }
        }
        set.into_iter().collect()
    }

    /// Diameter of the axis-aligned bounding box.
    pub fn bbox_diameter(&self) -> f64 {
        bbox_diameter(&self.vertices)
    }

    /// Scale-invariant geometric tolerance for this mesh.
    pub fn eps_geo(&self) -> f64 {
        EPS_GEO_REL * self.bbox_diameter()
    }

    /// Enclosed volume by the divergence theorem (assumes validated
    /// outward orientation).
    pub fn enclosed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let a = self.vertices[t[0]];
                let b = self.vertices[t[1]];
                let c = self.vertices[t[2]];
                a.dot(&b.cross(&c)) / 6.0
            })
            .sum()
    }

    fn triangle(&self, i: usize) -> Tri {
        let t = self.triangles[i];
        [
            self.vertices[t[0]],
            self.vertices[t[1]],
            self.vertices[t[2]],
        ]
    }

    /// Interior dihedral angle of the polyhedron at boundary edge
    /// `(i, j)`, assembled as the sum of incident-cell angles, may
    /// exceed pi at reflex edges. Provided by `Triangulation`.
    pub fn triangle_containing_edge(&self, i: usize, j: usize) -> Vec<usize> {
        self.triangles
            .iter()
            .enumerate()
            .filter(|(_, t)| t.contains(&i) && t.contains(&j))
            .map(|(k, _)| k)
            .collect()
    }
}

pub(crate) fn bbox_diameter(vertices: &[Vector3<f64>]) -> f64 {
    if vertices.is_empty() {
        return 0.0;
    }
    let mut lo = vertices[0];
    let mut hi = vertices[0];
    for v in vertices {
        lo = lo.inf(v);
        hi = hi.sup(v);
    }
    (hi - lo).norm()
}

/// Loads and fully validates a surface mesh from bytes.
pub fn load_mesh(source: &[u8], format: MeshFormat) -> Result<SurfaceMesh, MeshError> {
    let mesh = match format {
        MeshFormat::Off => parse_off(source)?,
        MeshFormat::Json => {
            let inst: Instance = serde_json::from_slice(source).map_err(|e| MeshError::Parse {
                line: e.line(),
                msg: e.to_string(),
            })?;
            instance_mesh(&inst)
        }
    };
    validate_mesh(mesh)
}

/// Extracts the (unvalidated) mesh part of an instance.
pub fn instance_mesh(inst: &Instance) -> SurfaceMesh {
    SurfaceMesh {
        vertices: inst.vertices.iter().map(|v| Vector3::from(*v)).collect(),
        triangles: inst.triangles.clone(),
    }
}

/// Runs all surface-mesh invariants; canonicalizes the orientation so
/// the enclosed volume is positive.
pub fn validate_mesh(mut mesh: SurfaceMesh) -> Result<SurfaceMesh, MeshError> {
    let nv = mesh.vertices.len();
    for (ti, t) in mesh.triangles.iter().enumerate() {
        for &i in t {
            if i >= nv {
                return Err(MeshError::Parse {
                    line: 0,
                    msg: format!("triangle {ti} refers to vertex {i} out of range"),
                });
            }
        }
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] {
            return Err(MeshError::DegenerateTriangle(ti));
        }
    }

    let eps = mesh.eps_geo();

    // no degenerate triangles
    for i in 0..mesh.triangles.len() {
        if crate::geom::tri_area(&mesh.triangle(i)) <= eps * mesh.bbox_diameter() {
            return Err(MeshError::DegenerateTriangle(i));
        }
    }

    // closed: every undirected edge in exactly two triangles with
    // opposite orientations
    let mut directed: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for t in &mesh.triangles {
        for k in 0..3 {
            let a = t[k];
            let b = t[(k + 1) % 3];
            *directed.entry((a, b)).or_insert(0) += 1;
        }
    }
    for (&(a, b), &count) in &directed {
        let opposite = directed.get(&(b, a)).copied().unwrap_or(0);
        if count != 1 || opposite != 1 {
            return Err(MeshError::NotClosed(a.min(b), a.max(b)));
        }
    }

    // sphere topology
    let v = mesh.vertices.len() as i64;
    let e = mesh.edges().len() as i64;
    let f = mesh.triangles.len() as i64;
    let chi = v - e + f;
    if chi != 2 {
        return Err(MeshError::NotSphere { chi });
    }

    // embedded: pairwise triangle contacts limited to shared simplices
    check_embedded(&mesh, eps)?;

    // canonical outward orientation
    if mesh.enclosed_volume() < 0.0 {
        for t in &mut mesh.triangles {
            t.swap(1, 2);
        }
    }
    Ok(mesh)
}

fn shared_vertices(a: &[usize; 3], b: &[usize; 3]) -> Vec<usize> {
    a.iter().filter(|i| b.contains(i)).cloned().collect()
}

fn check_embedded(mesh: &SurfaceMesh, eps: f64) -> Result<(), MeshError> {
    let n = mesh.triangles.len();
    // bounding-box prefilter
    let boxes: Vec<(Vector3<f64>, Vector3<f64>)> = (0..n)
        .map(|i| {
            let t = mesh.triangle(i);
            (t[0].inf(&t[1]).inf(&t[2]), t[0].sup(&t[1]).sup(&t[2]))
        })
        .collect();

    for i in 0..n {
        for j in (i + 1)..n {
            let (lo_i, hi_i) = boxes[i];
            let (lo_j, hi_j) = boxes[j];
            if (0..3).any(|k| lo_i[k] > hi_j[k] + eps || lo_j[k] > hi_i[k] + eps) {
                continue;
            }
            let shared = shared_vertices(&mesh.triangles[i], &mesh.triangles[j]);
            let t1 = mesh.triangle(i);
            let t2 = mesh.triangle(j);
            match shared.len() {
                0 => match tri_tri_contact(&t1, &t2, eps) {
                    TriContact::Disjoint | TriContact::CoplanarDisjoint => {
                        if tri_tri_distance(&t1, &t2) <= eps {
                            return Err(MeshError::IntersectionInconclusive(i, j));
                        }
                    }
                    _ => return Err(MeshError::SelfIntersecting(i, j)),
                },
                1 => {
                    let p = mesh.vertices[shared[0]];
                    match tri_tri_contact(&t1, &t2, eps) {
                        TriContact::Disjoint | TriContact::CoplanarDisjoint => {}
                        TriContact::Segment(a, b) => {
                            let len = (a - b).norm();
                            if len > 10.0 * eps {
                                return Err(MeshError::SelfIntersecting(i, j));
                            }
                            if (a - p).norm() > 10.0 * eps || (b - p).norm() > 10.0 * eps {
                                return Err(MeshError::IntersectionInconclusive(i, j));
                            }
                        }
                        TriContact::CoplanarOverlap(area) => {
                            if area > eps * mesh.bbox_diameter() {
                                return Err(MeshError::SelfIntersecting(i, j));
                            }
                        }
                    }
                }
                2 => {
                    // shared edge: contact must stay on the edge segment
                    let a = mesh.vertices[shared[0]];
                    let b = mesh.vertices[shared[1]];
                    match tri_tri_contact(&t1, &t2, eps) {
                        TriContact::Disjoint | TriContact::CoplanarDisjoint => {}
                        TriContact::Segment(p, q) => {
                            for x in [p, q] {
                                let on_edge = crate::geom::quadric_min_on_segment(
                                    &nalgebra::Matrix3::identity(),
                                    &x,
                                    &a,
                                    &b,
                                );
                                if on_edge.sqrt() > 10.0 * eps {
                                    return Err(MeshError::SelfIntersecting(i, j));
                                }
                            }
                        }
                        TriContact::CoplanarOverlap(area) => {
                            // flat fold onto the same side of the edge
                            if area > eps * mesh.bbox_diameter() {
                                return Err(MeshError::SelfIntersecting(i, j));
                            }
                        }
                    }
                }
                _ => return Err(MeshError::SelfIntersecting(i, j)),
            }
        }
    }
    Ok(())
}

impl Cellulation {
    /// Distinct undirected edges over all cells.
    pub fn cell_edges(&self) -> Vec<(usize, usize)> {
        let mut set = std::collections::BTreeSet::new();
        for cell in &self.cells {
            for (a, b) in cell.polytope.edges() {
                let (i, j) = (cell.vertices[a], cell.vertices[b]);
                set.insert((i.min(j), i.max(j)));
            }
        }
        set.into_iter().collect()
    }

    pub fn total_cell_volume(&self) -> f64 {
        self.cells.iter().map(|c| c.polytope.volume()).sum()
    }
}

/// Validates a raw cell list against the mesh and returns the
/// canonicalized cellulation with its facet lattice.
pub fn validate_cellulation(
    mesh: &SurfaceMesh,
    raw_cells: &[Vec<usize>],
) -> Result<Cellulation, MeshError> {
    let eps = mesh.eps_geo();
    let nv = mesh.vertices.len();
    let mut cells = Vec::with_capacity(raw_cells.len());

    for (ci, raw) in raw_cells.iter().enumerate() {
        for &i in raw {
            if i >= nv {
                return Err(MeshError::ForeignVertex { cell: ci, index: i });
            }
        }
        let pts: Vec<Vector3<f64>> = raw.iter().map(|&i| mesh.vertices[i]).collect();
        let Some(polytope) = hull_facets(&pts, eps) else {
            return Err(MeshError::NonConvexCell(ci));
        };
        let vol_eps = EPS_VOL_REL * mesh.bbox_diameter().powi(3);
        if polytope.volume() <= vol_eps {
            return Err(MeshError::NonConvexCell(ci));
        }
        let facets = polytope
            .facets
            .iter()
            .map(|f| f.iter().map(|&k| raw[k]).collect())
            .collect();
        cells.push(Cell {
            vertices: raw.clone(),
            facets,
            polytope,
        });
    }

    // pairwise face-to-face checks
    for i in 0..cells.len() {
        for j in (i + 1)..cells.len() {
            check_face_to_face(mesh, &cells, i, j, eps)?;
        }
    }

    // global volume identity
    let total: f64 = cells.iter().map(|c| c.polytope.volume()).sum();
    let expected = mesh.enclosed_volume();
    if (total - expected).abs() > 1e-8 * expected.abs().max(1.0) {
        return Err(MeshError::VolumeMismatch {
            sum: total,
            expected,
        });
    }

    Ok(Cellulation {
        mesh: mesh.clone(),
        cells,
    })
}

/// Two cells must intersect in a common face of both (or not at all).
fn check_face_to_face(
    mesh: &SurfaceMesh,
    cells: &[Cell],
    i: usize,
    j: usize,
    eps: f64,
) -> Result<(), MeshError> {
    let ci = &cells[i];
    let cj = &cells[j];
    let shared: Vec<usize> = ci
        .vertices
        .iter()
        .filter(|v| cj.vertices.contains(v))
        .cloned()
        .collect();

    // intersection polytope of the two closed cells
    let mut planes: Vec<Halfspace> = ci.polytope.planes.clone();
    planes.extend_from_slice(&cj.polytope.planes);
    let meet = crate::polytope::halfspace_intersection(&planes, eps);

    // full-dimensional intersection means overlapping interiors
    if let Some(p) = hull_facets(&meet, eps) {
        if p.volume() > EPS_VOL_REL * mesh.bbox_diameter().powi(3) {
            return Err(MeshError::NotFaceToFace(i, j));
        }
    }

    // the contact set must be exactly the shared vertices
    let shared_pts: Vec<Vector3<f64>> = shared.iter().map(|&v| mesh.vertices[v]).collect();
    for m in &meet {
        if !shared_pts.iter().any(|p| (p - m).norm() <= 100.0 * eps) {
            return Err(MeshError::NotFaceToFace(i, j));
        }
    }
    for p in &shared_pts {
        if !meet.iter().any(|m| (p - m).norm() <= 100.0 * eps) {
            return Err(MeshError::NotFaceToFace(i, j));
        }
    }

    // conv(shared) must be a face of both cells
    if !shared.is_empty() {
        for (cell, _other) in [(ci, cj), (cj, ci)] {
            if !is_face_of(mesh, cell, &shared, eps) {
                return Err(MeshError::NotFaceToFace(i, j));
            }
        }
    }
    Ok(())
}

/// A vertex subset spans a face of a convex cell iff it equals the set
/// of cell vertices lying on every facet plane containing the subset.
fn is_face_of(mesh: &SurfaceMesh, cell: &Cell, subset: &[usize], eps: f64) -> bool {
    let pts: Vec<Vector3<f64>> = subset.iter().map(|&v| mesh.vertices[v]).collect();
    let mut carrier: Vec<&Halfspace> = Vec::new();
    for plane in &cell.polytope.planes {
        if pts.iter().all(|p| plane.eval(p).abs() <= 10.0 * eps) {
            carrier.push(plane);
        }
    }
    if carrier.is_empty() {
        return false;
    }
    let on_all: Vec<usize> = cell
        .vertices
        .iter()
        .cloned()
        .filter(|&v| {
            let p = mesh.vertices[v];
            carrier
                .iter()
                .all(|plane| plane.eval(&p).abs() <= 10.0 * eps)
        })
        .collect();
    let mut a = on_all;
    let mut b = subset.to_vec();
    a.sort_unstable();
    b.sort_unstable();
    a == b
}

impl Triangulation {
    pub fn mesh(&self) -> &SurfaceMesh {
        &self.cellulation.mesh
    }

    pub fn cellulation(&self) -> &Cellulation {
        &self.cellulation
    }

    pub fn total_cell_volume(&self) -> f64 {
        self.cellulation.total_cell_volume()
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cellulation.cells
    }

    /// Vertex-index quadruples of the tetrahedral cells.
    pub fn tetrahedra(&self) -> Vec<[usize; 4]> {
        self.cells()
            .iter()
            .map(|c| [c.vertices[0], c.vertices[1], c.vertices[2], c.vertices[3]])
            .collect()
    }

    /// Distinct cell edges in sorted order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.cellulation.cell_edges()
    }

    /// Boundary edges = edges of the surface mesh.
    pub fn boundary_edges(&self) -> Vec<(usize, usize)> {
        self.mesh().edges()
    }

    /// Interior edges: cell edges that are not boundary edges.
    pub fn interior_edges(&self) -> Vec<(usize, usize)> {
        let boundary: std::collections::BTreeSet<_> = self.boundary_edges().into_iter().collect();
        self.edges()
            .into_iter()
            .filter(|e| !boundary.contains(e))
            .collect()
    }
}

/// Subdivides each cell into tetrahedra by the smallest-index rule:
/// every facet is fanned from its smallest-index vertex (which makes
/// shared facets agree from both sides), and each facet triangle not
/// containing the cell's smallest-index vertex `w` is coned to `w`.
pub fn triangulate_cellulation(c: &Cellulation) -> Result<Triangulation, MeshError> {
    let mesh = &c.mesh;
    let vol_eps = EPS_VOL_REL * mesh.bbox_diameter().powi(3);
    let mut raw_cells: Vec<Vec<usize>> = Vec::new();

    for (ci, cell) in c.cells.iter().enumerate() {
        let w = *cell.vertices.iter().min().unwrap();
        for facet in &cell.facets {
            let apex = *facet.iter().min().unwrap();
            // fan triangulation of the facet from its smallest vertex
            let pos = facet.iter().position(|&v| v == apex).unwrap();
            let m = facet.len();
            for k in 1..m - 1 {
                let a = facet[(pos + k) % m];
                let b = facet[(pos + k + 1) % m];
                let tri = [apex, a, b];
                if tri.contains(&w) {
                    continue;
                }
                let tet = [w, tri[0], tri[1], tri[2]];
                let vol = tet_volume(mesh, &tet);
                if vol <= vol_eps {
                    return Err(MeshError::DegenerateSimplex(ci));
                }
                raw_cells.push(tet.to_vec());
            }
        }
    }

    let before = c.total_cell_volume();
    let cellulation = validate_cellulation(mesh, &raw_cells)?;
    let after = cellulation.total_cell_volume();
    if (before - after).abs() > 1e-10 * before.abs().max(1.0) {
        return Err(MeshError::VolumeMismatch {
            sum: after,
            expected: before,
        });
    }
    Ok(Triangulation { cellulation })
}

fn tet_volume(mesh: &SurfaceMesh, tet: &[usize; 4]) -> f64 {
    let a = mesh.vertices[tet[1]] - mesh.vertices[tet[0]];
    let b = mesh.vertices[tet[2]] - mesh.vertices[tet[0]];
    let c = mesh.vertices[tet[3]] - mesh.vertices[tet[0]];
    a.dot(&b.cross(&c)).abs() / 6.0
}

/// One violation found by `hyperideal_check`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum HyperidealViolation {
    /// Vertex not strictly outside the closed unit ball.
    VertexInsideBall { vertex: usize, norm: f64 },
    /// Cell edge whose open segment misses the open unit ball.
    EdgeMissesBall { edge: (usize, usize), dist: f64 },
}

/// Report of the hyperideal-position check.
#[derive(Debug, Clone, Serialize)]
pub struct HyperidealReport {
    pub pass: bool,
    pub violations: Vec<HyperidealViolation>,
}

/// Verifies that every vertex is hyperideal and every cell edge meets
/// the open unit ball.
pub fn hyperideal_check(t: &Triangulation) -> HyperidealReport {
    let mesh = t.mesh();
    let mut violations = Vec::new();
    for (i, v) in mesh.vertices.iter().enumerate() {
        let n = v.norm();
        if n <= 1.0 + EPS_CLASS {
            violations.push(HyperidealViolation::VertexInsideBall { vertex: i, norm: n });
        }
    }
    for (i, j) in t.edges() {
        let d = crate::hyp::segment_min_norm(&mesh.vertices[i], &mesh.vertices[j]);
        if d >= 1.0 - EPS_CLASS {
            violations.push(HyperidealViolation::EdgeMissesBall {
                edge: (i, j),
                dist: d,
            });
        }
    }
    HyperidealReport {
        pass: violations.is_empty(),
        violations,
    }
}

/// One violation found by `ellipsoid_hypothesis_check`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum EllipsoidViolation {
    VertexInside {
        vertex: usize,
        value: f64,
    },
    EdgeMisses {
        edge: (usize, usize),
        min_value: f64,
    },
}

/// Report of the ellipsoid-hypothesis check: no vertex inside, every
/// cell edge entering the open ellipsoid.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisReport {
    pub pass: bool,
    pub violations: Vec<EllipsoidViolation>,
}

pub fn ellipsoid_hypothesis_check(c: &Cellulation, e: &Ellipsoid) -> HypothesisReport {
    let mut violations = Vec::new();
    for (i, v) in c.mesh.vertices.iter().enumerate() {
        let q = e.eval(v);
        if q <= 1.0 + EPS_CLASS {
            violations.push(EllipsoidViolation::VertexInside {
                vertex: i,
                value: q,
            });
        }
    }
    for (i, j) in c.cell_edges() {
        let q = quadric_min_on_segment(&e.a, &e.c, &c.mesh.vertices[i], &c.mesh.vertices[j]);
        if q >= 1.0 - EPS_CLASS {
            violations.push(EllipsoidViolation::EdgeMisses {
                edge: (i, j),
                min_value: q,
            });
        }
    }
    HypothesisReport {
        pass: violations.is_empty(),
        violations,
    }
}
