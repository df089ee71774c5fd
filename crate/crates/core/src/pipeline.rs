//! End-to-end rigidity pipeline: instance validation, ellipsoid
//! hypothesis, affine normalization onto the unit ball, triangulation,
//! Jacobian assembly, and the SVD verdicts.

use nalgebra::Vector3;
use serde::Serialize;
use thiserror::Error;

use crate::error::{MeshError, OptError, RigidityError};
use crate::hyp::KleinPoint;
use crate::mesh::{
    ellipsoid_hypothesis_check, fit_ellipsoid, hyperideal_check, instance_mesh,
    triangulate_cellulation, validate_cellulation, validate_mesh, Cellulation, Ellipsoid,
    HyperidealReport, HypothesisReport, Instance, SurfaceMesh, Triangulation,
};
use crate::rigidity::{
    euclidean_length_jacobian, euclidean_trivial_motions, hyperbolic_angle_jacobian,
    hyperbolic_length_jacobian, rigidity_verdict, so31_trivial_motions, EdgeSet, RigidityMode,
    RigidityReport,
};

#[derive(Debug, Clone, Error)]
pub enum PipelineError {
    #[error("instance has no cells; the cellulation must be given")]
    MissingCells,
    #[error("instance has no ellipsoid and none was requested to be fitted")]
    MissingEllipsoid,
    /// The ellipsoid hypothesis fails; the report names the violations.
    #[error("ellipsoid hypothesis violated ({} violations)", report.violations.len())]
    HypothesisViolated { report: HypothesisReport },
    /// Vertices or edges are misplaced after normalization.
    #[error("hyperideal position check failed ({} violations)", report.violations.len())]
    HyperidealViolated { report: HyperidealReport },
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Rigidity(#[from] RigidityError),
    #[error(transparent)]
    Opt(#[from] OptError),
}

/// How the ellipsoid is obtained for the Theorem-B pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EllipsoidSource {
    /// Use the ellipsoid stored in the instance.
    Given,
    /// Fit a quadric through the mesh vertices and shrink it by the
    /// given factor (the vertices-on-an-ellipsoid reduction).
    Auto { shrink: f64 },
}

/// Everything the Theorem-B pipeline produced.
#[derive(Debug, Clone, Serialize)]
pub struct TheoremBOutcome {
    pub hypothesis: HypothesisReport,
    pub hyperideal: HyperidealReport,
    pub length_report: RigidityReport,
    pub angle_report: RigidityReport,
    /// Diagnostic variant over every distinct cell edge (the verdicts
    /// above concern the boundary edges).
    pub length_report_all_edges: RigidityReport,
    /// Ellipsoid actually used, in JSON form.
    pub ellipsoid: crate::mesh::EllipsoidJson,
}

/// Validates the instance into a cellulation.
pub fn validated_cellulation(inst: &Instance) -> Result<Cellulation, PipelineError> {
    let mesh = validate_mesh(instance_mesh(inst))?;
    let cells = inst.cells.as_ref().ok_or(PipelineError::MissingCells)?;
    Ok(validate_cellulation(&mesh, cells)?)
}

/// Applies an affine map to every vertex of a cellulation and
/// revalidates it (affine maps preserve all combinatorial structure,
/// so this re-runs the numeric checks on the moved coordinates).
pub fn transform_cellulation(
    c: &Cellulation,
    map: &crate::mesh::AffineMap,
) -> Result<Cellulation, PipelineError> {
    let mesh = SurfaceMesh {
        vertices: c.mesh.vertices.iter().map(|v| map.apply(v)).collect(),
        triangles: c.mesh.triangles.clone(),
    };
    let mesh = validate_mesh(mesh)?;
    let raw: Vec<Vec<usize>> = c.cells.iter().map(|cell| cell.vertices.clone()).collect();
    Ok(validate_cellulation(&mesh, &raw)?)
}

/// The full Theorem-B pipeline: hypothesis check against the ellipsoid,
/// normalization onto the unit ball, hyperideal check, triangulation,
/// and both hyperbolic rigidity verdicts.
pub fn theorem_b(
    inst: &Instance,
    source: EllipsoidSource,
    sigma_tol: f64,
) -> Result<TheoremBOutcome, PipelineError> {
    let cellulation = validated_cellulation(inst)?;
    let ellipsoid = match source {
        EllipsoidSource::Given => {
            let e = inst
                .ellipsoid
                .as_ref()
                .ok_or(PipelineError::MissingEllipsoid)?;
            Ellipsoid::from_json(e)
        }
        EllipsoidSource::Auto { shrink } => {
            let fit = fit_ellipsoid(&cellulation.mesh.vertices).map_err(PipelineError::Mesh)?;
            fit.ellipsoid.shrink(shrink).map_err(PipelineError::Mesh)?
        }
    };

    let hypothesis = ellipsoid_hypothesis_check(&cellulation, &ellipsoid);
    if !hypothesis.pass {
        return Err(PipelineError::HypothesisViolated { report: hypothesis });
    }

    // projective (here affine) normalization: ellipsoid -> unit sphere
    let map = ellipsoid.normalize_to_ball();
    let normalized = transform_cellulation(&cellulation, &map)?;
    let triangulation = triangulate_cellulation(&normalized)?;

    let hyperideal = hyperideal_check(&triangulation);
    if !hyperideal.pass {
        return Err(PipelineError::HyperidealViolated { report: hyperideal });
    }

    let (length_report, angle_report) = hyperbolic_reports(&triangulation, sigma_tol)?;
    let points: Vec<KleinPoint> = triangulation
        .mesh()
        .vertices
        .iter()
        .map(|v| KleinPoint(*v))
        .collect();
    let trivial = so31_trivial_motions(&points)?;
    let (jac_all, _) = hyperbolic_length_jacobian(&triangulation, EdgeSet::All)?;
    let length_report_all_edges = rigidity_verdict(
        &jac_all,
        &trivial,
        sigma_tol,
        RigidityMode::HyperbolicLength,
    );
    Ok(TheoremBOutcome {
        hypothesis,
        hyperideal,
        length_report,
        angle_report,
        length_report_all_edges,
        ellipsoid: ellipsoid.to_json(),
    })
}

/// Length- and angle-mode rigidity reports of a hyperideal
/// triangulation.
pub fn hyperbolic_reports(
    t: &Triangulation,
    sigma_tol: f64,
) -> Result<(RigidityReport, RigidityReport), PipelineError> {
    let points: Vec<KleinPoint> = t.mesh().vertices.iter().map(|v| KleinPoint(*v)).collect();
    let trivial = so31_trivial_motions(&points)?;
    let (jac_len, _) = hyperbolic_length_jacobian(t, EdgeSet::Boundary)?;
    let length_report = rigidity_verdict(
        &jac_len,
        &trivial,
        sigma_tol,
        RigidityMode::HyperbolicLength,
    );
    let (jac_ang, _) = hyperbolic_angle_jacobian(t)?;
    let angle_report =
        rigidity_verdict(&jac_ang, &trivial, sigma_tol, RigidityMode::HyperbolicAngle);
    Ok((length_report, angle_report))
}

/// Euclidean edge-length rigidity verdict of the instance's surface
/// mesh.
pub fn check_euclidean(inst: &Instance, sigma_tol: f64) -> Result<RigidityReport, PipelineError> {
    let mesh = validate_mesh(instance_mesh(inst))?;
    let jac = euclidean_length_jacobian(&mesh);
    let trivial = euclidean_trivial_motions(&mesh)?;
    Ok(rigidity_verdict(
        &jac,
        &trivial,
        sigma_tol,
        RigidityMode::EuclideanLength,
    ))
}

/// Euclidean verdict for an already validated mesh.
pub fn check_euclidean_mesh(
    mesh: &SurfaceMesh,
    sigma_tol: f64,
) -> Result<RigidityReport, PipelineError> {
    let jac = euclidean_length_jacobian(mesh);
    let trivial = euclidean_trivial_motions(mesh)?;
    Ok(rigidity_verdict(
        &jac,
        &trivial,
        sigma_tol,
        RigidityMode::EuclideanLength,
    ))
}

/// Rebuilds an instance with transformed vertex coordinates.
pub fn map_instance_vertices(
    inst: &Instance,
    f: impl Fn(&Vector3<f64>) -> Vector3<f64>,
) -> Instance {
    Instance {
        vertices: inst
            .vertices
            .iter()
            .map(|v| {
                let p = f(&Vector3::from(*v));
                [p.x, p.y, p.z]
            })
            .collect(),
        triangles: inst.triangles.clone(),
        cells: inst.cells.clone(),
        ellipsoid: inst.ellipsoid.clone(),
    }
}
