//! Error types for the geometric and numerical layers.

use thiserror::Error;

/// Errors raised by the Minkowski / Klein-model primitives.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HypError {
    /// The point is not strictly outside the closed unit ball.
    #[error("point is not hyperideal (|v| = {norm:.12})")]
    NotHyperideal { norm: f64 },
    /// The point is not strictly inside the open unit ball.
    #[error("point is not interior (|v| = {norm:.12})")]
    NotInterior { norm: f64 },
    /// The open segment between the two endpoints stays outside the ball.
    #[error("edge misses the unit ball (closest approach {dist:.12})")]
    EdgeMissesBall { dist: f64 },
    /// The three points of a face are (nearly) collinear.
    #[error("degenerate face: points are collinear")]
    DegenerateFace,
    /// The affine plane of the face does not cut the open unit ball.
    #[error("face plane misses the unit ball (distance {dist:.12} from origin)")]
    PlaneMissesBall { dist: f64 },
    /// The two hyperbolic planes do not intersect inside the ball.
    #[error("planes are disjoint or tangent (|<N1,N2>| = {inner:.12} >= 1)")]
    PlanesDisjoint { inner: f64 },
}

/// Errors raised by mesh, cellulation and ellipsoid validation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeshError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// An undirected edge is not shared by exactly two consistently
    /// oriented triangles; `(i, j)` is the first offending edge.
    #[error("surface not closed at edge ({0}, {1})")]
    NotClosed(usize, usize),
    #[error("surface is not a sphere (Euler characteristic {chi})")]
    NotSphere { chi: i64 },
    #[error("triangles {0} and {1} intersect")]
    SelfIntersecting(usize, usize),
    /// Triangles pass closer than the geometric tolerance without a
    /// clear intersection; the verdict is reported instead of guessed.
    #[error("triangles {0} and {1} are too close to classify (within tolerance)")]
    IntersectionInconclusive(usize, usize),
    #[error("triangle {0} is degenerate (area below tolerance)")]
    DegenerateTriangle(usize),
    #[error("cell {0} is not a convex polytope on its vertex set")]
    NonConvexCell(usize),
    #[error("cell volumes sum to {sum:.12} but the mesh encloses {expected:.12}")]
    VolumeMismatch { sum: f64, expected: f64 },
    #[error("cells {0} and {1} do not meet face-to-face")]
    NotFaceToFace(usize, usize),
    #[error("cell {cell} refers to vertex {index} outside the mesh vertex table")]
    ForeignVertex { cell: usize, index: usize },
    #[error("cell {0} produced a tetrahedron with volume below tolerance")]
    DegenerateSimplex(usize),
    #[error("point set does not determine a positive-definite quadric")]
    DegeneratePointSet,
    #[error("shrink factor {0} is not in (0, 1)")]
    BadFactor(f64),
    #[error(transparent)]
    Hyp(#[from] HypError),
}

/// Errors raised by hyperideal-simplex computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimplexError {
    #[error(transparent)]
    Hyp(#[from] HypError),
    #[error("truncation produced a degenerate facet")]
    DegenerateTruncation,
    #[error("volume quadrature exceeded its refinement budget (estimate {estimate:.3e})")]
    QuadratureFailure { estimate: f64 },
    /// The requested angles violate the strict vertex-sum condition.
    #[error("angles lie outside the open angle polytope (margin {margin:.3e} at vertex {vertex})")]
    OutsidePolytope { vertex: usize, margin: f64 },
    #[error("solver did not converge (residual {residual:.3e} after {iterations} iterations)")]
    NoConvergence { residual: f64, iterations: usize },
}

/// Errors raised by the rigidity engine.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RigidityError {
    #[error("vertex set is degenerate (collinear or too small)")]
    DegenerateVertexSet,
    #[error(transparent)]
    Hyp(#[from] HypError),
}

/// Errors raised by the Pogorelov-transformation module.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PogoError {
    #[error("point is not on the positive de Sitter hemisphere (x4 = {x4:.6})")]
    NotPositiveHemisphere { x4: f64 },
    #[error("point is not hyperideal (|v| = {norm:.12})")]
    NotHyperideal { norm: f64 },
    #[error("matrix is not skew-symmetric for the Minkowski form (residual {residual:.3e})")]
    NotSkew { residual: f64 },
    #[error("finite-difference step leaves the chart near the sample point")]
    StepTooLarge,
    #[error("vector is not tangent to de Sitter space at its base point (<v,x> = {inner:.3e})")]
    NotTangent { inner: f64 },
}

/// Errors raised by the angle-structure optimizer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum OptError {
    #[error("angle assignment length does not match the triangulation")]
    IndexMismatch,
    #[error("no angle structure realizes the requested edge sums")]
    EmptyFiber,
    #[error("iterate left the open angle polytope")]
    LeftPolytope,
    #[error("optimizer did not converge (gradient norm {grad_norm:.3e})")]
    NoConvergence { grad_norm: f64 },
    #[error("boundary-angle chart is singular (rank {rank}, expected {expected})")]
    ChartSingular { rank: usize, expected: usize },
    #[error(transparent)]
    Simplex(#[from] SimplexError),
    #[error(transparent)]
    Mesh(#[from] MeshError),
}
