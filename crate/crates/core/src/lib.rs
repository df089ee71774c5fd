//! Infinitesimal rigidity of triangulated polyhedra via hyperideal
//! hyperbolic geometry.
//!
//! Given a closed triangulated surface whose interior is cellulated
//! into convex cells, and an ellipsoid that contains no vertex but
//! meets every cell edge, the polyhedron is infinitesimally rigid. The
//! crate implements the machinery behind that criterion and exposes it
//! as a checkable pipeline:
//!
//! * [`hyp`] — Minkowski and Klein-model primitives;
//! * [`mesh`] — surface meshes, cellulations, ellipsoid criteria, file
//!   ingestion;
//! * [`simplex`] — hyperideal simplex geometry, volume quadrature,
//!   Schläfli calculus, the angles -> simplex solver;
//! * [`rigidity`] — edge-length and dihedral-angle Jacobians, trivial
//!   motions, SVD-based verdicts;
//! * [`pogorelov`] — the tangent-space transformation between de Sitter
//!   and Euclidean deformations, with Killing-field diagnostics;
//! * [`angleopt`] — angle structures on a triangulation, concave volume
//!   maximization on edge-sum fibers, chart/concavity checks;
//! * [`pipeline`] — the end-to-end rigidity pipeline consumed by the
//!   CLI;
//! * [`shapes`] — reproducible reference instances.

pub mod angleopt;
pub mod error;
pub mod geom;
pub mod hyp;
pub mod mesh;
pub mod pipeline;
pub mod pogorelov;
pub mod polytope;
pub mod rigidity;
pub mod shapes;
pub mod simplex;
pub mod tol;

pub use error::{HypError, MeshError, OptError, PogoError, RigidityError, SimplexError};
pub use hyp::{HPlane, KleinPoint, MinkowskiVec};
pub use mesh::{Cellulation, Ellipsoid, Instance, SurfaceMesh, Triangulation};
pub use rigidity::{RigidityMode, RigidityReport, Verdict};
pub use simplex::{HyperidealSimplex, SimplexAngles};
