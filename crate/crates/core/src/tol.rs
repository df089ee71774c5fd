//! Numeric tolerances used across the crate.
//!
//! Every threshold that feeds a geometric or spectral decision is named
//! here, so that verdicts can be audited against a single table instead
//! of ad-hoc magic numbers.

/// Relative tolerance separating interior / ideal / hyperideal points.
///
/// A point with `| |v| - 1 | <= EPS_CLASS` is treated as ideal (on the
/// unit sphere) and rejected by every operation that needs a strict
/// classification.
pub const EPS_CLASS: f64 = 1e-9;

/// Planarity / coincidence tolerance per unit of bounding-box diameter.
///
/// Mesh and cell validation scale this by the instance diameter so the
/// tests behave identically under uniform rescaling.
pub const EPS_GEO_REL: f64 = 1e-9;

/// Degenerate-volume tolerance per unit of bounding-box diameter cubed.
pub const EPS_VOL_REL: f64 = 1e-12;

/// Default relative singular-value threshold for rank decisions.
pub const SIGMA_TOL: f64 = 1e-8;

/// Default relative accuracy target for hyperbolic volume quadrature.
pub const QUAD_TOL: f64 = 1e-9;

/// Default angle-residual tolerance for the angles -> simplex solver.
pub const SOLVE_TOL: f64 = 1e-10;

/// Finite-difference step (radians) for Hessians in angle coordinates.
/// Combined with one Richardson extrapolation over (h, h/2).
pub const HESS_STEP: f64 = 1e-4;

/// Gradient-norm target for the fiber maximizer.
pub const OPT_GRAD_TOL: f64 = 1e-9;

/// Criticality (per-edge length disagreement) target for the maximizer.
pub const OPT_CRIT_TOL: f64 = 1e-7;

/// Interior safeguard: minimum distance kept from the angle-polytope
/// boundary (angles to {0, pi}, vertex sums to 2 pi) during optimization.
pub const OPT_INTERIOR_MARGIN: f64 = 1e-6;

/// Condition-number limit beyond which the Newton ascent falls back to
/// gradient steps.
pub const OPT_COND_LIMIT: f64 = 1e12;

/// Eigenvalue threshold for "strictly negative definite" assertions on
/// assembled volume Hessians.
pub const EPS_HESSIAN: f64 = 1e-9;

/// Finite-difference step per unit of local scale for Lie-derivative
/// estimates, with Richardson extrapolation over (h, h/2).
pub const LIE_STEP_REL: f64 = 1e-4;
