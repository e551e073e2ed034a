//! Centralized tolerance constants.
//!
//! All formulas in this crate are smooth rational/trigonometric expressions
//! evaluated at desk scale, so f64 keeps 12+ significant digits through the
//! longest pipelines. Three tiers cover every check.

/// Default absolute tolerance for user-facing invariant checks
/// (unit normals, unit-modulus vertex variables, realness of Sym output).
pub const DEFAULT_TOL: f64 = 1e-9;

/// Tight tolerance for internal algebraic identities that hold to
/// machine precision (round trips, residuals of exact formulas).
pub const TIGHT_TOL: f64 = 1e-12;

/// Default tolerance for geometric residuals (curvature defect,
/// planarity, congruence after alignment). CLI default.
pub const GEOM_TOL: f64 = 1e-8;

/// Magnitude threshold above which a tangent/cotangent evaluation is
/// treated as a degenerate angle.
pub const ANGLE_OVERFLOW: f64 = 1e12;

/// Magnitude threshold below which a determinant or evolution
/// denominator is treated as singular.
pub const SINGULAR_EPS: f64 = 1e-14;
