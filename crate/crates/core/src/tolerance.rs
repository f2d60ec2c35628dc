//! Numeric thresholds shared across the crate.

/// Maximum row residual for a geometry to count as a witness of its constraints.
pub const WITNESS: f64 = 1e-6;

/// Angle (radians) within which a measured angle snaps to 0°, 90° or 180°.
pub const ANGLE: f64 = 1e-6;

/// Relative singular-value cutoff; scaled by `σ_max · max(rows, cols)`.
pub const RANK: f64 = 1e-8;

/// Support threshold relative to `‖x‖∞` for sparse vectors.
pub const ZERO: f64 = 1e-6;

/// Least-squares residual below which a linear system counts as solvable.
pub const SOLVE: f64 = 1e-8;

/// Allowed deviation from unit length for stored direction vectors.
pub const UNIT: f64 = 1e-9;

/// Direction vectors closer than this to unit length are renormalised on parse.
pub const RENORMALIZE: f64 = 1e-3;
