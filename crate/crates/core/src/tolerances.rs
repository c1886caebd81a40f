//! Named tolerances shared by the checkers, the test suites and the CLI.

/// Equality tolerance for exponent identities such as `p = n / alpha`.
pub const EXPONENT_EQ: f64 = 1e-12;

/// Slack allowed on inequalities that hold exactly in the discrete model
/// (Hölder, Morrey inclusions, weak-to-Morrey embedding). Only rounding is
/// absorbed; the comparison is `lhs <= rhs * (1 + EXACT_SLACK) + EXACT_SLACK * tiny`.
pub const EXACT_SLACK: f64 = 1e-10;

/// Relative bracket width at which the Luxemburg bisection stops.
pub const LUXEMBURG_BRACKET: f64 = 1e-10;

/// Allowed drift of an empirical constant between spacings `h` and `h/2`.
pub const REFINEMENT_DRIFT: f64 = 0.10;

/// Default number of angular nodes for sphere integrals in the plane.
pub const ANGULAR_NODES: usize = 4096;

/// Returns true when `lhs <= rhs` up to the exact-inequality slack.
pub fn within_exact(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + EXACT_SLACK * rhs.abs().max(f64::MIN_POSITIVE)
}
