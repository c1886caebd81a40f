//! Numerical toolkit for multilinear fractional integral and maximal operators
//! with homogeneous kernels on discretized boxes in one and two dimensions.
//!
//! The crate evaluates the operators by midpoint quadrature, computes Lebesgue,
//! weak, Morrey, Luxemburg and BMO functionals, and checks the classical
//! inequalities between them: exactly where the constants are explicit and
//! empirically (with refinement studies) where they are not.

pub mod estimates;
pub mod exponents;
pub mod grid;
pub mod hls;
pub mod kernel;
pub mod norms;
pub mod operators;
pub mod special;
pub mod tolerances;
pub mod verify;

pub use exponents::{ExponentError, ExponentInputs, ExponentSet, HypothesisVerdict, TheoremId};
pub use grid::{BallFamily, Corpus, Domain, GridBall, GridError, GridFunction, MemberSpec, Point};
pub use kernel::{Kernel, KernelError, KernelVector};
pub use norms::{NormError, NormSpec, Region};
pub use operators::{EvalReport, OperatorError, OperatorKind, OperatorSpec};
pub use verify::{CheckResult, ConstantEstimate, Refusal, VerifyError};
