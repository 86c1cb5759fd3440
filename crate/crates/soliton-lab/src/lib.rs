//! Numerical verification laboratory for Lorentzian gradient Ricci solitons.
//!
//! Given a coordinate metric `g`, a potential function `f` and a constant
//! `lambda`, the crate evaluates curvature and Hessian data through exact
//! third-order jet arithmetic and checks the identities a gradient Ricci
//! soliton (`Hess_f + ρ = λ g`) must satisfy: the soliton residual itself,
//! the constant-scalar-curvature identity suite, the Bochner identity, the
//! Schouten–Codazzi residual, eigenstructure and nilpotency of the Ricci and
//! Hessian operators, and the classification of 3-dimensional strict Walker
//! metrics `g = 2 dt dy + dx² + φ(x,y) dy²`.
//!
//! Modules:
//! - [`jet`]: truncated multivariate Taylor values (the differentiation substrate),
//! - [`expr`]: a small scalar expression language for metric entries and potentials,
//! - [`geometry`]: pointwise tensor calculus in arbitrary signature, dimension ≤ 8,
//! - [`linalg`]: signature, spectra, rank, nilpotency and causal type,
//! - [`catalog`]: constructors for the concrete soliton families with expected profiles,
//! - [`verify`]: the identity suite and structured check reports,
//! - [`walker`]: the 3-dimensional Walker soliton classification pipeline,
//! - [`report`]: deterministic JSON/text rendering of check reports.

pub mod catalog;
pub mod expr;
pub mod geometry;
pub mod jet;
pub mod linalg;
pub mod quad;
pub mod report;
pub mod verify;
pub mod walker;
