//! Numerical machinery for path-dependent multivalued McKean-Vlasov SDEs
//!
//! $$
//! dX(t) \in -A(X(t))\,dt + b(t, X_t, \mathscr{L}_{X_t})\,dt + \sigma(t, X_t, \mathscr{L}_{X_t})\,dW(t)
//! $$
//!
//! where `A` is a maximal monotone operator and `X_t` is the delay segment
//! `θ ↦ X(t+θ)`, `θ ∈ [-r0, 0]`.
//!
//! The crate is organised bottom-up:
//!
//! - [`monotone`]: operator specs, resolvents, projections and membership tests.
//! - [`segments`]: time grids, delay segments and discretised `(X, K)` pairs.
//! - [`coefficients`]: moduli of continuity, the segment mollifier, smoothing,
//!   cutoffs and the built-in coefficient catalogue.
//! - [`solver`]: the single-path scheme, Picard iteration and contraction diagnostics.
//! - [`meanfield`]: empirical segment laws, exact W2 by assignment, and the
//!   distribution iteration.
//! - [`experiments`]: named experiments, config files and result emission.
//!
//! See the `examples/` directory of the crate for one runnable program per capability.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod coefficients;
pub mod error;
pub mod experiments;
pub mod meanfield;
pub mod monotone;
pub mod rng;
pub mod segments;
pub mod solver;
pub mod stats;

pub use error::{Error, Result};
