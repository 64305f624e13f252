//! Clustering under monotone norm objectives.
//!
//! The crate picks `k` centers in a metric clustering space `(P, F, δ)` so as
//! to minimise `f(δ(P, X))`, where `f` is a monotone norm over the per-point
//! distance vector. The main entry points are:
//!
//! - [`norms`]: the objective catalogue (ℓ_z, top-ℓ, ordered, fair, cascaded ...)
//!   with exact evaluation and closed-form subgradients.
//! - [`metrics`]: explicit matrices, graph shortest paths and Euclidean spaces.
//! - [`ballint`]: ball-intersection solvers used to place a center that meets
//!   a set of `(point, radius)` requests.
//! - [`epas`]: the randomized witness-sampling engine, restarts and optimum search.
//! - [`scatter`]: the scattering game simulator and verifier.
//! - [`oracle`]: brute force and Gonzalez baselines used for verification.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ballint;
pub mod epas;
pub mod metrics;
pub mod norms;
pub mod oracle;
pub mod scatter;

pub use ballint::{BallIntConfig, BallIntersectionOutcome, Request};
pub use epas::{EpasConfig, EpasSolution, Instance};
pub use metrics::{Center, MetricSpace, Site, Solution};
pub use norms::{NormObjective, SubgradientVector};
