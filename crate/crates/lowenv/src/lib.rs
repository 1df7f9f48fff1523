//! Monte Carlo estimation of lower envelopes of expectations.
//!
//! The quantity of interest is `inf_t E^{P_t}(f)` over a parametrized set of
//! distributions `{P_t : t in T}`. All parameters share a single sample drawn
//! from one central distribution; the per-parameter estimates are obtained
//! either by pushing uniform samples through the quantile functions of the
//! `P_t` (inverse transform backend) or by reweighting central samples with
//! density ratios (importance backend).
//!
//! Modules:
//! - [`distributions`]: one-dimensional laws, parameter boxes, families,
//!   and the adversarial piecewise-constant density family.
//! - [`sampling`]: reproducible uniform streams, inverse-transform samples,
//!   importance weights.
//! - [`estimator`]: the shared-sample lower-envelope estimator, the naive
//!   per-distribution estimator, and the box minimizer.
//! - [`consistency`]: numerical verification of consistency hypotheses and
//!   covering/bracketing bounds.
//! - [`experiments`]: scripted studies (bias sweeps, the spring-bedded beam,
//!   the no-consistency counterexample).
//! - [`cli`]: config ingestion and subcommand dispatch.

pub mod cli;
pub mod consistency;
pub mod distributions;
pub mod error;
pub mod estimator;
pub mod experiments;
pub mod quad;
pub mod sampling;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
