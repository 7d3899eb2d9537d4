//! Performance analysis of continuous-aperture antenna arrays (CAPAs) over
//! angular-domain Rayleigh fading, with discrete-array (SPDA) baselines.
//!
//! The crate computes outage probability, average data rate, diversity–
//! multiplexing trade-off curves, and array gains three ways — exact gamma-
//! series closed forms, high-SNR asymptotics, and a deterministic parallel
//! Monte-Carlo simulator — and cross-validates them against each other.
//!
//! Modules:
//! - [`specfun`]: gamma family, digamma, exponential integral, and the
//!   integer-parameter Meijer-G outage coefficient.
//! - [`spectrum`]: per-mode variances of linear/planar apertures, the
//!   lattice-ellipse index set, and separable MIMO variance grids.
//! - [`mixture`]: gamma-series law of ‖h‖² with recursive weights.
//! - [`perf`]: closed-form / asymptotic outage, rate, and DMT analysis.
//! - [`sim`]: reproducible Monte-Carlo estimators (common random numbers,
//!   importance sampling for deep-tail outage).
//! - [`spda`]: beamspace matrices and rates of discrete baselines.
//! - [`scenario`]: link scenarios, curve tabulation, CSV/JSON output.
//! - [`runner`]: command implementations behind the `capa` binary.
//! - [`validate`]: the executable acceptance checks.
//!
//! See the `examples/` directory for one runnable walk-through per
//! capability, and the README for the CLI surface.

pub mod error;
pub mod mixture;
pub mod perf;
pub mod quad;
pub mod sim;
pub mod spda;
pub mod specfun;
pub mod spectrum;

pub mod runner;
pub mod validate;
pub mod scenario;

pub use error::{Error, Result};
