//! Self-contained special-function kernel.
//!
//! Gamma family, digamma, the exponential integral on the negative axis, and
//! the integer-parameter Meijer-G outage coefficient. All routines are pure
//! functions of their arguments and safe to call concurrently.

mod expint;
mod gamma;
mod meijer;

pub use expint::{exp_ei_product, exp_integral_ei};
pub use gamma::{digamma, gamma, ln_gamma, lower_incomplete_gamma, reg_lower_gamma};
pub use meijer::{mimo_outage_coefficient, EvalResult};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
