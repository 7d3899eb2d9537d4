//! High-SNR MIMO outage coefficient via Mellin–Barnes contour integration.
//!
//! The coefficient is a Meijer G-function with integer parameter rows,
//! G^{0,n+1}_{n+1,n+1}(2^R) with upper row {1, 1+m, ..., n+m} and lower row
//! {0, 1, ..., n}. For these rows the gamma-ratio integrand collapses to a
//! rational function times z^s,
//!
//! ```text
//!   f(s) = z^s / ( s · Π_{i=1..n} Π_{j=0..m-1} (s - i - j) ),    z = 2^R,
//! ```
//!
//! whose poles sit at the integers 0..n+m-1 (with multiplicities where the
//! i+j clusters coincide). The integral is taken along a contour right of
//! every pole: a vertical segment through c = n + m - 1/2 capped by two
//! 135°-tilted rays, on which |z^s| decays exponentially for z > 1. Pole
//! multiplicity never touches the contour, so no parameter perturbation is
//! needed.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::integrate;

/// A numerical value together with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalResult {
    pub value: f64,
    pub abs_error_estimate: f64,
}

/// Distinct poles of the contour integrand with multiplicities.
fn pole_multiplicities(n: u32, m: u32) -> Vec<(f64, u32)> {
    let mut mult = vec![0u32; (n + m) as usize];
    mult[0] = 1; // the 1/s factor
    for p in 1..(n + m) {
        let lo = 1.max(p.saturating_sub(m - 1));
        let hi = n.min(p);
        if hi >= lo {
            mult[p as usize] += hi - lo + 1;
        }
    }
    mult.iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(p, &c)| (p as f64, c))
        .collect()
}

/// Integrand evaluated through complex logs so magnitudes never overflow.
/// The pole list carries the 1/s factor as the pole at 0.
fn integrand(s: Complex64, ln_z: f64, poles: &[(f64, u32)]) -> Complex64 {
    let mut ln_f = s * ln_z;
    for &(p, c) in poles {
        ln_f -= (s - p).ln() * c as f64;
    }
    if ln_f.re > 700.0 {
        return Complex64::new(f64::INFINITY, 0.0);
    }
    ln_f.exp()
}

/// High-SNR outage coefficient of an n×m angular-domain MIMO channel at
/// target rate `rate_bits` (n = min dimension, m = max dimension).
///
/// Monotone increasing in the rate; tends to 0 as the rate goes to 0.
/// For n = m = 1 it equals 2^R − 1 exactly.
pub fn mimo_outage_coefficient(n: u32, m: u32, rate_bits: f64) -> Result<EvalResult> {
    if n < 1 || m < n {
        return Err(Error::Domain(format!(
            "need 1 <= n <= m, got n={n}, m={m}"
        )));
    }
    if !(rate_bits > 0.0) {
        return Err(Error::Domain(format!(
            "need rate > 0, got {rate_bits}"
        )));
    }
    if rate_bits >= 1024.0 {
        return Err(Error::Overflow("2^R exceeds f64 range".into()));
    }
    let ln_z = rate_bits * std::f64::consts::LN_2;
    let poles = pole_multiplicities(n, m);
    let degree = (n * m + 1) as f64;

    // Contour geometry: vertical segment at c through [0, T], then a ray at
    // 135°. T >= c keeps |s - p| monotone increasing along the ray.
    let c = (n + m) as f64 - 0.5;
    let t_cap = c.max(10.0);
    let dir = Complex64::new(-1.0, 1.0) / std::f64::consts::SQRT_2;

    let abs_tol = 1e-10;
    let rel_tol = 1e-13;

    // Vertical piece: ∫_0^T Re f(c + it) dt.
    let (vert, vert_err) = integrate(
        |t| integrand(Complex64::new(c, t), ln_z, &poles).re,
        0.0,
        t_cap,
        abs_tol,
        rel_tol,
    )?;

    // Ray piece: Im( dir · ∫_0^∞ f(c + iT + u·dir) du ), integrated in
    // blocks until the analytic tail bound is negligible.
    let ray_f = |u: f64| integrand(Complex64::new(c, t_cap) + dir * u, ln_z, &poles);
    let block = (12.0 * std::f64::consts::SQRT_2 / ln_z).clamp(2.0, 200.0);
    let mut ray_sum = Complex64::new(0.0, 0.0);
    let mut ray_err = 0.0;
    let mut u0 = 0.0;
    let mut tail_bound;
    loop {
        let (v, e) = integrate(ray_f, u0, u0 + block, abs_tol, rel_tol)?;
        ray_sum += v;
        ray_err += e;
        u0 += block;
        let s_end = Complex64::new(c, t_cap) + dir * u0;
        let f_end = ray_f(u0).norm();
        // |f| decreases along the ray; exponential and polynomial tail bounds.
        let exp_bound = f_end * std::f64::consts::SQRT_2 / ln_z;
        let poly_bound = f_end * s_end.norm() * std::f64::consts::SQRT_2 / (degree - 1.0);
        tail_bound = exp_bound.min(poly_bound);
        if tail_bound < abs_tol * 0.25 || u0 > 1e6 {
            break;
        }
    }

    let value = (vert + (dir * ray_sum).im) / std::f64::consts::PI;
    if !value.is_finite() {
        return Err(Error::Overflow(
            "outage coefficient exceeds f64 range".into(),
        ));
    }
    let abs_error_estimate = (vert_err + ray_err + tail_bound) / std::f64::consts::PI;
    if abs_error_estimate > 1e-6 * value.abs().max(1.0) {
        return Err(Error::Convergence(format!(
            "contour integral error estimate {abs_error_estimate:.3e} too large"
        )));
    }
    // The coefficient is a nonnegative outage prefactor; clamp tiny negative
    // round-off near rate -> 0.
    Ok(EvalResult {
        value: value.max(0.0),
        abs_error_estimate,
    })
}
