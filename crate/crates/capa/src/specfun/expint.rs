//! Exponential integral Ei on the negative real axis.

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// E₁(y) for 0 < y ≤ 1 via the convergent series
/// E₁(y) = −γ − ln y + Σ_{k≥1} (−1)^{k+1} y^k / (k·k!).
fn e1_series(y: f64) -> f64 {
    let mut sum = -EULER_GAMMA - y.ln();
    let mut term = 1.0;
    for k in 1..200 {
        let kf = k as f64;
        term *= -y / kf;
        let contrib = -term / kf;
        sum += contrib;
        if contrib.abs() < sum.abs() * 1e-17 + 1e-300 {
            break;
        }
    }
    sum
}

/// e^y · E₁(y) for y ≥ 1 by modified Lentz continued fraction:
/// E₁(y) = e^{-y} / (y + 1 - 1²/(y + 3 - 2²/(y + 5 - ...))).
fn e1_cf_scaled(y: f64) -> f64 {
    let tiny = 1e-300;
    let mut b = y + 1.0;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..100_000 {
        let a = -(i as f64) * (i as f64);
        b += 2.0;
        d = a * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// Exponential integral Ei(x) = −∫_{−x}^{∞} e^{−t}/t dt for x < 0.
///
/// Only the negative axis is supported: the positive axis would require the
/// Cauchy principal value, which the rate analysis never needs. The result
/// is strictly negative, tends to 0⁻ as x → −∞, and decreases toward −∞ as
/// x → 0⁻ (Ei'(x) = eˣ/x < 0 here).
pub fn exp_integral_ei(x: f64) -> Result<f64> {
    if !(x < 0.0) {
        return Err(Error::Domain(format!(
            "exp_integral_ei requires x < 0, got {x}"
        )));
    }
    let y = -x;
    if y <= 1.0 {
        Ok(-e1_series(y))
    } else {
        Ok(-(-y).exp() * e1_cf_scaled(y))
    }
}

/// Scaled product e^{a}·Ei(−a) for a > 0, without overflow for any `a`.
///
/// The continued-fraction factorisation E₁(a) = e^{-a}·CF(a) makes the
/// product available directly; the rate series needs it at large `a` where
/// e^{a} alone would overflow.
pub fn exp_ei_product(a: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!(
            "exp_ei_product requires a > 0, got {a}"
        )));
    }
    if a <= 1.0 {
        Ok(-a.exp() * e1_series(a))
    } else {
        Ok(-e1_cf_scaled(a))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_and_monotone() {
        // Ei < 0 on the negative axis and |Ei| shrinks toward -∞
        // (derivative e^x/x is negative for x < 0).
        let xs = [-40.0, -9.0, -3.0, -1.0, -0.4, -0.05, -1e-4];
        let mut prev = -0.0;
        for &x in &xs {
            let v = exp_integral_ei(x).unwrap();
            assert!(v < 0.0, "Ei({x}) = {v} not negative");
            assert!(v < prev, "Ei not decreasing toward 0⁻ at {x}");
            prev = v;
        }
    }

    #[test]
    fn vanishes_at_large_negative_argument() {
        let v = exp_integral_ei(-700.0).unwrap();
        assert!(v < 0.0 && v.abs() < 1e-300);
    }

    #[test]
    fn rejects_nonnegative() {
        assert!(exp_integral_ei(0.0).is_err());
        assert!(exp_integral_ei(2.0).is_err());
    }

    #[test]
    fn known_value() {
        // Ei(-1) = -0.21938393439552027... (Abramowitz & Stegun 5.1.56 table)
        let v = exp_integral_ei(-1.0).unwrap();
        assert!((v + 0.219_383_934_395_520_27).abs() < 1e-14);
    }

    #[test]
    fn scaled_product_matches_direct() {
        for &a in &[0.3f64, 1.0, 2.5, 10.0, 30.0] {
            let direct = a.exp() * exp_integral_ei(-a).unwrap();
            let scaled = exp_ei_product(a).unwrap();
            assert!(
                (direct - scaled).abs() < direct.abs() * 1e-12,
                "a={a}: {direct} vs {scaled}"
            );
        }
        // Far beyond e^a overflow.
        let v = exp_ei_product(5000.0).unwrap();
        assert!(v < 0.0 && (v + 1.0 / 5000.0).abs() < 1e-6);
    }
}
