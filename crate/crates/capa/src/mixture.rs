//! Exact distribution of ‖h‖² for independent zero-mean complex-Gaussian
//! coefficients with per-mode variances σ²_j.
//!
//! ‖h‖² is a sum of independent exponentials and expands into a single-scale
//! gamma series: with σ²_min the smallest variance, δ_j = 1 − σ²_min/σ²_j,
//! and weights ψ₀ = 1, ψ_q = Σ_{k=1..q} (Σ_j δ_j^k) ψ_{q−k} / q,
//!
//! ```text
//!   F(x) = (σ_min^{2D} / Π σ²_j) Σ_q ψ_q · P(D+q, x/σ²_min)
//! ```
//!
//! where P is the regularized lower incomplete gamma. The normalized terms
//! w_q = (σ_min^{2D}/Πσ²_j)·ψ_q form a probability distribution over q,
//! which this implementation exploits twice: the recursion runs in log
//! space (raw ψ_q overflow near D ≈ 300 while w_q stay in [0, 1]), and the
//! series is truncated once the captured weight mass reaches 1 − ε, which
//! bounds the CDF truncation error by ε directly.

use crate::error::{Error, Result};
use crate::specfun::{digamma, ln_gamma, reg_lower_gamma};

/// Default cap on the number of series terms before giving up.
const MAX_TERMS: usize = 120_000;

/// Gamma-series representation of the law of ‖h‖².
#[derive(Debug, Clone)]
pub struct GammaMixture {
    component_variances: Vec<f64>,
    sigma_min_sq: f64,
    /// ln ψ_q (raw series weights).
    log_psi: Vec<f64>,
    /// ln w_q where w_q = prefactor·ψ_q are the mixture probabilities.
    log_weights: Vec<f64>,
    truncation_error_bound: f64,
}

impl GammaMixture {
    /// Build the series for the given component variances, extending the
    /// truncation until the neglected weight mass is at most `target_error`.
    pub fn build(variances: &[f64], target_error: f64) -> Result<Self> {
        if variances.is_empty() {
            return Err(Error::Domain("empty variance list".into()));
        }
        if !(target_error > 0.0 && target_error < 1.0) {
            return Err(Error::Domain(format!(
                "target_error must be in (0,1), got {target_error}"
            )));
        }
        for &v in variances {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("variance must be positive, got {v}")));
            }
        }
        let sigma_min_sq = variances.iter().cloned().fold(f64::INFINITY, f64::min);
        // ln prefactor = Σ ln(σ²_min/σ²_j) = Σ ln(1 − δ_j) ≤ 0.
        let deltas: Vec<f64> = variances.iter().map(|&v| 1.0 - sigma_min_sq / v).collect();
        let ln_prefactor: f64 = deltas.iter().map(|&d| (1.0 - d).ln()).sum();
        let delta_max = deltas.iter().cloned().fold(0.0f64, f64::max);

        // Equal-variance fast path: all ψ_q vanish for q >= 1.
        if delta_max <= 1e-12 {
            return Ok(GammaMixture {
                component_variances: variances.to_vec(),
                sigma_min_sq,
                log_psi: vec![0.0],
                log_weights: vec![ln_prefactor],
                truncation_error_bound: (-ln_prefactor.exp_m1()).max(0.0),
            });
        }

        // Power sums s_k = Σ_j δ_j^k, tracked incrementally over the
        // non-degenerate components.
        let mut live: Vec<f64> = deltas.iter().cloned().filter(|&d| d > 0.0).collect();
        let mut pows = live.clone();
        let mut ln_s: Vec<f64> = vec![f64::NEG_INFINITY]; // ln s_0 unused
        let mut log_psi: Vec<f64> = vec![0.0];
        let mut log_weights: Vec<f64> = vec![ln_prefactor];
        let mut mass = ln_prefactor.exp();
        let mut scratch: Vec<f64> = Vec::new();

        while 1.0 - mass > target_error {
            let q = log_psi.len();
            if q > MAX_TERMS {
                return Err(Error::Convergence(format!(
                    "gamma-series truncation exceeded {MAX_TERMS} terms \
                     (captured mass {mass:.6}); variance spread too extreme"
                )));
            }
            // Extend power sums to order q.
            let s_q: f64 = pows.iter().sum();
            if s_q <= 0.0 {
                // All components underflowed; nothing more can accumulate.
                break;
            }
            ln_s.push(s_q.ln());
            for (p, &d) in pows.iter_mut().zip(live.iter()) {
                *p *= d;
            }
            if pows.iter().any(|&p| p < 1e-320) {
                let keep: Vec<(f64, f64)> = pows
                    .iter()
                    .zip(live.iter())
                    .filter(|(&p, _)| p >= 1e-320)
                    .map(|(&p, &d)| (p, d))
                    .collect();
                pows = keep.iter().map(|&(p, _)| p).collect();
                live = keep.iter().map(|&(_, d)| d).collect();
            }

            // ln ψ_q = ln Σ_k s_k ψ_{q−k} − ln q  via log-sum-exp.
            scratch.clear();
            let mut hi = f64::NEG_INFINITY;
            for k in 1..=q {
                let t = ln_s[k] + log_psi[q - k];
                scratch.push(t);
                if t > hi {
                    hi = t;
                }
            }
            let lp = if hi == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                hi + scratch.iter().map(|&t| (t - hi).exp()).sum::<f64>().ln() - (q as f64).ln()
            };
            log_psi.push(lp);
            let lw = ln_prefactor + lp;
            log_weights.push(lw);
            mass += lw.exp();
        }

        Ok(GammaMixture {
            component_variances: variances.to_vec(),
            sigma_min_sq,
            log_psi,
            log_weights,
            truncation_error_bound: (1.0 - mass).max(0.0),
        })
    }

    /// Number of underlying complex-Gaussian coefficients D.
    pub fn dimension(&self) -> usize {
        self.component_variances.len()
    }

    pub fn component_variances(&self) -> &[f64] {
        &self.component_variances
    }

    pub fn sigma_min_sq(&self) -> f64 {
        self.sigma_min_sq
    }

    /// Index of the last retained series term Q.
    pub fn truncation_q(&self) -> usize {
        self.log_weights.len() - 1
    }

    /// Bound on the absolute CDF error from dropping terms beyond Q.
    pub fn truncation_error_bound(&self) -> f64 {
        self.truncation_error_bound
    }

    /// Raw series weight ψ_q (may overflow to ∞ for extreme spreads; the
    /// probability weights from [`Self::weights`] never do).
    pub fn psi(&self, q: usize) -> f64 {
        self.log_psi.get(q).map_or(0.0, |&l| l.exp())
    }

    /// Mixture probability weights (q, w_q), Σ w_q = 1 − truncation bound.
    pub fn weights(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.log_weights.iter().enumerate().map(|(q, &lw)| (q, lw.exp()))
    }

    /// Σ σ²_j = E{‖h‖²}.
    pub fn mean(&self) -> f64 {
        self.component_variances.iter().sum()
    }

    /// CDF F(x) = Pr(‖h‖² ≤ x), clamped to [0, 1].
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Err(Error::Domain(format!("cdf requires x >= 0, got {x}")));
        }
        if x == 0.0 {
            return Ok(0.0);
        }
        let d = self.dimension() as f64;
        let u = x / self.sigma_min_sq;
        let mut acc = 0.0;
        for (q, w) in self.weights() {
            if w < 1e-320 {
                continue;
            }
            acc += w * reg_lower_gamma(d + q as f64, u)?;
        }
        Ok(acc.clamp(0.0, 1.0))
    }

    /// PDF f(x) for x > 0.
    pub fn pdf(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("pdf requires x > 0, got {x}")));
        }
        let d = self.dimension() as f64;
        let u = x / self.sigma_min_sq;
        let ln_u = u.ln();
        let mut acc = 0.0;
        for (q, lw) in self.log_weights.iter().enumerate() {
            let a = d + q as f64;
            let ln_term = lw + (a - 1.0) * ln_u - u - ln_gamma(a)?;
            if ln_term > -745.0 {
                acc += ln_term.exp();
            }
        }
        Ok(acc / self.sigma_min_sq)
    }

    /// E{ln ‖h‖²} = Σ_q w_q (ψ(D+q) + ln σ²_min), the building block of the
    /// high-SNR rate offset.
    pub fn log_mean(&self) -> Result<f64> {
        let d = self.dimension() as f64;
        let ln_s = self.sigma_min_sq.ln();
        let mut acc = 0.0;
        for (q, w) in self.weights() {
            if w < 1e-320 {
                continue;
            }
            acc += w * (digamma(d + q as f64)? + ln_s);
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

    #[test]
    fn equal_variances_collapse_to_single_gamma() {
        let m = GammaMixture::build(&[0.25; 8], 1e-12).unwrap();
        assert_eq!(m.truncation_q(), 0);
        assert!((m.psi(0) - 1.0).abs() < 1e-12);
        assert!(m.truncation_error_bound() <= 1e-12);
    }

    #[test]
    fn single_component_is_exponential() {
        let m = GammaMixture::build(&[1.0], 1e-12).unwrap();
        assert_eq!(m.truncation_q(), 0);
        // F(1) = 1 − e^{−1}
        let f = m.cdf(1.0).unwrap();
        assert!((f - (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        // f(x) = e^{−x}
        let p = m.pdf(0.7).unwrap();
        assert!((p - (-0.7f64).exp()).abs() < 1e-12);
        // E{ln X} = −γ for Exp(1)
        assert!((m.log_mean().unwrap() + EULER_GAMMA).abs() < 1e-10);
    }

    #[test]
    fn two_component_weights_follow_the_recursion() {
        // σ² = {1.0, 0.5}: δ = {1/2, 0} so ψ_q = (1/2)^q.
        let m = GammaMixture::build(&[1.0, 0.5], 1e-12).unwrap();
        assert!((m.psi(0) - 1.0).abs() < 1e-14);
        assert!((m.psi(1) - 0.5).abs() < 1e-13);
        assert!((m.psi(2) - 0.25).abs() < 1e-13);
        assert!((m.psi(3) - 0.125).abs() < 1e-13);
        // Closed form for Exp(1) + Exp(1/2): F(x) = 1 − 2e^{−x} + e^{−2x}.
        for &x in &[0.1f64, 0.5, 1.0, 2.0, 5.0] {
            let want = 1.0 - 2.0 * (-x).exp() + (-2.0 * x).exp();
            let got = m.cdf(x).unwrap();
            assert!((got - want).abs() < 1e-10, "x={x}: {got} vs {want}");
        }
    }

    #[test]
    fn scaled_exponential_log_mean() {
        let c = 3.7;
        let m = GammaMixture::build(&[c], 1e-12).unwrap();
        assert!((m.log_mean().unwrap() - (c.ln() - EULER_GAMMA)).abs() < 1e-10);
    }

    #[test]
    fn cdf_is_monotone_and_saturates() {
        let m = GammaMixture::build(&[0.4, 0.3, 0.2, 0.1], 1e-10).unwrap();
        let mut prev = 0.0;
        for i in 1..200 {
            let x = 0.05 * i as f64;
            let f = m.cdf(x).unwrap();
            assert!((0.0..=1.0).contains(&f));
            assert!(f >= prev - 1e-13);
            prev = f;
        }
        assert!(m.cdf(60.0).unwrap() > 1.0 - 1e-9);
        assert_eq!(m.cdf(0.0).unwrap(), 0.0);
    }

    #[test]
    fn pdf_matches_cdf_derivative() {
        let m = GammaMixture::build(&[1.0, 0.6, 0.3], 1e-12).unwrap();
        for i in 1..=50 {
            let x = 0.15 * i as f64;
            let h = 1e-5;
            let num = (m.cdf(x + h).unwrap() - m.cdf(x - h).unwrap()) / (2.0 * h);
            let ana = m.pdf(x).unwrap();
            assert!((num - ana).abs() < 1e-6, "x={x}: {num} vs {ana}");
        }
    }

    #[test]
    fn small_x_tail_power_law() {
        // F(x)·D!·Πσ²_j / x^D → 1 as x → 0, checked at x = 1e-8·σ²_min.
        let variances = [0.5, 0.25, 0.125];
        let m = GammaMixture::build(&variances, 1e-12).unwrap();
        let d = variances.len() as f64;
        let x = 1e-8 * m.sigma_min_sq();
        let f = m.cdf(x).unwrap();
        let d_fact = 6.0;
        let prod: f64 = variances.iter().product();
        let ratio = f * d_fact * prod / x.powf(d);
        assert!((ratio - 1.0).abs() < 1e-5, "ratio {ratio}");
    }

    #[test]
    fn stochastic_dominance_in_each_variance() {
        let base = GammaMixture::build(&[0.5, 0.3, 0.2], 1e-10).unwrap();
        let bigger = GammaMixture::build(&[0.8, 0.3, 0.2], 1e-10).unwrap();
        for i in 1..40 {
            let x = 0.1 * i as f64;
            assert!(
                bigger.cdf(x).unwrap() <= base.cdf(x).unwrap() + 1e-12,
                "dominance violated at {x}"
            );
        }
    }

    #[test]
    fn high_dimension_log_space_build() {
        // D = 300 with a 20x variance spread: raw ψ_q would overflow.
        let variances: Vec<f64> = (0..300)
            .map(|i| 1e-3 * (1.0 + 19.0 * (i as f64 / 299.0)))
            .collect();
        let m = GammaMixture::build(&variances, 1e-9).unwrap();
        assert!(m.truncation_error_bound() <= 1e-9);
        let mean = m.mean();
        // CDF at the mean is strictly inside (0, 1) and the mixture mass is
        // complete.
        let f = m.cdf(mean).unwrap();
        assert!(f > 0.01 && f < 0.99, "F(mean) = {f}");
        let mass: f64 = m.weights().map(|(_, w)| w).sum();
        assert!((mass - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(GammaMixture::build(&[], 1e-9).is_err());
        assert!(GammaMixture::build(&[1.0, -0.5], 1e-9).is_err());
        assert!(GammaMixture::build(&[1.0, 0.0], 1e-9).is_err());
        assert!(GammaMixture::build(&[1.0], 0.0).is_err());
        assert!(GammaMixture::build(&[1.0], 1.5).is_err());
    }
}
