//! Executable validation suite.
//!
//! Each check cross-examines one analytical result against an independent
//! route (grid convolution, Monte-Carlo, slope fits, exact identities) at a
//! pinned tolerance. The `capa validate` command runs them and writes a
//! JSON report; the `acceptance` integration test asserts them.

use std::time::Instant;

use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;
use crate::mixture::GammaMixture;
use crate::perf::{
    adr_mimo_asymptotic, adr_miso_closed, dmt_mimo, dmt_miso,
    high_snr_power_offset, outage_mimo_asymptotic, outage_miso_asymptotic, outage_miso_closed,
    spda_array_gain_ratio, ChannelKind, SnrPoint,
};
use crate::runner::run_reproduce_all;
use crate::scenario::{ArrayVariant, Method};
use crate::sim::{
    estimate_adr_grid, estimate_op_grid, with_thread_count, ChannelModel, SimConfig,
};
use crate::specfun::mimo_outage_coefficient;
use crate::spectrum::{
    linear_variances, ApertureConfig, Layout, MimoSpectrum, ScatteringSpectrum, Side,
};

/// Outcome of one acceptance check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub id: u32,
    pub name: String,
    pub passed: bool,
    pub seconds: f64,
    pub details: Vec<String>,
}

/// Outcome of the whole suite.
#[derive(Debug, Serialize)]
pub struct ValidationReport {
    pub passed: bool,
    pub seed: u64,
    pub total_seconds: f64,
    pub checks: Vec<CheckReport>,
}

struct Check {
    report: CheckReport,
}

impl Check {
    fn new(id: u32, name: &str) -> Self {
        Check {
            report: CheckReport {
                id,
                name: name.to_string(),
                passed: true,
                seconds: 0.0,
                details: Vec::new(),
            },
        }
    }

    fn assert_le(&mut self, label: &str, measured: f64, bound: f64) {
        let ok = measured <= bound;
        self.report.passed &= ok;
        self.report.details.push(format!(
            "{}: {} (measured {measured:.6e} <= bound {bound:.6e})",
            label,
            if ok { "ok" } else { "FAILED" }
        ));
    }

    fn assert_true(&mut self, label: &str, ok: bool) {
        self.report.passed &= ok;
        self.report
            .details
            .push(format!("{}: {}", label, if ok { "ok" } else { "FAILED" }));
    }

    fn note(&mut self, line: String) {
        self.report.details.push(line);
    }

    fn finish(mut self, start: Instant) -> CheckReport {
        self.report.seconds = start.elapsed().as_secs_f64();
        self.report
    }
}

/// Least-squares slope of y against x.
fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let num: f64 = xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let den: f64 = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    num / den
}

/// γ̄ with closed-form outage equal to `target` (bisection in log γ̄).
fn gamma_for_outage(mix: &GammaMixture, mu_t: f64, rate: f64, target: f64) -> Result<f64> {
    let mut lo = 1.0f64.ln();
    let mut hi = 1e14f64.ln();
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let pt = SnrPoint {
            gamma_bar: mid.exp(),
            mu_t,
            target_rate_bits: rate,
        };
        let p = outage_miso_closed(mix, &pt)?;
        if p > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

// ---------------------------------------------------------------------
// 1. Gamma-series law of ‖h‖² vs convolution grid and empirical CDF
// ---------------------------------------------------------------------

/// Trapezoid-grid convolution of exponential densities: an independent
/// discretization-based route to the law of a sum of exponentials.
fn convolution_grid_cdf(variances: &[f64], step: f64, x_max: f64) -> Vec<f64> {
    let n = (x_max / step).round() as usize + 1;
    let xs: Vec<f64> = (0..n).map(|i| i as f64 * step).collect();
    let expo = |mean: f64| -> Vec<f64> { xs.iter().map(|&x| (-x / mean).exp() / mean).collect() };
    let mut pdf = expo(variances[0]);
    for &v in &variances[1..] {
        let g = expo(v);
        let mut out = vec![0.0f64; n];
        out.par_iter_mut().enumerate().for_each(|(k, o)| {
            // trapezoid rule over [0, x_k]
            let mut acc = 0.0;
            for j in 0..=k {
                let w = if j == 0 || j == k { 0.5 } else { 1.0 };
                acc += w * pdf[j] * g[k - j];
            }
            *o = acc * step;
        });
        pdf = out;
    }
    // cumulative trapezoid
    let mut cdf = vec![0.0f64; n];
    for k in 1..n {
        cdf[k] = cdf[k - 1] + 0.5 * (pdf[k - 1] + pdf[k]) * step;
    }
    cdf
}

fn empirical_cdf_counts(
    variances: &[f64],
    trials: u64,
    seed: u64,
    step: f64,
    buckets: usize,
) -> Vec<u64> {
    let chunk = 100_000u64;
    let chunks = trials.div_ceil(chunk);
    (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * chunk;
            let hi = ((c + 1) * chunk).min(trials);
            let mut counts = vec![0u64; buckets + 1];
            for t in lo..hi {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(t);
                let mut x = 0.0;
                for &v in variances {
                    let re: f64 = StandardNormal.sample(&mut rng);
                    let im: f64 = StandardNormal.sample(&mut rng);
                    x += (re * re + im * im) * v / 2.0;
                }
                let b = ((x / step) as usize).min(buckets);
                counts[b] += 1;
            }
            counts
        })
        .reduce(
            || vec![0u64; buckets + 1],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        )
}

pub fn check_moschopoulos(seed: u64) -> CheckReport {
    let start = Instant::now();
    let mut c = Check::new(1, "gamma-series law vs convolution grid and empirical CDF");
    let cases: [&[f64]; 2] = [&[1.0, 0.5], &[1.0, 0.5, 0.25]];
    for variances in cases {
        let d = variances.len();
        let mix = match GammaMixture::build(variances, 1e-10) {
            Ok(m) => m,
            Err(e) => {
                c.assert_true(&format!("build D={d}"), false);
                c.note(format!("error: {e}"));
                continue;
            }
        };
        // (a) sup-norm against the convolution grid (O(h²) discretization).
        let step = 2e-3;
        let x_max = 25.0;
        let oracle = convolution_grid_cdf(variances, step, x_max);
        let mut sup = 0.0f64;
        for (k, &want) in oracle.iter().enumerate().step_by(5) {
            let x = k as f64 * step;
            let got = mix.cdf(x).unwrap();
            sup = sup.max((got - want).abs());
        }
        c.assert_le(&format!("D={d} sup |closed − convolution|"), sup, 1e-5);

        // (b) Dvoretzky–Kiefer–Wolfowitz at 99% over 10⁷ samples.
        let trials: u64 = 10_000_000;
        let eps = (f64::ln(2.0 / 0.01) / (2.0 * trials as f64)).sqrt();
        let buckets = 300_000usize;
        let bstep = 35.0 / buckets as f64;
        let counts = empirical_cdf_counts(variances, trials, seed + d as u64, bstep, buckets);
        let mut cum = 0u64;
        let mut edge_hat = vec![0.0f64; buckets + 1];
        for k in 0..=buckets {
            edge_hat[k] = cum as f64 / trials as f64; // F̂ at edge k·bstep (left-closed)
            if k < buckets {
                cum += counts[k];
            }
        }
        // Bound the true sup over each bucket from the edge values.
        let mut bound = 0.0f64;
        let mut f_prev = 0.0f64;
        for k in 1..=buckets {
            let x = k as f64 * bstep;
            let f = mix.cdf(x).unwrap();
            let hat_lo = edge_hat[k - 1];
            let hat_hi = edge_hat[k];
            bound = bound.max((hat_hi - f_prev).abs().max((f - hat_lo).abs()));
            f_prev = f;
        }
        c.assert_le(
            &format!("D={d} DKW sup bound over 1e7 samples (99%)"),
            bound,
            eps,
        );
    }
    c.finish(start)
}

// ---------------------------------------------------------------------
// 2. Single-stream outage: closed form vs Monte-Carlo, asymptote slope
// ---------------------------------------------------------------------

pub fn check_miso_outage(seed: u64) -> CheckReport {
    let start = Instant::now();
    let mut c = Check::new(2, "transmit-side outage: closed vs Monte-Carlo, slope −D");
    let variances = vec![0.05f64; 20];
    let mix = GammaMixture::build(&variances, 1e-10).unwrap();
    let rate = 5.0;
    let mu_t = 1.0;

    // Five γ̄ points spanning closed OP ∈ [1e-3, 0.5].
    let g_lo = gamma_for_outage(&mix, mu_t, rate, 0.5).unwrap();
    let g_hi = gamma_for_outage(&mix, mu_t, rate, 1e-3).unwrap();
    let gammas: Vec<f64> = (0..5)
        .map(|i| g_lo * (g_hi / g_lo).powf(i as f64 / 4.0))
        .collect();
    let closed: Vec<f64> = gammas
        .iter()
        .map(|&g| {
            outage_miso_closed(
                &mix,
                &SnrPoint {
                    gamma_bar: g,
                    mu_t,
                    target_rate_bits: rate,
                },
            )
            .unwrap()
        })
        .collect();
    c.assert_true(
        "closed OP spans [1e-3, 0.5]",
        closed.iter().all(|&p| (9.9e-4..=0.51).contains(&p)),
    );

    let model = ChannelModel::Vector {
        variances,
        snr_factor: mu_t,
    };
    let sim = SimConfig::new(1_000_000, seed);
    let est = estimate_op_grid(&model, &sim, &gammas, rate).unwrap();
    for (i, (&p, e)) in closed.iter().zip(&est).enumerate() {
        let diff = (p - e.mean).abs();
        let bound = 3.0 * e.std_error;
        c.assert_le(
            &format!("point {i}: |closed − MC| within 3 s.e."),
            diff,
            bound,
        );
    }

    // Log-log slope of the asymptote over its last decade.
    let slope_gammas: Vec<f64> = (0..5)
        .map(|i| g_hi * 10f64.powf(i as f64 / 4.0))
        .collect();
    let xs: Vec<f64> = slope_gammas.iter().map(|g| g.log10()).collect();
    let ys: Vec<f64> = slope_gammas
        .iter()
        .map(|&g| {
            outage_miso_asymptotic(
                &mix,
                &SnrPoint {
                    gamma_bar: g,
                    mu_t,
                    target_rate_bits: rate,
                },
            )
            .unwrap()
            .log10()
        })
        .collect();
    let slope = fit_slope(&xs, &ys);
    c.assert_le("asymptote slope −20 ± 0.5", (slope + 20.0).abs(), 0.5);
    c.finish(start)
}

// ---------------------------------------------------------------------
// 3. Single-stream rate: closed vs Monte-Carlo, high-SNR offset
// ---------------------------------------------------------------------

pub fn check_miso_adr(seed: u64) -> CheckReport {
    let start = Instant::now();
    let mut c = Check::new(3, "transmit-side rate: closed vs Monte-Carlo and offset");
    let variances = vec![0.05f64; 20];
    let mix = GammaMixture::build(&variances, 1e-10).unwrap();
    let mu_t = 1.0;
    let gammas: Vec<f64> = vec![10.0, 100.0, 1000.0];
    let model = ChannelModel::Vector {
        variances,
        snr_factor: mu_t,
    };
    let sim = SimConfig::new(1_000_000, seed);
    let est = estimate_adr_grid(&model, &sim, &gammas).unwrap();
    for (&g, e) in gammas.iter().zip(&est) {
        let closed = adr_miso_closed(
            &mix,
            &SnrPoint {
                gamma_bar: g,
                mu_t,
                target_rate_bits: 1.0,
            },
        )
        .unwrap();
        c.assert_le(
            &format!("γ̄ = {g:.0}: |closed − MC|"),
            (closed - e.mean).abs(),
            0.02,
        );
    }
    // (ADR − log₂ γ̄) → −L at γ̄ = 80 dB.
    let g = 1e8;
    let closed = adr_miso_closed(
        &mix,
        &SnrPoint {
            gamma_bar: g,
            mu_t,
            target_rate_bits: 1.0,
        },
    )
    .unwrap();
    let offset = high_snr_power_offset(&mix, mu_t).unwrap();
    c.assert_le(
        "(ADR − log2 γ̄) + L at 80 dB",
        (closed - g.log2() + offset).abs(),
        0.01,
    );
    c.finish(start)
}

// ---------------------------------------------------------------------
// 4. Receive-combining vs transmit-side rate gap log₂ D_t
// ---------------------------------------------------------------------

pub fn check_simo_miso_gap(_seed: u64) -> CheckReport {
    let start = Instant::now();
    let mut c = Check::new(4, "receive-combining rate gap log2(D_t) at high SNR");
    let d_t = 20.0;
    let variances = vec![0.05f64; 20];
    let mix = GammaMixture::build(&variances, 1e-10).unwrap();
    let g = 1e7;
    let miso = adr_miso_closed(
        &mix,
        &SnrPoint {
            gamma_bar: g,
            mu_t: 1.0,
            target_rate_bits: 1.0,
        },
    )
    .unwrap();
    let simo = adr_miso_closed(
        &mix,
        &SnrPoint {
            gamma_bar: g,
            mu_t: d_t,
            target_rate_bits: 1.0,
        },
    )
    .unwrap();
    c.assert_le(
        "|gap − log2(20)|",
        ((simo - miso) - d_t.log2()).abs(),
        0.05,
    );
    c.finish(start)
}

// ---------------------------------------------------------------------
// 5. Square MIMO rate asymptote and multiplexing slope
// ---------------------------------------------------------------------

pub fn check_mimo_adr(seed: u64) -> CheckReport {
    let start = Instant::now();
    let mut c = Check::new(5, "square MIMO rate asymptote and slope");
    let spec = MimoSpectrum::from_factors(vec![0.25; 4], vec![0.25; 4]);
    let model = ChannelModel::Matrix {
        rx_variances: vec![0.25; 4],
        tx_variances: vec![0.25; 4],
        snr_factor: 1.0,
    };
    let gammas = [1e6, 1e7];
    let sim = SimConfig::new(200_000, seed);
    let est = estimate_adr_grid(&model, &sim, &gammas).unwrap();
    let asy = adr_mimo_asymptotic(
        &spec,
        &SnrPoint {
            gamma_bar: 1e6,
            mu_t: 1.0,
            target_rate_bits: 1.0,
        },
    )
    .unwrap();
    c.assert_true("slope coefficient is min(D_t,D_r) = 4", asy.slope == 4.0);
    let want = asy.rate_at(1e6);
    c.assert_le(
        "γ̄ = 60 dB: |MC − asymptote|",
        (est[0].mean - want).abs(),
        0.1,
    );
    // Fitted log₂ γ̄ coefficient from the two Monte-Carlo points (common
    // random numbers cancel most of the noise).
    let slope = (est[1].mean - est[0].mean) / (1e7f64.log2() - 1e6f64.log2());
    c.assert_le("fitted slope 4 ± 0.05", (slope - 4.0).abs(), 0.05);
    c.finish(start)
}

// ---------------------------------------------------------------------
// 6. MIMO outage asymptote vs importance-sampled Monte-Carlo
// ---------------------------------------------------------------------

pub fn check_mimo_outage(seed: u64) -> CheckReport {
    let start = Instant::now();
    let mut c = Check::new(6, "MIMO outage asymptote at 1e-6 via importance sampling");
    // Degenerate anchor: coefficient(1,1,R) = 2^R − 1.
    let rate = 4.0;
    let anchor = mimo_outage_coefficient(1, 1, rate).unwrap().value;
    let want = rate.exp2() - 1.0;
    c.assert_le(
        "coefficient(1,1,R) = 2^R − 1",
        (anchor - want).abs() / want,
        1e-6,
    );

    let rho = 0.5f64;
    let spec = MimoSpectrum::from_factors(vec![rho; 2], vec![rho; 2]);
    // Choose γ̄ so the asymptote sits at 1e-6.
    let target = 1e-6;
    let coeff = mimo_outage_coefficient(2, 2, rate).unwrap().value;
    let prod = rho.powi(2); // Πϱ² per side
    let gamma = (coeff / (target * prod.powi(2) * prod.powi(2))).powf(0.25);
    let pt = SnrPoint {
        gamma_bar: gamma,
        mu_t: 1.0,
        target_rate_bits: rate,
    };
    let asy = outage_mimo_asymptotic(&spec, &pt).unwrap();
    c.note(format!("probe γ̄ = {gamma:.4e}, asymptote = {asy:.4e}"));

    // Proposal scale putting ≈ 2% of proposal mass on the outage region
    // (outage probability scales as γ̄^{-4}).
    let shift = (asy / 0.02).powf(0.25);
    let model = ChannelModel::Matrix {
        rx_variances: vec![rho; 2],
        tx_variances: vec![rho; 2],
        snr_factor: 1.0,
    };
    let sim = SimConfig::new(2_000_000, seed).with_importance_shift(shift);
    let est = estimate_op_grid(&model, &sim, &[gamma], rate).unwrap()[0];
    c.note(format!(
        "importance-sampled OP = {:.4e} ± {:.2e} (shift {shift:.4})",
        est.mean, est.std_error
    ));
    c.assert_true("estimate is not degenerate", !est.degenerate);
    let rel = (est.mean - asy).abs() / asy;
    let slack = 3.0 * est.std_error / asy;
    c.assert_le("relative gap asymptote vs IS-MC", rel, 0.10 + slack);
    c.finish(start)
}

// ---------------------------------------------------------------------
// 7. DMT identities
// ---------------------------------------------------------------------

pub fn check_dmt_identities(_seed: u64) -> CheckReport {
    let start = Instant::now();
    let mut c = Check::new(7, "DMT identities and breakpoint continuity");
    let mix = GammaMixture::build(&vec![0.05; 20], 1e-10).unwrap();
    let mut worst = 0.0f64;
    for i in 1..=100 {
        let r = i as f64 / 101.0;
        let p = dmt_miso(&mix, 1.0, r).unwrap();
        worst = worst.max((p.diversity_gain - 20.0 * (1.0 - r)).abs());
    }
    c.assert_le("single-stream d(r) = D(1−r) on 100-point grid", worst, 1e-12);

    // Square and rectangular grids at integer multiplexing gains.
    for (d_r, d_t) in [(4usize, 4usize), (4, 6), (20, 20)] {
        let spec = MimoSpectrum::from_factors(vec![0.3; d_r], vec![0.4; d_t]);
        let n = d_r.min(d_t);
        let mut worst = 0.0f64;
        for k in 1..n {
            let p = dmt_mimo(&spec, 1.0, k as f64).unwrap();
            let want = ((d_t - k) * (d_r - k)) as f64;
            worst = worst.max((p.diversity_gain - want).abs());
        }
        c.assert_le(
            &format!("{d_r}x{d_t} integer-r diversity (D_t−r)(D_r−r)"),
            worst,
            1e-12,
        );
        // Piecewise-segment continuity at breakpoints, from the segment
        // formulas G_d(x) − G_r(x)·r evaluated on both sides.
        let mut jump = 0.0f64;
        for k in 1..n {
            let (r, k_f) = (k as f64, k as f64);
            let left = {
                let x = k_f - 1.0;
                ((d_r * d_t) as f64 - x * (x + 1.0))
                    - ((d_r + d_t) as f64 - (2.0 * x + 1.0)) * r
            };
            let right = {
                let x = k_f;
                ((d_r * d_t) as f64 - x * (x + 1.0))
                    - ((d_r + d_t) as f64 - (2.0 * x + 1.0)) * r
            };
            jump = jump.max((left - right).abs());
        }
        c.assert_le(
            &format!("{d_r}x{d_t} breakpoint continuity"),
            jump,
            1e-12,
        );
    }
    c.finish(start)
}

// ---------------------------------------------------------------------
// 8. Discrete-array equivalence, degradation, and occupation bound
// ---------------------------------------------------------------------

pub fn check_spda(seed: u64) -> CheckReport {
    let start = Instant::now();
    let mut c = Check::new(8, "discrete-array equivalence at λ/2 and degradation at λ");
    let cfg = ApertureConfig::reference(10);
    let spectrum = linear_variances(&cfg, &ScatteringSpectrum::Isotropic, Side::Tx).unwrap();

    // (a) Half-wavelength: per-realization rate equality under the
    // prefactor substitution μ(A_t)μ(A_r) ↔ 2N·A_t·A_r.
    let beam = crate::spda::build_beamspace(&cfg, &spectrum, cfg.wavelength_m / 2.0).unwrap();
    let gamma_bar = 1e12;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let h_a = crate::sim::sample_vector(&spectrum, &mut rng);
        let h_el = crate::spda::spda_channel_vector(&beam, &h_a).unwrap();
        let spda =
            crate::spda::spda_rate(ChannelKind::Miso, &h_el, &cfg, gamma_bar, beam.elements())
                .unwrap();
        // Substituted continuous-array form: factor (2N·A_t·A_r)/D_t per
        // mode on the same draw.
        let factor = 2.0 * 10.0 * cfg.element_area_tx_m2 * cfg.element_area_rx_m2 / 20.0;
        let gain: f64 = h_a.iter().map(|z| z.norm_sqr()).sum();
        let reference = (1.0 + gamma_bar * factor * gain).log2();
        worst = worst.max((spda - reference).abs() / reference.abs().max(1e-300));
    }
    c.assert_le("λ/2 per-realization rate equality (relative)", worst, 1e-10);

    // (b) Wavelength spacing: fitted outage slope equals M = N = 10.
    let beam_one = crate::spda::build_beamspace(&cfg, &spectrum, cfg.wavelength_m).unwrap();
    let eigs = beam_one.correlation_eigenvalues(&spectrum.variances).unwrap();
    c.assert_true("rank at λ spacing is M = 10", eigs.len() == 10);
    let eig_mix = GammaMixture::build(&eigs, 1e-10).unwrap();
    let factor = crate::spda::spda_snr_factor(&cfg, ChannelKind::Miso, beam_one.elements());
    let rate = 5.0;
    // Anchor γ̄ where the asymptote is ~1e-4, then fit over γ̄, 2γ̄, 4γ̄ with
    // shift-matched importance sampling at each point.
    let g0 = {
        let mut g = 1.0;
        for _ in 0..200 {
            let pt = SnrPoint {
                gamma_bar: g,
                mu_t: factor,
                target_rate_bits: rate,
            };
            let p = outage_miso_asymptotic(&eig_mix, &pt).unwrap();
            if p > 1e-4 {
                g *= 1.3;
            } else {
                break;
            }
        }
        g
    };
    let gammas = [g0, 2.0 * g0, 4.0 * g0];
    let mut ps = Vec::new();
    for (i, &g) in gammas.iter().enumerate() {
        let pt = SnrPoint {
            gamma_bar: g,
            mu_t: factor,
            target_rate_bits: rate,
        };
        let asy = outage_miso_asymptotic(&eig_mix, &pt).unwrap();
        let shift = (asy / 0.02).powf(1.0 / 10.0).min(1.0);
        // Sample the distribution-equivalent eigen model: the beamspace
        // transform has a null space, so shifting the raw angular
        // coordinates would leave the proposal weights unbounded on the
        // outage event. The eigenvalue form constrains every coordinate.
        let model = ChannelModel::Vector {
            variances: eigs.clone(),
            snr_factor: factor,
        };
        let sim = SimConfig::new(400_000, seed + i as u64).with_importance_shift(shift);
        let est = estimate_op_grid(&model, &sim, &[g], rate).unwrap()[0];
        c.note(format!(
            "γ̄ = {g:.3e}: OP = {:.3e} ± {:.1e} (asym {asy:.3e})",
            est.mean, est.std_error
        ));
        ps.push(est.mean);
    }
    let xs: Vec<f64> = gammas.iter().map(|g| g.log10()).collect();
    let ys: Vec<f64> = ps.iter().map(|p| p.log10()).collect();
    let slope = -fit_slope(&xs, &ys);
    c.assert_le("fitted λ-spacing slope M = 10 within 10%", (slope - 10.0).abs(), 1.0);

    // (c) Occupation-ratio bound over the reference configs.
    for kind in [ChannelKind::Miso, ChannelKind::Simo, ChannelKind::Mimo] {
        for layout in [Layout::Linear, Layout::Planar] {
            let r = spda_array_gain_ratio(&cfg, kind, layout).unwrap();
            c.assert_true(
                &format!("η_t·η_r ≤ 1 for {kind:?}/{layout:?} (got {r:.4})"),
                r > 0.0 && r <= 1.0,
            );
        }
    }
    c.finish(start)
}

// ---------------------------------------------------------------------
// 9. Channel-power normalization of the angular spectra
// ---------------------------------------------------------------------

pub fn check_normalization(_seed: u64) -> CheckReport {
    let start = Instant::now();
    let mut c = Check::new(9, "angular variance normalization (linear exact, planar 1e-3)");
    let cfg = ApertureConfig::reference(10);
    let lin = linear_variances(&cfg, &ScatteringSpectrum::Isotropic, Side::Tx).unwrap();
    c.assert_le(
        "linear Σσ² = 1 exactly",
        (lin.total_power - 1.0).abs(),
        1e-12,
    );
    let pla = crate::spectrum::planar_variances(&cfg, &ScatteringSpectrum::Isotropic, Side::Rx)
        .unwrap();
    c.note(format!(
        "planar N=10: {} modes, Σσ² = {:.9}",
        pla.dimension(),
        pla.total_power
    ));
    c.assert_le("planar Σσ² = 1 within 1e-3", (pla.total_power - 1.0).abs(), 1e-3);
    c.finish(start)
}

// ---------------------------------------------------------------------
// 10. Figure reproduction: orderings and pipeline wall-clock
// ---------------------------------------------------------------------

fn read_curve(dir: &std::path::Path, name: &str) -> Result<Vec<(f64, f64, f64)>> {
    let text = std::fs::read_to_string(dir.join(name))?;
    let mut out = Vec::new();
    for line in text.lines().skip(1) {
        let mut it = line.split(',');
        let x: f64 = it.next().unwrap_or("nan").parse().unwrap_or(f64::NAN);
        let v: f64 = it.next().unwrap_or("nan").parse().unwrap_or(f64::NAN);
        let se: f64 = it.next().unwrap_or("0").parse().unwrap_or(0.0);
        out.push((x, v, se));
    }
    Ok(out)
}

fn curve_name(quantity: &str, array: ArrayVariant, method: Method) -> String {
    format!("{quantity}_{array}_{method}.csv")
}

pub fn check_figures(seed: u64, trials: u64) -> CheckReport {
    let start = Instant::now();
    let mut c = Check::new(10, "figure reproduction orderings and wall-clock");
    let tmp = match tempdir_for_validation() {
        Ok(t) => t,
        Err(e) => {
            let mut cc = c;
            cc.assert_true("create temp dir", false);
            cc.note(format!("error: {e}"));
            return cc.finish(start);
        }
    };
    let dir = tmp.as_path();
    match run_reproduce_all(dir, seed, trials) {
        Ok(files) => c.note(format!("pipeline wrote {} files", files.len())),
        Err(e) => {
            c.assert_true("pipeline completed", false);
            c.note(format!("error: {e}"));
            return c.finish(start);
        }
    }

    let mc = Method::MonteCarlo;
    // Outage ordering: continuous ≤ λ/2-discrete ≤ λ-discrete, pointwise.
    for sub in ["fig6/miso", "fig6/simo"] {
        let d = dir.join(sub);
        let capa = read_curve(&d, &curve_name("outage-probability", ArrayVariant::Capa, mc));
        let half = read_curve(&d, &curve_name("outage-probability", ArrayVariant::SpdaHalf, mc));
        let one = read_curve(&d, &curve_name("outage-probability", ArrayVariant::SpdaOne, mc));
        match (capa, half, one) {
            (Ok(capa), Ok(half), Ok(one)) => {
                let ok1 = capa.iter().zip(&half).all(|(a, b)| a.1 <= b.1 + 1e-12);
                let ok2 = half.iter().zip(&one).all(|(a, b)| a.1 <= b.1 + 1e-12);
                c.assert_true(&format!("{sub}: OP(capa) ≤ OP(λ/2) pointwise"), ok1);
                c.assert_true(&format!("{sub}: OP(λ/2) ≤ OP(λ) pointwise"), ok2);
            }
            _ => c.assert_true(&format!("{sub}: outage curves present"), false),
        }
    }
    // Rate ordering: continuous ≥ both discrete baselines.
    for sub in ["fig6/miso", "fig6/simo", "fig8", "fig9"] {
        let d = dir.join(sub);
        let capa = read_curve(&d, &curve_name("average-rate", ArrayVariant::Capa, mc));
        let half = read_curve(&d, &curve_name("average-rate", ArrayVariant::SpdaHalf, mc));
        let one = read_curve(&d, &curve_name("average-rate", ArrayVariant::SpdaOne, mc));
        match (capa, half, one) {
            (Ok(capa), Ok(half), Ok(one)) => {
                let ok1 = capa.iter().zip(&half).all(|(a, b)| a.1 >= b.1 - 1e-12);
                let ok2 = capa.iter().zip(&one).all(|(a, b)| a.1 >= b.1 - 1e-12);
                c.assert_true(&format!("{sub}: ADR(capa) ≥ ADR(λ/2) pointwise"), ok1);
                c.assert_true(&format!("{sub}: ADR(capa) ≥ ADR(λ) pointwise"), ok2);
            }
            _ => c.assert_true(&format!("{sub}: rate curves present"), false),
        }
    }
    let secs = start.elapsed().as_secs_f64();
    c.assert_le("full figure pipeline under 10 minutes", secs, 600.0);
    c.finish(start)
}

fn tempdir_for_validation() -> Result<TempDirGuard> {
    let base = std::env::temp_dir().join(format!("capa-validate-{}", std::process::id()));
    std::fs::create_dir_all(&base)?;
    Ok(TempDirGuard { path: base })
}

struct TempDirGuard {
    path: std::path::PathBuf,
}

impl TempDirGuard {
    fn as_path(&self) -> &std::path::Path {
        &self.path
    }
}

impl Drop for TempDirGuard {
    fn drop(&mut self) {
        let _ = std::fs::remove_dir_all(&self.path);
    }
}

// ---------------------------------------------------------------------
// 11. Bit-level determinism across worker threads
// ---------------------------------------------------------------------

pub fn check_determinism(seed: u64) -> CheckReport {
    let start = Instant::now();
    let mut c = Check::new(11, "bit-identical estimates across 1/2/8 worker threads");
    let variances = vec![0.05f64; 20];
    let model = ChannelModel::Vector {
        variances,
        snr_factor: 1.0,
    };
    let mimo = ChannelModel::Matrix {
        rx_variances: vec![0.25; 4],
        tx_variances: vec![0.25; 4],
        snr_factor: 1.0,
    };
    let gammas = [31.0, 70.0, 400.0];
    let run = |threads: usize| -> Vec<u64> {
        let model = model.clone();
        let mimo = mimo.clone();
        with_thread_count(threads, move || {
            let mut bits = Vec::new();
            let sim = SimConfig::new(100_000, seed);
            for e in estimate_op_grid(&model, &sim, &gammas, 5.0).unwrap() {
                bits.push(e.mean.to_bits());
            }
            for e in estimate_adr_grid(&model, &sim, &gammas).unwrap() {
                bits.push(e.mean.to_bits());
            }
            let is = SimConfig::new(100_000, seed).with_importance_shift(0.2);
            for e in estimate_op_grid(&model, &is, &[2000.0], 5.0).unwrap() {
                bits.push(e.mean.to_bits());
            }
            for e in estimate_adr_grid(&mimo, &sim, &gammas).unwrap() {
                bits.push(e.mean.to_bits());
            }
            bits
        })
        .unwrap()
    };
    let one = run(1);
    let two = run(2);
    let eight = run(8);
    c.assert_true("1 vs 2 threads bit-identical", one == two);
    c.assert_true("1 vs 8 threads bit-identical", one == eight);
    c.finish(start)
}

/// Run the acceptance checks (optionally a subset) and collect the report.
pub fn run_all(seed: u64, only: Option<&[u32]>, figure_trials: u64) -> ValidationReport {
    let start = Instant::now();
    let wanted = |id: u32| only.map_or(true, |ids| ids.contains(&id));
    let mut checks = Vec::new();
    if wanted(1) {
        checks.push(check_moschopoulos(seed));
    }
    if wanted(2) {
        checks.push(check_miso_outage(seed));
    }
    if wanted(3) {
        checks.push(check_miso_adr(seed));
    }
    if wanted(4) {
        checks.push(check_simo_miso_gap(seed));
    }
    if wanted(5) {
        checks.push(check_mimo_adr(seed));
    }
    if wanted(6) {
        checks.push(check_mimo_outage(seed));
    }
    if wanted(7) {
        checks.push(check_dmt_identities(seed));
    }
    if wanted(8) {
        checks.push(check_spda(seed));
    }
    if wanted(9) {
        checks.push(check_normalization(seed));
    }
    if wanted(10) {
        checks.push(check_figures(seed, figure_trials));
    }
    if wanted(11) {
        checks.push(check_determinism(seed));
    }
    ValidationReport {
        passed: checks.iter().all(|c| c.passed),
        seed,
        total_seconds: start.elapsed().as_secs_f64(),
        checks,
    }
}
