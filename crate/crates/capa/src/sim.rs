//! Ground-truth Monte-Carlo simulator.
//!
//! Samples angular-domain channel realizations, computes instantaneous
//! rates, and estimates outage probability and average data rate. Every
//! trial owns a counter-based RNG substream derived from (seed, trial
//! index), and trials are reduced chunk-by-chunk in index order, so the
//! estimates are bit-identical for any number of worker threads. One
//! channel draw is reused across an entire SNR grid (common random
//! numbers), which both speeds up sweeps and smooths fitted slopes.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::perf::SnrPoint;
use crate::spectrum::{AngularSpectrum, MimoSpectrum};

/// Simulation budget and reproducibility knobs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    /// Trials per reduction chunk; the chunk grid, not the thread count,
    /// defines the summation order.
    pub chunk_size: u64,
    /// Proposal variance scale for rare-event outage estimation. Values
    /// below 1 concentrate the proposal on the outage region (small ‖h‖²);
    /// estimates are reweighted by the exact likelihood ratio. Use only
    /// with models whose outage event bounds every sampled coordinate
    /// (`Vector`/`Matrix`); a rank-deficient transform leaves null-space
    /// weights unbounded — estimate through the eigenvalue-equivalent
    /// vector model instead.
    pub importance_shift: Option<f64>,
}

impl SimConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        SimConfig {
            trials,
            seed,
            chunk_size: 8192.min(trials.max(1)),
            importance_shift: None,
        }
    }

    pub fn with_importance_shift(mut self, scale: f64) -> Self {
        self.importance_shift = Some(scale);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.chunk_size == 0 {
            return Err(Error::Config("chunk_size must be >= 1".into()));
        }
        if let Some(s) = self.importance_shift {
            if !(s > 0.0) || !s.is_finite() {
                return Err(Error::Config(format!(
                    "importance_shift must be positive, got {s}"
                )));
            }
        }
        Ok(())
    }
}

/// Estimation method actually used.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimateMethod {
    Plain,
    ImportanceSampled,
}

/// A Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EstimateResult {
    pub mean: f64,
    pub std_error: f64,
    pub trials_used: u64,
    pub method: EstimateMethod,
    /// Set when no outage event was observed (the estimate carries no
    /// information at this operating point).
    pub degenerate: bool,
}

/// How channel draws map to an instantaneous rate.
#[derive(Debug, Clone)]
pub enum ChannelModel {
    /// rate = log₂(1 + γ̄·factor·‖h‖²), h_j ~ CN(0, σ²_j).
    Vector { variances: Vec<f64>, snr_factor: f64 },
    /// rate = log₂(1 + γ̄·factor·‖B h‖²): a discrete array observing the
    /// same angular coefficients through its beamspace matrix.
    TransformedVector {
        variances: Vec<f64>,
        transform: DMatrix<Complex64>,
        snr_factor: f64,
    },
    /// rate = log₂ det(I + γ̄·factor·H Hᴴ), H_{ij} ~ CN(0, ϱ²_{r,i} ϱ²_{t,j}).
    Matrix {
        rx_variances: Vec<f64>,
        tx_variances: Vec<f64>,
        snr_factor: f64,
    },
    /// rate = log₂ det(I + γ̄·factor·(B_r H B_tᵀ)(·)ᴴ).
    TransformedMatrix {
        rx_variances: Vec<f64>,
        tx_variances: Vec<f64>,
        rx_transform: DMatrix<Complex64>,
        tx_transform: DMatrix<Complex64>,
        snr_factor: f64,
    },
}

impl ChannelModel {
    pub fn capa_vector(spectrum: &AngularSpectrum, snr_factor: f64) -> Self {
        ChannelModel::Vector {
            variances: spectrum.variances.clone(),
            snr_factor,
        }
    }

    pub fn capa_matrix(spectrum: &MimoSpectrum, snr_factor: f64) -> Self {
        ChannelModel::Matrix {
            rx_variances: spectrum.rx_factors().to_vec(),
            tx_variances: spectrum.tx_factors().to_vec(),
            snr_factor,
        }
    }

    fn angular_dimension(&self) -> usize {
        match self {
            ChannelModel::Vector { variances, .. }
            | ChannelModel::TransformedVector { variances, .. } => variances.len(),
            ChannelModel::Matrix {
                rx_variances,
                tx_variances,
                ..
            }
            | ChannelModel::TransformedMatrix {
                rx_variances,
                tx_variances,
                ..
            } => rx_variances.len() * tx_variances.len(),
        }
    }

    pub fn snr_factor(&self) -> f64 {
        match self {
            ChannelModel::Vector { snr_factor, .. }
            | ChannelModel::TransformedVector { snr_factor, .. }
            | ChannelModel::Matrix { snr_factor, .. }
            | ChannelModel::TransformedMatrix { snr_factor, .. } => *snr_factor,
        }
    }
}

/// Effective channel statistic of one trial: either a scalar gain or the
/// eigenvalues of the Gram matrix. Rates at any SNR follow from it.
enum TrialStat {
    Gain(f64),
    Eigs(Vec<f64>),
}

impl TrialStat {
    fn rate_bits(&self, gamma_factor: f64) -> f64 {
        match self {
            TrialStat::Gain(g) => (1.0 + gamma_factor * g).log2(),
            TrialStat::Eigs(eigs) => eigs
                .iter()
                .map(|&l| (1.0 + gamma_factor * l).log2())
                .sum(),
        }
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

fn draw_cn(rng: &mut ChaCha8Rng, variance: f64) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * (variance / 2.0).sqrt()
}

/// Draw one realization of a vector-valued angular channel.
pub fn sample_vector(spectrum: &AngularSpectrum, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    spectrum
        .variances
        .iter()
        .map(|&v| draw_cn(rng, v))
        .collect()
}

/// Draw one realization of the MIMO angular grid (rows = receive modes).
pub fn sample_matrix(spectrum: &MimoSpectrum, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let (d_r, d_t) = spectrum.dims();
    DMatrix::from_fn(d_r, d_t, |i, j| {
        draw_cn(rng, spectrum.rx_factors()[i] * spectrum.tx_factors()[j])
    })
}

/// Instantaneous single-stream transmit-side rate log₂(1 + γ̄ μ_t ‖h‖²).
pub fn rate_miso(h: &[Complex64], pt: &SnrPoint) -> f64 {
    let gain: f64 = h.iter().map(|c| c.norm_sqr()).sum();
    (1.0 + pt.gamma_bar * pt.mu_t * gain).log2()
}

/// Instantaneous receive-combining rate; `pt.mu_t` carries the full
/// aperture product μ(A_t)μ(A_r).
pub fn rate_simo(h: &[Complex64], pt: &SnrPoint) -> f64 {
    rate_miso(h, pt)
}

/// Instantaneous MIMO rate log₂ det(I + γ̄ μ_t H Hᴴ), computed from the
/// Gram matrix of the smaller dimension.
pub fn rate_mimo(h: &DMatrix<Complex64>, pt: &SnrPoint) -> Result<f64> {
    if h.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::Convergence("non-finite channel matrix".into()));
    }
    let eigs = gram_eigenvalues(h)?;
    Ok(eigs
        .iter()
        .map(|&l| (1.0 + pt.gamma_bar * pt.mu_t * l).log2())
        .sum())
}

/// Eigenvalues of H Hᴴ (or Hᴴ H, whichever is smaller), clamped at 0.
fn gram_eigenvalues(h: &DMatrix<Complex64>) -> Result<Vec<f64>> {
    let (r, c) = h.shape();
    let gram = if r <= c {
        h * h.adjoint()
    } else {
        h.adjoint() * h
    };
    let eig = gram.symmetric_eigen();
    let mut out: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    if out.iter().any(|l| !l.is_finite()) {
        return Err(Error::Convergence("Gram eigendecomposition failed".into()));
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Evaluate one trial: effective statistic plus the log likelihood ratio
/// of the (possibly shifted) proposal.
fn run_trial(model: &ChannelModel, seed: u64, trial: u64, shift: Option<f64>) -> (TrialStat, f64) {
    let mut rng = trial_rng(seed, trial);
    let scale = shift.unwrap_or(1.0);
    let mut log_w = 0.0;
    let mut draw = |rng: &mut ChaCha8Rng, variance: f64| -> Complex64 {
        let h = draw_cn(rng, variance * scale);
        if scale != 1.0 {
            // ln[p(h; σ²)/p(h; ασ²)] = ln α + (|h|²/σ²)(1/α − 1)
            log_w += scale.ln() + (h.norm_sqr() / variance) * (1.0 / scale - 1.0);
        }
        h
    };
    let stat = match model {
        ChannelModel::Vector { variances, .. } => {
            let g: f64 = variances.iter().map(|&v| draw(&mut rng, v).norm_sqr()).sum();
            TrialStat::Gain(g)
        }
        ChannelModel::TransformedVector {
            variances,
            transform,
            ..
        } => {
            let h: Vec<Complex64> = variances.iter().map(|&v| draw(&mut rng, v)).collect();
            let hv = DMatrix::from_column_slice(h.len(), 1, &h);
            let out = transform * hv;
            TrialStat::Gain(out.iter().map(|c| c.norm_sqr()).sum())
        }
        ChannelModel::Matrix {
            rx_variances,
            tx_variances,
            ..
        } => {
            let h = DMatrix::from_fn(rx_variances.len(), tx_variances.len(), |i, j| {
                draw(&mut rng, rx_variances[i] * tx_variances[j])
            });
            TrialStat::Eigs(gram_eigenvalues(&h).expect("finite draws"))
        }
        ChannelModel::TransformedMatrix {
            rx_variances,
            tx_variances,
            rx_transform,
            tx_transform,
            ..
        } => {
            let h = DMatrix::from_fn(rx_variances.len(), tx_variances.len(), |i, j| {
                draw(&mut rng, rx_variances[i] * tx_variances[j])
            });
            let eff = rx_transform * h * tx_transform.transpose();
            TrialStat::Eigs(gram_eigenvalues(&eff).expect("finite draws"))
        }
    };
    (stat, log_w)
}

#[derive(Clone)]
struct Accum {
    sum: Vec<f64>,
    comp: Vec<f64>,
    sum_sq: Vec<f64>,
    events: Vec<u64>,
}

impl Accum {
    fn new(n: usize) -> Self {
        Accum {
            sum: vec![0.0; n],
            comp: vec![0.0; n],
            sum_sq: vec![0.0; n],
            events: vec![0; n],
        }
    }

    fn add(&mut self, idx: usize, value: f64) {
        // Kahan-compensated accumulation keeps the chunk sums independent
        // of micro-architecture differences in summation order.
        let y = value - self.comp[idx];
        let t = self.sum[idx] + y;
        self.comp[idx] = (t - self.sum[idx]) - y;
        self.sum[idx] = t;
        self.sum_sq[idx] += value * value;
        if value != 0.0 {
            self.events[idx] += 1;
        }
    }

    fn merge(&mut self, other: &Accum) {
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.sum_sq[i] += other.sum_sq[i];
            self.events[i] += other.events[i];
        }
    }
}

fn estimate_grid<F>(
    model: &ChannelModel,
    sim: &SimConfig,
    grid_len: usize,
    per_trial: F,
) -> Result<Vec<(f64, f64, u64)>>
where
    F: Fn(&TrialStat, f64, &mut Accum) + Sync,
{
    sim.validate()?;
    if model.angular_dimension() == 0 {
        return Err(Error::Dimension("channel model has no modes".into()));
    }
    let chunks: u64 = sim.trials.div_ceil(sim.chunk_size);
    let partials: Vec<Accum> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * sim.chunk_size;
            let hi = ((c + 1) * sim.chunk_size).min(sim.trials);
            let mut acc = Accum::new(grid_len);
            for trial in lo..hi {
                let (stat, log_w) = run_trial(model, sim.seed, trial, sim.importance_shift);
                per_trial(&stat, log_w, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = Accum::new(grid_len);
    for acc in &partials {
        total.merge(acc);
    }
    let n = sim.trials as f64;
    Ok((0..grid_len)
        .map(|i| {
            let mean = total.sum[i] / n;
            let var = ((total.sum_sq[i] / n) - mean * mean).max(0.0);
            let se = (var / (n - 1.0).max(1.0)).sqrt();
            (mean, se, total.events[i])
        })
        .collect())
}

/// Empirical outage probability over an SNR grid, reusing each channel draw
/// across the grid. With `importance_shift` set, the estimate is
/// likelihood-ratio weighted.
pub fn estimate_op_grid(
    model: &ChannelModel,
    sim: &SimConfig,
    gamma_bars: &[f64],
    target_rate_bits: f64,
) -> Result<Vec<EstimateResult>> {
    if !(target_rate_bits >= 0.0) {
        return Err(Error::Domain("target rate must be nonnegative".into()));
    }
    let factors: Vec<f64> = gamma_bars.iter().map(|&g| g * model.snr_factor()).collect();
    let shifted = sim.importance_shift.is_some();
    let stats = estimate_grid(model, sim, factors.len(), |stat, log_w, acc| {
        let w = if shifted { log_w.exp() } else { 1.0 };
        for (i, &f) in factors.iter().enumerate() {
            if stat.rate_bits(f) < target_rate_bits {
                acc.add(i, w);
            }
        }
    })?;
    Ok(stats
        .into_iter()
        .map(|(mean, se, events)| EstimateResult {
            mean,
            std_error: se,
            trials_used: sim.trials,
            method: if shifted {
                EstimateMethod::ImportanceSampled
            } else {
                EstimateMethod::Plain
            },
            degenerate: events == 0,
        })
        .collect())
}

/// Empirical outage probability at a single operating point. The aperture
/// power factor lives in the model's `snr_factor`, not in `pt.mu_t`.
pub fn estimate_op(model: &ChannelModel, sim: &SimConfig, pt: &SnrPoint) -> Result<EstimateResult> {
    let mut res = estimate_op_grid(model, sim, &[pt.gamma_bar], pt.target_rate_bits)?;
    Ok(res.remove(0))
}

/// Empirical average data rate over an SNR grid (plain estimator; the
/// importance shift is ignored because rate weights are unbounded).
pub fn estimate_adr_grid(
    model: &ChannelModel,
    sim: &SimConfig,
    gamma_bars: &[f64],
) -> Result<Vec<EstimateResult>> {
    let factors: Vec<f64> = gamma_bars.iter().map(|&g| g * model.snr_factor()).collect();
    let mut plain = sim.clone();
    plain.importance_shift = None;
    let stats = estimate_grid(model, &plain, factors.len(), |stat, _, acc| {
        for (i, &f) in factors.iter().enumerate() {
            acc.add(i, stat.rate_bits(f));
        }
    })?;
    Ok(stats
        .into_iter()
        .map(|(mean, se, events)| EstimateResult {
            mean,
            std_error: se,
            trials_used: sim.trials,
            method: EstimateMethod::Plain,
            degenerate: events == 0,
        })
        .collect())
}

/// Empirical average data rate at a single operating point.
pub fn estimate_adr(
    model: &ChannelModel,
    sim: &SimConfig,
    pt: &SnrPoint,
) -> Result<EstimateResult> {
    let mut res = estimate_adr_grid(model, sim, &[pt.gamma_bar])?;
    Ok(res.remove(0))
}

/// Run a closure inside a Rayon pool with a fixed worker count. Estimates
/// must be bit-identical for any choice (chunk reduction is ordered).
pub fn with_thread_count<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{linear_variances, ApertureConfig, ScatteringSpectrum, Side};

    fn linear_spectrum(n: u32) -> AngularSpectrum {
        let cfg = ApertureConfig::reference(n);
        linear_variances(&cfg, &ScatteringSpectrum::Isotropic, Side::Tx).unwrap()
    }

    #[test]
    fn sample_variance_matches_spectrum() {
        let spec = linear_spectrum(2);
        let trials = 200_000;
        let mut sums = vec![0.0f64; spec.dimension()];
        for t in 0..trials {
            let mut rng = trial_rng(7, t);
            for (s, c) in sums.iter_mut().zip(sample_vector(&spec, &mut rng)) {
                *s += c.norm_sqr();
            }
        }
        for (j, &s) in sums.iter().enumerate() {
            let est = s / trials as f64;
            let want = spec.variances[j];
            // s.e. of |h|² mean is σ²/√n
            let tol = 3.0 * want / (trials as f64).sqrt();
            assert!((est - want).abs() < tol, "mode {j}: {est} vs {want}");
        }
    }

    #[test]
    fn samples_are_uncorrelated_across_modes() {
        let spec = linear_spectrum(2);
        let trials = 100_000u64;
        let d = spec.dimension();
        let mut cross = vec![Complex64::new(0.0, 0.0); d * (d - 1) / 2];
        for t in 0..trials {
            let mut rng = trial_rng(11, t);
            let h = sample_vector(&spec, &mut rng);
            let mut k = 0;
            for i in 0..d {
                for j in (i + 1)..d {
                    cross[k] += h[i] * h[j].conj();
                    k += 1;
                }
            }
        }
        let bound = 4.0 / (trials as f64).sqrt() * spec.variances[0];
        for (k, c) in cross.iter().enumerate() {
            let mag = c.norm() / trials as f64;
            assert!(mag < bound, "pair {k}: correlation {mag} vs bound {bound}");
        }
    }

    #[test]
    fn rate_functions_basics() {
        let pt = SnrPoint {
            gamma_bar: 1.0,
            mu_t: 1.0,
            target_rate_bits: 1.0,
        };
        assert_eq!(rate_miso(&[Complex64::new(0.0, 0.0)], &pt), 0.0);
        let one = [Complex64::new(1.0, 0.0)];
        assert!((rate_miso(&one, &pt) - 1.0).abs() < 1e-15);
        // 1x1 matrix equals the vector rate.
        let h = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        assert!((rate_mimo(&h, &pt).unwrap() - 1.0).abs() < 1e-15);
        // zero matrix
        let h0 = DMatrix::from_element(3, 2, Complex64::new(0.0, 0.0));
        assert_eq!(rate_mimo(&h0, &pt).unwrap(), 0.0);
        // rank-1 matrix: log2(1 + c·‖H‖²_F)
        let h1 = DMatrix::from_fn(3, 2, |i, j| {
            Complex64::new((i + 1) as f64, 0.0) * Complex64::new(1.0, (j as f64) * 0.5)
        });
        let frob: f64 = h1.iter().map(|c| c.norm_sqr()).sum();
        let want = (1.0 + frob).log2();
        assert!((rate_mimo(&h1, &pt).unwrap() - want).abs() < 1e-10);
        // non-finite input is rejected
        let hbad = DMatrix::from_element(2, 2, Complex64::new(f64::NAN, 0.0));
        assert!(rate_mimo(&hbad, &pt).is_err());
    }

    #[test]
    fn op_edge_cases() {
        let spec = linear_spectrum(2);
        let model = ChannelModel::capa_vector(&spec, 1.0);
        let sim = SimConfig::new(2000, 3);
        // R = 0: rate >= 0 always, no outage.
        let r = estimate_op_grid(&model, &sim, &[10.0], 0.0).unwrap();
        assert_eq!(r[0].mean, 0.0);
        assert!(r[0].degenerate);
        // Huge R: always in outage.
        let r = estimate_op_grid(&model, &sim, &[10.0], 500.0).unwrap();
        assert_eq!(r[0].mean, 1.0);
    }

    #[test]
    fn op_monotone_in_rate_on_shared_draws() {
        let spec = linear_spectrum(2);
        let model = ChannelModel::capa_vector(&spec, 1.0);
        let sim = SimConfig::new(20_000, 5);
        let mut prev = 0.0;
        for &r in &[0.5, 1.0, 2.0, 4.0, 8.0] {
            let est = estimate_op_grid(&model, &sim, &[8.0], r).unwrap()[0].mean;
            assert!(est >= prev, "OP not monotone in R");
            prev = est;
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let spec = linear_spectrum(3);
        let model = ChannelModel::capa_vector(&spec, 1.0);
        let sim = SimConfig::new(30_000, 42);
        let run = |threads: usize| {
            let model = model.clone();
            let sim = sim.clone();
            with_thread_count(threads, move || {
                let op = estimate_op_grid(&model, &sim, &[5.0, 20.0], 3.0).unwrap();
                let adr = estimate_adr_grid(&model, &sim, &[5.0, 20.0]).unwrap();
                (
                    op.iter().map(|e| e.mean.to_bits()).collect::<Vec<_>>(),
                    adr.iter().map(|e| e.mean.to_bits()).collect::<Vec<_>>(),
                )
            })
            .unwrap()
        };
        let one = run(1);
        let two = run(2);
        let eight = run(8);
        assert_eq!(one, two);
        assert_eq!(one, eight);
    }

    #[test]
    fn importance_sampling_agrees_with_plain() {
        // Moderate-rarity regime where both estimators are workable.
        let spec = linear_spectrum(1);
        let model = ChannelModel::capa_vector(&spec, 1.0);
        let gamma = 2e3;
        let rate = 3.0;
        let plain = estimate_op_grid(&model, &SimConfig::new(400_000, 9), &[gamma], rate).unwrap()[0];
        let shifted = estimate_op_grid(
            &model,
            &SimConfig::new(400_000, 10).with_importance_shift(0.1),
            &[gamma],
            rate,
        )
        .unwrap()[0];
        assert_eq!(shifted.method, EstimateMethod::ImportanceSampled);
        let diff = (plain.mean - shifted.mean).abs();
        let joint = 3.0 * (plain.std_error.powi(2) + shifted.std_error.powi(2)).sqrt();
        assert!(
            diff <= joint.max(1e-6),
            "plain {} ± {} vs shifted {} ± {}",
            plain.mean,
            plain.std_error,
            shifted.mean,
            shifted.std_error
        );
        // The shifted estimator should resolve the tail with far less
        // relative error.
        assert!(shifted.std_error < plain.std_error);
    }

    #[test]
    fn rates_nonnegative_across_draws() {
        let spec = linear_spectrum(2);
        let model = ChannelModel::capa_vector(&spec, 0.5);
        let sim = SimConfig::new(50_000, 1);
        let adr = estimate_adr_grid(&model, &sim, &[1e-9, 1.0, 1e9]).unwrap();
        for e in adr {
            assert!(e.mean >= 0.0);
        }
    }
}
