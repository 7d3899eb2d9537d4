//! Discrete-array (SPDA) baseline.
//!
//! A spatially discrete array observes the same angular coefficients as the
//! continuous aperture through a beamspace matrix whose entries are array
//! steering phases sampled at the element centres. At half-wavelength
//! spacing the matrix is a non-normalized DFT and captures every angular
//! mode; at wider spacing the matrix loses rank and with it diversity.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::perf::ChannelKind;
use crate::spectrum::{AngularSpectrum, ApertureConfig, Layout, ModeSet, Side};

/// Beamspace (steering) matrix of one discrete array side: rows are
/// elements, columns are angular modes in spectrum order.
#[derive(Debug, Clone)]
pub struct BeamspaceMatrix {
    pub entries: DMatrix<Complex64>,
    pub side: Side,
    pub layout: Layout,
    pub spacing_m: f64,
    /// Element grid (count_x, count_z); count_z = 1 for linear arrays.
    pub element_grid: (usize, usize),
}

impl BeamspaceMatrix {
    /// Total number of elements M.
    pub fn elements(&self) -> usize {
        self.element_grid.0 * self.element_grid.1
    }

    /// Number of angular modes 2N (linear) or |covering set| (planar).
    pub fn modes(&self) -> usize {
        self.entries.ncols()
    }

    /// Max elementwise deviation of H·Hᴴ (or Hᴴ·H for tall-mode matrices)
    /// from `elements·I`; ≈ 0 exactly at half-wavelength spacing.
    pub fn semi_unitarity_defect(&self) -> f64 {
        let h = &self.entries;
        let m = self.elements() as f64;
        let gram = if h.nrows() <= h.ncols() {
            h * h.adjoint()
        } else {
            h.adjoint() * h
        };
        let scale = if h.nrows() <= h.ncols() {
            self.modes() as f64
        } else {
            m
        };
        let n = gram.nrows();
        let mut defect = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let want = if i == j {
                    Complex64::new(scale, 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                };
                defect = defect.max((gram[(i, j)] - want).norm());
            }
        }
        defect
    }

    /// Numerical rank of the element-side correlation H·diag(σ²)·Hᴴ.
    pub fn correlation_rank(&self, variances: &[f64]) -> Result<usize> {
        if variances.len() != self.modes() {
            return Err(Error::Dimension(format!(
                "{} variances for {} modes",
                variances.len(),
                self.modes()
            )));
        }
        let h = &self.entries;
        let d = DMatrix::from_fn(self.modes(), self.modes(), |i, j| {
            if i == j {
                Complex64::new(variances[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let corr = h * d * h.adjoint();
        let eig = corr.symmetric_eigen();
        let max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
        Ok(eig
            .eigenvalues
            .iter()
            .filter(|&&l| l > max * 1e-10)
            .count())
    }

    /// Eigenvalues of H·diag(σ²)·Hᴴ: the component variances of the
    /// effective element-domain channel (basis of closed-form baselines).
    pub fn correlation_eigenvalues(&self, variances: &[f64]) -> Result<Vec<f64>> {
        if variances.len() != self.modes() {
            return Err(Error::Dimension(format!(
                "{} variances for {} modes",
                variances.len(),
                self.modes()
            )));
        }
        let h = &self.entries;
        let scaled = DMatrix::from_fn(h.nrows(), h.ncols(), |i, j| {
            h[(i, j)] * variances[j].sqrt()
        });
        let gram = &scaled * scaled.adjoint();
        let eig = gram.symmetric_eigen();
        let max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
        let mut out: Vec<f64> = eig
            .eigenvalues
            .iter()
            .cloned()
            .filter(|&l| l > max * 1e-12)
            .collect();
        out.sort_by(f64::total_cmp);
        Ok(out)
    }
}

/// Near-symmetric element index set: M consecutive integers centred on 0.
fn element_indices(count: usize) -> impl Iterator<Item = i64> {
    let half = (count / 2) as i64;
    (0..count as i64).map(move |m| m - half)
}

/// Build the beamspace matrix of one side for the spectrum's mode set.
/// Element count per axis is ⌊L/d⌋; the transmit side carries conjugated
/// phases.
pub fn build_beamspace(
    config: &ApertureConfig,
    spectrum: &AngularSpectrum,
    spacing_m: f64,
) -> Result<BeamspaceMatrix> {
    config.validate()?;
    if !(spacing_m > 0.0) {
        return Err(Error::Config("element spacing must be positive".into()));
    }
    let side = spectrum.side;
    let l_x = config.side_length_x(side);
    let m_x = (l_x / spacing_m).floor() as usize;
    if m_x == 0 {
        return Err(Error::Config(
            "element spacing exceeds the aperture side".into(),
        ));
    }
    let sign = match side {
        Side::Rx => 1.0,
        Side::Tx => -1.0,
    };
    let phase = |l: i64, d: f64, len: f64, m: i64| -> Complex64 {
        let arg = sign * 2.0 * std::f64::consts::PI * l as f64 * d * (m as f64 + 0.5) / len;
        Complex64::new(0.0, arg).exp()
    };
    let (entries, grid) = match (&spectrum.modes, spectrum.layout) {
        (ModeSet::Linear(modes), Layout::Linear) => {
            let rows: Vec<i64> = element_indices(m_x).collect();
            let mat = DMatrix::from_fn(m_x, modes.len(), |r, c| {
                phase(modes[c] as i64, spacing_m, l_x, rows[r])
            });
            (mat, (m_x, 1))
        }
        (ModeSet::Planar(modes), Layout::Planar) => {
            let l_z = config.side_length_z(side);
            let m_z = (l_z / spacing_m).floor() as usize;
            if m_z == 0 {
                return Err(Error::Config(
                    "element spacing exceeds the aperture side".into(),
                ));
            }
            let xs: Vec<i64> = element_indices(m_x).collect();
            let zs: Vec<i64> = element_indices(m_z).collect();
            let mat = DMatrix::from_fn(m_x * m_z, modes.len(), |r, c| {
                let (mx, mz) = (xs[r % m_x], zs[r / m_x]);
                let (lx, lz) = modes[c];
                phase(lx as i64, spacing_m, l_x, mx) * phase(lz as i64, spacing_m, l_z, mz)
            });
            (mat, (m_x, m_z))
        }
        _ => {
            return Err(Error::Dimension(
                "spectrum mode set does not match its layout".into(),
            ))
        }
    };
    Ok(BeamspaceMatrix {
        entries,
        side,
        layout: spectrum.layout,
        spacing_m,
        element_grid: grid,
    })
}

/// Element-domain channel vector h = B·h_a of a single-side array.
pub fn spda_channel_vector(
    beam: &BeamspaceMatrix,
    angular: &[Complex64],
) -> Result<DMatrix<Complex64>> {
    if angular.len() != beam.modes() {
        return Err(Error::Dimension(format!(
            "angular vector has {} entries, beamspace expects {}",
            angular.len(),
            beam.modes()
        )));
    }
    let v = DMatrix::from_column_slice(angular.len(), 1, angular);
    Ok(&beam.entries * v)
}

/// Element-domain MIMO channel B_r·H_a·B_tᵀ.
pub fn spda_channel_matrix(
    rx: &BeamspaceMatrix,
    tx: &BeamspaceMatrix,
    angular: &DMatrix<Complex64>,
) -> Result<DMatrix<Complex64>> {
    if angular.nrows() != rx.modes() || angular.ncols() != tx.modes() {
        return Err(Error::Dimension(format!(
            "angular grid {}x{} does not match beamspaces {}x{}",
            angular.nrows(),
            angular.ncols(),
            rx.modes(),
            tx.modes()
        )));
    }
    Ok(&rx.entries * angular * tx.entries.transpose())
}

/// SNR factor multiplying γ̄·‖channel‖² (or inside the determinant) for a
/// discrete array: per-element area product with the transmit split across
/// M_t elements for MISO/MIMO.
pub fn spda_snr_factor(config: &ApertureConfig, kind: ChannelKind, tx_elements: usize) -> f64 {
    let a = config.element_area_rx_m2 * config.element_area_tx_m2;
    match kind {
        ChannelKind::Simo => a,
        ChannelKind::Miso | ChannelKind::Mimo => a / tx_elements.max(1) as f64,
    }
}

/// Instantaneous rate of the discrete array given the element-domain
/// channel (vector for MISO/SIMO, matrix for MIMO).
pub fn spda_rate(
    kind: ChannelKind,
    channel: &DMatrix<Complex64>,
    config: &ApertureConfig,
    gamma_bar: f64,
    tx_elements: usize,
) -> Result<f64> {
    if !(gamma_bar >= 0.0) {
        return Err(Error::Domain("gamma_bar must be nonnegative".into()));
    }
    let factor = gamma_bar * spda_snr_factor(config, kind, tx_elements);
    match kind {
        ChannelKind::Miso | ChannelKind::Simo => {
            let gain: f64 = channel.iter().map(|c| c.norm_sqr()).sum();
            Ok((1.0 + factor * gain).log2())
        }
        ChannelKind::Mimo => {
            if factor == 0.0 {
                return Ok(0.0);
            }
            let pt = crate::perf::SnrPoint {
                gamma_bar: factor,
                mu_t: 1.0,
                target_rate_bits: 1.0,
            };
            crate::sim::rate_mimo(channel, &pt)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::{
        linear_variances, planar_variances, ScatteringSpectrum,
    };

    fn linear_setup(n: u32, spacing_frac: f64) -> (ApertureConfig, AngularSpectrum, BeamspaceMatrix) {
        let cfg = ApertureConfig::reference(n);
        let spec = linear_variances(&cfg, &ScatteringSpectrum::Isotropic, Side::Rx).unwrap();
        let beam = build_beamspace(&cfg, &spec, cfg.wavelength_m * spacing_frac).unwrap();
        (cfg, spec, beam)
    }

    #[test]
    fn half_wavelength_linear_is_semi_unitary() {
        let (_, _, beam) = linear_setup(2, 0.5);
        assert_eq!(beam.elements(), 4);
        assert_eq!(beam.modes(), 4);
        assert!(beam.semi_unitarity_defect() < 1e-10);
    }

    #[test]
    fn wavelength_spacing_halves_the_rank() {
        let (_, spec, beam) = linear_setup(2, 1.0);
        assert_eq!(beam.elements(), 2);
        assert_eq!(beam.modes(), 4);
        let rank = beam.correlation_rank(&spec.variances).unwrap();
        assert_eq!(rank, 2);
    }

    #[test]
    fn single_element_rows_are_unit_modulus() {
        let cfg = ApertureConfig::reference(1);
        let spec = linear_variances(&cfg, &ScatteringSpectrum::Isotropic, Side::Tx).unwrap();
        let beam = build_beamspace(&cfg, &spec, cfg.side_length_x(Side::Tx)).unwrap();
        assert_eq!(beam.elements(), 1);
        for c in beam.entries.iter() {
            assert!((c.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_angular_gives_zero_channel() {
        let (_, spec, beam) = linear_setup(2, 0.5);
        let zeros = vec![Complex64::new(0.0, 0.0); spec.dimension()];
        let h = spda_channel_vector(&beam, &zeros).unwrap();
        assert!(h.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn half_wavelength_norm_identity_per_realization() {
        use rand::SeedableRng;
        let (_, spec, beam) = linear_setup(3, 0.5);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..50 {
            let h_a = crate::sim::sample_vector(&spec, &mut rng);
            let h_s = spda_channel_vector(&beam, &h_a).unwrap();
            let lhs: f64 = h_s.iter().map(|c| c.norm_sqr()).sum();
            let rhs: f64 = h_a.iter().map(|c| c.norm_sqr()).sum::<f64>() * beam.modes() as f64;
            assert!((lhs - rhs).abs() < rhs * 1e-12, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn planar_half_wavelength_semi_unitary() {
        let cfg = ApertureConfig::reference(2);
        let spec = planar_variances(&cfg, &ScatteringSpectrum::Isotropic, Side::Rx).unwrap();
        let beam = build_beamspace(&cfg, &spec, cfg.wavelength_m / 2.0).unwrap();
        assert_eq!(beam.elements(), 16);
        // Hᴴ·H = M·I over the covering modes.
        assert!(beam.semi_unitarity_defect() < 1e-10);
    }

    #[test]
    fn mimo_channel_dimensions_and_rate_zero_power() {
        let cfg = ApertureConfig::reference(2);
        let rx = linear_variances(&cfg, &ScatteringSpectrum::Isotropic, Side::Rx).unwrap();
        let tx = linear_variances(&cfg, &ScatteringSpectrum::Isotropic, Side::Tx).unwrap();
        let br = build_beamspace(&cfg, &rx, cfg.wavelength_m / 2.0).unwrap();
        let bt = build_beamspace(&cfg, &tx, cfg.wavelength_m / 2.0).unwrap();
        let h_a = DMatrix::from_element(rx.dimension(), tx.dimension(), Complex64::new(0.3, -0.1));
        let h = spda_channel_matrix(&br, &bt, &h_a).unwrap();
        assert_eq!(h.shape(), (4, 4));
        let r = spda_rate(ChannelKind::Mimo, &h, &cfg, 0.0, bt.elements()).unwrap();
        assert_eq!(r, 0.0);
        // Mismatched dims are rejected.
        let bad = DMatrix::from_element(2, 2, Complex64::new(0.0, 0.0));
        assert!(spda_channel_matrix(&br, &bt, &bad).is_err());
    }

    #[test]
    fn odd_element_count_is_allowed() {
        let mut cfg = ApertureConfig::reference(2);
        // spacing = 0.4λ on a 2λ side -> M = 5 elements
        cfg.element_spacing_rx_m = 0.4 * cfg.wavelength_m;
        let spec = linear_variances(&cfg, &ScatteringSpectrum::Isotropic, Side::Rx).unwrap();
        let beam = build_beamspace(&cfg, &spec, cfg.element_spacing_rx_m).unwrap();
        assert_eq!(beam.elements(), 5);
        // M > 2N: correlation rank still capped at the mode count.
        let rank = beam.correlation_rank(&spec.variances).unwrap();
        assert_eq!(rank, 4);
    }
}
