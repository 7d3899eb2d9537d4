//! Link scenarios and tabulated result curves.
//!
//! A [`ScenarioConfig`] (JSON-expressible) names the channel kind, aperture
//! geometry, scattering model, and target rate; [`BuiltScenario`] carries
//! the derived angular spectra, gamma mixture, and aperture power factor.
//! Results are tabulated as [`CurveSet`]s and written one CSV per
//! (quantity, method, array) with a run manifest alongside.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mixture::GammaMixture;
use crate::perf::ChannelKind;
use crate::spectrum::{
    linear_variances, mimo_variance_grid, planar_variances, AngularSpectrum, ApertureConfig,
    Layout, MimoSpectrum, ScatteringSpectrum, Side,
};

/// Computation route for a curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Closed,
    Asymptotic,
    #[serde(rename = "montecarlo")]
    MonteCarlo,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Method::Closed => "closed",
            Method::Asymptotic => "asymptotic",
            Method::MonteCarlo => "montecarlo",
        };
        write!(f, "{s}")
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "closed" => Ok(Method::Closed),
            "asymptotic" => Ok(Method::Asymptotic),
            "montecarlo" => Ok(Method::MonteCarlo),
            other => Err(Error::Config(format!(
                "unknown method '{other}' (expected closed|asymptotic|montecarlo)"
            ))),
        }
    }
}

/// Array under evaluation: the continuous aperture or a discrete baseline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArrayVariant {
    Capa,
    /// Half-wavelength element spacing (captures every angular mode).
    SpdaHalf,
    /// One-wavelength element spacing (loses half the modes per axis).
    SpdaOne,
}

impl fmt::Display for ArrayVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ArrayVariant::Capa => "capa",
            ArrayVariant::SpdaHalf => "spda-half",
            ArrayVariant::SpdaOne => "spda-one",
        };
        write!(f, "{s}")
    }
}

impl ArrayVariant {
    /// Element spacing in wavelengths, when discrete.
    pub fn spacing_wavelengths(&self) -> Option<f64> {
        match self {
            ArrayVariant::Capa => None,
            ArrayVariant::SpdaHalf => Some(0.5),
            ArrayVariant::SpdaOne => Some(1.0),
        }
    }
}

/// Interpretation of the sweep grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisKind {
    /// Grid entries are transmit power in dBm; γ̄ = P/σ²_noise.
    PowerDbm,
    /// Grid entries are γ̄ directly, in dB.
    GammaBarDb,
}

/// Receiver noise model: σ² = N₀·B.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub bandwidth_hz: f64,
    pub noise_density_dbm_per_hz: f64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            bandwidth_hz: 1e6,
            noise_density_dbm_per_hz: -174.0,
        }
    }
}

impl NoiseConfig {
    pub fn noise_power_w(&self) -> f64 {
        let dbm = self.noise_density_dbm_per_hz + 10.0 * self.bandwidth_hz.log10();
        dbm_to_watts(dbm)
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Scattering model selector (JSON side; custom densities are API-only).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ScatteringKind {
    #[default]
    Isotropic,
}

/// JSON-expressible scenario description.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub kind: ChannelKind,
    pub layout: Layout,
    #[serde(default = "default_aperture")]
    pub aperture: ApertureConfig,
    #[serde(default)]
    pub scattering: ScatteringKind,
    #[serde(default = "default_rate")]
    pub target_rate_bits: f64,
}

fn default_aperture() -> ApertureConfig {
    ApertureConfig::reference(10)
}

fn default_rate() -> f64 {
    5.0
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.aperture.validate()?;
        if !(self.target_rate_bits > 0.0) {
            return Err(Error::Config("target_rate_bits must be positive".into()));
        }
        Ok(())
    }
}

/// A scenario with its derived statistics.
#[derive(Debug, Clone)]
pub struct BuiltScenario {
    pub config: ScenarioConfig,
    /// Transmit-side spectrum (MISO/MIMO) in build order.
    pub tx_spectrum: Option<AngularSpectrum>,
    /// Receive-side spectrum (SIMO/MIMO).
    pub rx_spectrum: Option<AngularSpectrum>,
    pub mimo_spectrum: Option<MimoSpectrum>,
    /// Gamma mixture of ‖h‖² for the single-stream kinds.
    pub mixture: Option<GammaMixture>,
    /// Aperture power factor multiplying γ̄ (μ(A_t)μ(A_r)/D_t for MISO and
    /// MIMO, μ(A_t)μ(A_r) for SIMO).
    pub power_factor: f64,
}

impl BuiltScenario {
    pub fn build(config: ScenarioConfig) -> Result<Self> {
        Self::build_with_cache(config, None)
    }

    /// Build, optionally caching planar quadratures under `cache_dir`.
    pub fn build_with_cache(config: ScenarioConfig, cache_dir: Option<&Path>) -> Result<Self> {
        config.validate()?;
        let scattering = match config.scattering {
            ScatteringKind::Isotropic => ScatteringSpectrum::Isotropic,
        };
        let side_spectrum = |side: Side| -> Result<AngularSpectrum> {
            match config.layout {
                Layout::Linear => linear_variances(&config.aperture, &scattering, side),
                Layout::Planar => {
                    cached_planar(&config.aperture, &scattering, side, cache_dir)
                }
            }
        };
        let ap = &config.aperture;
        let (tx_spectrum, rx_spectrum, mimo_spectrum, mixture, power_factor) = match config.kind {
            ChannelKind::Miso => {
                let tx = side_spectrum(Side::Tx)?;
                let mixture = GammaMixture::build(&tx.variances, 1e-10)?;
                // Receive side acts as a single element: μ(A_r) = A_r.
                let mu_full =
                    ap.aperture_measure(Side::Tx, config.layout) * ap.element_area_rx_m2;
                let factor = mu_full / tx.dimension() as f64;
                (Some(tx), None, None, Some(mixture), factor)
            }
            ChannelKind::Simo => {
                let rx = side_spectrum(Side::Rx)?;
                let mixture = GammaMixture::build(&rx.variances, 1e-10)?;
                let mu_full =
                    ap.element_area_tx_m2 * ap.aperture_measure(Side::Rx, config.layout);
                (None, Some(rx), None, Some(mixture), mu_full)
            }
            ChannelKind::Mimo => {
                let grid = match config.layout {
                    Layout::Linear => {
                        mimo_variance_grid(ap, &scattering, Layout::Linear)?
                    }
                    Layout::Planar => {
                        let tx = side_spectrum(Side::Tx)?;
                        let rx = side_spectrum(Side::Rx)?;
                        MimoSpectrum::from_sides(rx, tx)
                    }
                };
                let mu_full = ap.aperture_measure(Side::Tx, config.layout)
                    * ap.aperture_measure(Side::Rx, config.layout);
                let factor = mu_full / grid.dims().1 as f64;
                (
                    Some(grid.tx.clone()),
                    Some(grid.rx.clone()),
                    Some(grid),
                    None,
                    factor,
                )
            }
        };
        Ok(BuiltScenario {
            config,
            tx_spectrum,
            rx_spectrum,
            mimo_spectrum,
            mixture,
            power_factor,
        })
    }

    /// The spectrum on the active single-stream side.
    pub fn active_spectrum(&self) -> Option<&AngularSpectrum> {
        match self.config.kind {
            ChannelKind::Miso => self.tx_spectrum.as_ref(),
            ChannelKind::Simo => self.rx_spectrum.as_ref(),
            ChannelKind::Mimo => None,
        }
    }

    /// Channel dimension: D for single-stream kinds, min(D_t, D_r) for MIMO.
    pub fn dimension(&self) -> usize {
        match self.config.kind {
            ChannelKind::Miso | ChannelKind::Simo => self
                .active_spectrum()
                .map(|s| s.dimension())
                .unwrap_or(0),
            ChannelKind::Mimo => {
                let (r, t) = self.mimo_spectrum.as_ref().map(|m| m.dims()).unwrap_or((0, 0));
                r.min(t)
            }
        }
    }
}

fn cached_planar(
    aperture: &ApertureConfig,
    scattering: &ScatteringSpectrum,
    side: Side,
    cache_dir: Option<&Path>,
) -> Result<AngularSpectrum> {
    let Some(dir) = cache_dir else {
        return planar_variances(aperture, scattering, side);
    };
    let (nx, nz) = aperture.mode_counts(side);
    let tag = match side {
        Side::Tx => "tx",
        Side::Rx => "rx",
    };
    let path = dir.join(format!("planar-{tag}-{nx}x{nz}-isotropic.json"));
    if path.exists() {
        match AngularSpectrum::load_json(&path) {
            Ok(spec) if spec.side == side => return Ok(spec),
            Ok(_) | Err(_) => {
                eprintln!(
                    "warning: spectrum cache {} unusable, recomputing",
                    path.display()
                );
            }
        }
    }
    let spec = planar_variances(aperture, scattering, side)?;
    std::fs::create_dir_all(dir)?;
    spec.save_json(&path)?;
    Ok(spec)
}

/// One tabulated point.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub value: f64,
    pub std_error: Option<f64>,
}

/// A tabulated (x, y) series with provenance metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveSet {
    pub quantity: String,
    pub units: String,
    pub method: Method,
    pub array: ArrayVariant,
    pub x_label: String,
    pub points: Vec<CurvePoint>,
    /// Set when non-finite values were clipped (array gain near r_max).
    pub clipped: bool,
}

impl CurveSet {
    pub fn new(
        quantity: &str,
        units: &str,
        method: Method,
        array: ArrayVariant,
        x_label: &str,
    ) -> Self {
        CurveSet {
            quantity: quantity.to_string(),
            units: units.to_string(),
            method,
            array,
            x_label: x_label.to_string(),
            points: Vec::new(),
            clipped: false,
        }
    }

    /// Append a point, clipping non-finite values and flagging the curve.
    pub fn push(&mut self, x: f64, value: f64, std_error: Option<f64>) {
        let v = if value.is_finite() {
            value
        } else {
            self.clipped = true;
            if value == f64::NEG_INFINITY {
                f64::MIN
            } else {
                f64::MAX
            }
        };
        self.points.push(CurvePoint {
            x,
            value: v,
            std_error,
        });
    }

    pub fn file_name(&self) -> String {
        format!("{}_{}_{}.csv", self.quantity, self.array, self.method)
    }

    /// Write the CSV (header + one row per point). Identical inputs produce
    /// byte-identical files: values use Rust's shortest-roundtrip `f64`
    /// formatting.
    pub fn write_csv(&self, dir: &Path) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(self.file_name());
        let has_se = self.points.iter().any(|p| p.std_error.is_some());
        let mut out = String::new();
        if has_se {
            out.push_str(&format!("{},value,std_error\n", self.x_label));
        } else {
            out.push_str(&format!("{},value\n", self.x_label));
        }
        for p in &self.points {
            if has_se {
                out.push_str(&format!(
                    "{},{},{}\n",
                    p.x,
                    p.value,
                    p.std_error.unwrap_or(f64::NAN)
                ));
            } else {
                out.push_str(&format!("{},{}\n", p.x, p.value));
            }
        }
        std::fs::write(&path, out)?;
        Ok(path)
    }
}
