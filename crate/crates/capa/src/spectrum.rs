//! Angular-domain second-order statistics of continuous-aperture channels.
//!
//! A fading channel between rectangular apertures decomposes onto a Fourier
//! basis of angular modes; each mode carries an independent complex-Gaussian
//! coefficient whose variance is the angular power density integrated over
//! that mode's wavenumber cell. This module builds those per-mode variance
//! lists for linear and planar apertures, the lattice-ellipse index set, and
//! the separable transmit×receive variance grid for MIMO.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::integrate;

/// Which end of the link a spectrum describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Tx,
    Rx,
}

/// Aperture geometry class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Layout {
    Linear,
    Planar,
}

/// Geometry of the transmit/receive apertures.
///
/// Side lengths along the array axes are integer multiples of the
/// wavelength (`n_* · λ`). Element spacing and per-element area only matter
/// for the discrete-array baseline. For a linear aperture the strip height
/// is taken equal to one element side `√A`, which keeps the aperture
/// measures of the continuous and discrete arrays directly comparable.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ApertureConfig {
    pub n_tx_x: u32,
    pub n_tx_z: u32,
    pub n_rx_x: u32,
    pub n_rx_z: u32,
    pub wavelength_m: f64,
    pub distance_m: f64,
    pub element_spacing_tx_m: f64,
    pub element_spacing_rx_m: f64,
    pub element_area_tx_m2: f64,
    pub element_area_rx_m2: f64,
}

impl ApertureConfig {
    /// Reference geometry: n wavelengths per side at λ = 0.0107 m, 10 m
    /// link distance, half-wavelength element spacing, isotropic-antenna
    /// element area λ²/4π.
    pub fn reference(n: u32) -> Self {
        let wavelength_m = 0.0107;
        let area = wavelength_m * wavelength_m / (4.0 * std::f64::consts::PI);
        ApertureConfig {
            n_tx_x: n,
            n_tx_z: n,
            n_rx_x: n,
            n_rx_z: n,
            wavelength_m,
            distance_m: 10.0,
            element_spacing_tx_m: wavelength_m / 2.0,
            element_spacing_rx_m: wavelength_m / 2.0,
            element_area_tx_m2: area,
            element_area_rx_m2: area,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_tx_x == 0 || self.n_tx_z == 0 || self.n_rx_x == 0 || self.n_rx_z == 0 {
            return Err(Error::Config("aperture mode counts must be >= 1".into()));
        }
        for (name, v) in [
            ("wavelength_m", self.wavelength_m),
            ("distance_m", self.distance_m),
            ("element_spacing_tx_m", self.element_spacing_tx_m),
            ("element_spacing_rx_m", self.element_spacing_rx_m),
            ("element_area_tx_m2", self.element_area_tx_m2),
            ("element_area_rx_m2", self.element_area_rx_m2),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if self.element_spacing_tx_m < self.element_area_tx_m2.sqrt() - 1e-12 {
            return Err(Error::Config(
                "tx element spacing smaller than element side".into(),
            ));
        }
        if self.element_spacing_rx_m < self.element_area_rx_m2.sqrt() - 1e-12 {
            return Err(Error::Config(
                "rx element spacing smaller than element side".into(),
            ));
        }
        Ok(())
    }

    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength_m
    }

    pub fn mode_counts(&self, side: Side) -> (u32, u32) {
        match side {
            Side::Tx => (self.n_tx_x, self.n_tx_z),
            Side::Rx => (self.n_rx_x, self.n_rx_z),
        }
    }

    pub fn side_length_x(&self, side: Side) -> f64 {
        self.mode_counts(side).0 as f64 * self.wavelength_m
    }

    pub fn side_length_z(&self, side: Side) -> f64 {
        self.mode_counts(side).1 as f64 * self.wavelength_m
    }

    pub fn element_area(&self, side: Side) -> f64 {
        match side {
            Side::Tx => self.element_area_tx_m2,
            Side::Rx => self.element_area_rx_m2,
        }
    }

    pub fn element_spacing(&self, side: Side) -> f64 {
        match side {
            Side::Tx => self.element_spacing_tx_m,
            Side::Rx => self.element_spacing_rx_m,
        }
    }

    /// Lebesgue measure of one aperture. A planar aperture is the full
    /// `L_x × L_z` rectangle; a linear one is a strip of height `√A`.
    pub fn aperture_measure(&self, side: Side, layout: Layout) -> f64 {
        match layout {
            Layout::Planar => self.side_length_x(side) * self.side_length_z(side),
            Layout::Linear => self.side_length_x(side) * self.element_area(side).sqrt(),
        }
    }

    /// True when the far-side assumption (distance much larger than the
    /// apertures) is questionable for this geometry.
    pub fn far_field_warning(&self) -> bool {
        let max_side = [
            self.side_length_x(Side::Tx),
            self.side_length_z(Side::Tx),
            self.side_length_x(Side::Rx),
            self.side_length_z(Side::Rx),
        ]
        .into_iter()
        .fold(0.0f64, f64::max);
        self.distance_m < 10.0 * max_side
    }
}

/// Angular power distribution over the wavenumber disk.
///
/// `Isotropic` is the closed-form 1/γ(k) density normalized to unit channel
/// power. `CustomSeparable` supplies per-side densities f(k_x, k_z); the
/// transmit/receive factorisation of the joint distribution is assumed, and
/// non-separable distributions are not representable by construction.
#[derive(Clone)]
pub enum ScatteringSpectrum {
    Isotropic,
    CustomSeparable {
        tx_density: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
        rx_density: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
    },
}

impl fmt::Debug for ScatteringSpectrum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScatteringSpectrum::Isotropic => write!(f, "Isotropic"),
            ScatteringSpectrum::CustomSeparable { .. } => write!(f, "CustomSeparable"),
        }
    }
}

impl ScatteringSpectrum {
    /// Isotropic normalization constant A_s(k₀) = 2π/k₀ (unit channel power).
    pub fn normalization_constant(k0: f64) -> f64 {
        2.0 * std::f64::consts::PI / k0
    }

    fn density(&self, side: Side) -> Option<&(dyn Fn(f64, f64) -> f64 + Send + Sync)> {
        match self {
            ScatteringSpectrum::Isotropic => None,
            ScatteringSpectrum::CustomSeparable {
                tx_density,
                rx_density,
            } => Some(match side {
                Side::Tx => tx_density.as_ref(),
                Side::Rx => rx_density.as_ref(),
            }),
        }
    }
}

/// Mode index set: scalar indices for linear apertures, integer pairs for
/// planar apertures.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum ModeSet {
    Linear(Vec<i32>),
    Planar(Vec<(i32, i32)>),
}

impl ModeSet {
    pub fn len(&self) -> usize {
        match self {
            ModeSet::Linear(v) => v.len(),
            ModeSet::Planar(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Per-mode variances of the angular-domain coefficients on one side.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AngularSpectrum {
    pub side: Side,
    pub layout: Layout,
    pub modes: ModeSet,
    pub variances: Vec<f64>,
    /// Σ variances at build time; equals the one-sided channel power up to
    /// quadrature tolerance (1 for the isotropic distribution).
    pub total_power: f64,
}

impl AngularSpectrum {
    /// Number of angular modes (the channel dimension D).
    pub fn dimension(&self) -> usize {
        self.variances.len()
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), self)?;
        Ok(())
    }

    /// Load a cached spectrum, validating internal consistency. Any
    /// corruption is reported as an error so callers can recompute.
    pub fn load_json(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let spec: AngularSpectrum = serde_json::from_reader(std::io::BufReader::new(file))?;
        if spec.modes.len() != spec.variances.len() {
            return Err(Error::Config(
                "spectrum cache corrupt: index/variance length mismatch".into(),
            ));
        }
        if spec.variances.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::Config(
                "spectrum cache corrupt: non-positive variance".into(),
            ));
        }
        let sum: f64 = spec.variances.iter().sum();
        if (sum - spec.total_power).abs() > 1e-9 * spec.total_power.max(1.0) {
            return Err(Error::Config(
                "spectrum cache corrupt: power checksum mismatch".into(),
            ));
        }
        Ok(spec)
    }
}

/// Integer lattice points inside the ellipse (ℓx/n_x)² + (ℓz/n_z)² ≤ 1,
/// in row-major order (ℓz outer, ℓx inner). Cardinality ≈ π·n_x·n_z.
///
/// ```
/// let e = capa::spectrum::lattice_ellipse(1, 1);
/// assert_eq!(e.len(), 5);
/// assert!(e.contains(&(0, 0)));
/// ```
pub fn lattice_ellipse(n_x: u32, n_z: u32) -> Vec<(i32, i32)> {
    let (nx, nz) = (n_x as i32, n_z as i32);
    let mut out = Vec::new();
    for lz in -nz..=nz {
        for lx in -nx..=nx {
            let u = lx as f64 / nx as f64;
            let v = lz as f64 / nz as f64;
            if u * u + v * v <= 1.0 {
                out.push((lx, lz));
            }
        }
    }
    out
}

/// Index pairs of the wavenumber cells [ℓΔx,(ℓ+1)Δx]×[mΔz,(m+1)Δz] that
/// overlap the propagation disk with positive measure.
///
/// Because a cell extends from its index corner toward +x,+z, the covering
/// set spans ℓ ∈ [-n, n-1] per axis and its negative-side indices can exceed
/// the raw lattice-ellipse inequality by one step. Using the covering set
/// (rather than the corner-indexed ellipse) is what conserves channel power:
/// every point of the disk belongs to exactly one cell.
pub fn disk_covering_cells(n_x: u32, n_z: u32) -> Vec<(i32, i32)> {
    let (nx, nz) = (n_x as i32, n_z as i32);
    let inner = |l: i32| -> i32 {
        if l >= 0 {
            l
        } else {
            -(l + 1)
        }
    };
    let mut out = Vec::new();
    for lz in -nz..nz {
        for lx in -nx..nx {
            let u = inner(lx) as f64 / nx as f64;
            let v = inner(lz) as f64 / nz as f64;
            if u * u + v * v < 1.0 {
                out.push((lx, lz));
            }
        }
    }
    out
}

/// Radial extent of the ray at angle θ inside the rectangle
/// [ax,bx]×[az,bz], clipped to the disk of radius k0. Returns the closed
/// form of ∫ r/γ(r) dr over that extent divided by 2π k0, i.e. the
/// isotropic density line-integrated in r.
fn isotropic_ray_mass(theta: f64, k0: f64, ax: f64, bx: f64, az: f64, bz: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let mut lo = 0.0f64;
    let mut hi = k0;
    for (d, a, b) in [(c, ax, bx), (s, az, bz)] {
        if d.abs() < 1e-15 {
            if a > 0.0 || b < 0.0 {
                return 0.0;
            }
        } else {
            let (t1, t2) = if d > 0.0 { (a / d, b / d) } else { (b / d, a / d) };
            lo = lo.max(t1);
            hi = hi.min(t2);
        }
    }
    if lo >= hi {
        return 0.0;
    }
    let g_lo = (k0 * k0 - lo * lo).max(0.0).sqrt();
    let g_hi = (k0 * k0 - hi * hi).max(0.0).sqrt();
    (g_lo - g_hi) / (2.0 * std::f64::consts::PI * k0)
}

/// Variance of one planar mode under the isotropic density: the boundary
/// singularity 1/γ is removed exactly by the polar radial integral, leaving
/// a piecewise-smooth 1-D integral over θ.
fn isotropic_cell_variance(k0: f64, ax: f64, bx: f64, az: f64, bz: f64) -> Result<f64> {
    let dx = if ax > 0.0 {
        ax
    } else if bx < 0.0 {
        -bx
    } else {
        0.0
    };
    let dz = if az > 0.0 {
        az
    } else if bz < 0.0 {
        -bz
    } else {
        0.0
    };
    if dx * dx + dz * dz >= k0 * k0 {
        return Ok(0.0);
    }

    // Cell lies in a closed quadrant, so its angular extent never wraps
    // except for +π on the negative-x axis when the cell is in z <= 0.
    let wrap = bz <= 0.0;
    let angle = |x: f64, z: f64| -> f64 {
        let t = z.atan2(x);
        if wrap && t > std::f64::consts::PI - 1e-12 {
            -std::f64::consts::PI
        } else {
            t
        }
    };
    let corners = [(ax, az), (ax, bz), (bx, az), (bx, bz)];
    let mut cuts: Vec<f64> = corners.iter().map(|&(x, z)| angle(x, z)).collect();
    let t_min = cuts.iter().cloned().fold(f64::INFINITY, f64::min);
    let t_max = cuts.iter().cloned().fold(f64::NEG_INFINITY, f64::max);

    // Break the θ range where the disk boundary crosses a cell edge: g(θ)
    // has kinks there.
    for &x in &[ax, bx] {
        if x.abs() < k0 {
            let z = (k0 * k0 - x * x).sqrt();
            for zz in [z, -z] {
                if zz > az && zz < bz {
                    cuts.push(angle(x, zz));
                }
            }
        }
    }
    for &z in &[az, bz] {
        if z.abs() < k0 {
            let x = (k0 * k0 - z * z).sqrt();
            for xx in [x, -x] {
                if xx > ax && xx < bx {
                    cuts.push(angle(xx, z));
                }
            }
        }
    }
    cuts.retain(|t| *t >= t_min && *t <= t_max);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-13);

    let mut total = 0.0;
    for w in cuts.windows(2) {
        let (v, _) = integrate(
            |t| isotropic_ray_mass(t, k0, ax, bx, az, bz),
            w[0],
            w[1],
            1e-14,
            1e-10,
        )?;
        total += v;
    }
    Ok(total.max(0.0))
}

/// 2-D integral of a bounded density over cell ∩ disk by recursive
/// subdivision: rectangles fully inside integrate by nested quadrature,
/// straddling rectangles split until their possible contribution is below
/// the discard tolerance.
fn custom_cell_variance(
    f: &(dyn Fn(f64, f64) -> f64 + Send + Sync),
    k0: f64,
    rect: (f64, f64, f64, f64),
    discard_tol: f64,
) -> Result<f64> {
    fn nearest_sq((ax, bx, az, bz): (f64, f64, f64, f64)) -> f64 {
        let dx = if ax > 0.0 {
            ax
        } else if bx < 0.0 {
            -bx
        } else {
            0.0
        };
        let dz = if az > 0.0 {
            az
        } else if bz < 0.0 {
            -bz
        } else {
            0.0
        };
        dx * dx + dz * dz
    }
    fn farthest_sq((ax, bx, az, bz): (f64, f64, f64, f64)) -> f64 {
        let dx = ax.abs().max(bx.abs());
        let dz = az.abs().max(bz.abs());
        dx * dx + dz * dz
    }

    let mut total = 0.0;
    let mut stack = vec![rect];
    while let Some(r) = stack.pop() {
        let (ax, bx, az, bz) = r;
        if nearest_sq(r) >= k0 * k0 {
            continue;
        }
        if farthest_sq(r) <= k0 * k0 {
            // Fully inside: tensor quadrature, inner failures surface as NaN.
            let (v, _) = integrate(
                |x| match integrate(|z| f(x, z), az, bz, 1e-13, 1e-10) {
                    Ok((v, _)) => v,
                    Err(_) => f64::NAN,
                },
                ax,
                bx,
                1e-13,
                1e-10,
            )?;
            if !v.is_finite() {
                return Err(Error::Quadrature(
                    "inner quadrature failed on custom density".into(),
                ));
            }
            total += v;
            continue;
        }
        // Straddles the boundary.
        let area = (bx - ax) * (bz - az);
        let fmid = f(0.5 * (ax + bx), 0.5 * (az + bz)).abs();
        let bound = (fmid + 1.0) * area;
        if bound < discard_tol || stack.len() > 200_000 {
            total += 0.5 * fmid * area;
            continue;
        }
        let mx = 0.5 * (ax + bx);
        let mz = 0.5 * (az + bz);
        stack.push((ax, mx, az, mz));
        stack.push((mx, bx, az, mz));
        stack.push((ax, mx, mz, bz));
        stack.push((mx, bx, mz, bz));
    }
    Ok(total)
}

/// Per-mode variances of a linear aperture: 2N cells partition [-k0, k0].
///
/// Under isotropic scattering every mode carries exactly 1/(2N); custom
/// densities are integrated over the strip cell ∩ disk by adaptive
/// quadrature.
pub fn linear_variances(
    config: &ApertureConfig,
    spectrum: &ScatteringSpectrum,
    side: Side,
) -> Result<AngularSpectrum> {
    config.validate()?;
    let n = config.mode_counts(side).0;
    let indices: Vec<i32> = (-(n as i32)..n as i32).collect();
    let variances = match spectrum.density(side) {
        None => vec![1.0 / (2.0 * n as f64); 2 * n as usize],
        Some(f) => {
            let k0 = config.wavenumber();
            let delta = k0 / n as f64;
            let mut vars = Vec::with_capacity(2 * n as usize);
            for &l in &indices {
                let a = l as f64 * delta;
                let b = (l + 1) as f64 * delta;
                let (v, _) = integrate(
                    |x| {
                        let half = (k0 * k0 - x * x).max(0.0).sqrt();
                        if half == 0.0 {
                            return 0.0;
                        }
                        match integrate(|z| f(x, z), -half, half, 1e-13, 1e-9) {
                            Ok((v, _)) => v,
                            Err(_) => f64::NAN,
                        }
                    },
                    a,
                    b,
                    1e-13,
                    1e-9,
                )?;
                if !v.is_finite() {
                    return Err(Error::Quadrature(
                        "linear mode quadrature failed on custom density".into(),
                    ));
                }
                vars.push(v.max(0.0));
            }
            vars
        }
    };
    let total_power = variances.iter().sum();
    Ok(AngularSpectrum {
        side,
        layout: Layout::Linear,
        modes: ModeSet::Linear(indices),
        variances,
        total_power,
    })
}

/// Per-mode variances of a planar aperture over the disk-covering cell set.
///
/// Isotropic cells integrate in polar coordinates (the rim singularity
/// cancels against the radial Jacobian); custom densities subdivide against
/// the disk boundary. Cells whose variance vanishes are dropped.
pub fn planar_variances(
    config: &ApertureConfig,
    spectrum: &ScatteringSpectrum,
    side: Side,
) -> Result<AngularSpectrum> {
    config.validate()?;
    let (n_x, n_z) = config.mode_counts(side);
    let k0 = config.wavenumber();
    let dx = k0 / n_x as f64;
    let dz = k0 / n_z as f64;
    let cells = disk_covering_cells(n_x, n_z);
    let mut modes = Vec::with_capacity(cells.len());
    let mut variances = Vec::with_capacity(cells.len());
    for (lx, lz) in cells {
        let rect = (lx as f64 * dx, (lx + 1) as f64 * dx, lz as f64 * dz, (lz + 1) as f64 * dz);
        let v = match spectrum.density(side) {
            None => isotropic_cell_variance(k0, rect.0, rect.1, rect.2, rect.3)?,
            Some(f) => custom_cell_variance(f, k0, rect, 1e-10)?,
        };
        if v > 0.0 {
            modes.push((lx, lz));
            variances.push(v);
        }
    }
    let total_power = variances.iter().sum();
    Ok(AngularSpectrum {
        side,
        layout: Layout::Planar,
        modes: ModeSet::Planar(modes),
        variances,
        total_power,
    })
}

/// Separable transmit×receive variance grid for MIMO channels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MimoSpectrum {
    pub tx: AngularSpectrum,
    pub rx: AngularSpectrum,
    /// Row-major (rx-mode major) variance grid σ²_{i,j} = ϱ²_{r,i}·ϱ²_{t,j}.
    grid: Vec<f64>,
    pub separable: bool,
}

impl MimoSpectrum {
    /// Separable grid from already-built per-side spectra.
    pub fn from_sides(rx: AngularSpectrum, tx: AngularSpectrum) -> Self {
        let mut grid = Vec::with_capacity(rx.dimension() * tx.dimension());
        for &vr in &rx.variances {
            for &vt in &tx.variances {
                grid.push(vr * vt);
            }
        }
        MimoSpectrum {
            tx,
            rx,
            grid,
            separable: true,
        }
    }

    /// Synthetic separable grid from explicit per-side factors, for
    /// normalized studies that are not tied to an aperture geometry.
    pub fn from_factors(rx_factors: Vec<f64>, tx_factors: Vec<f64>) -> Self {
        let mk = |side: Side, vars: Vec<f64>| {
            let total = vars.iter().sum();
            AngularSpectrum {
                side,
                layout: Layout::Linear,
                modes: ModeSet::Linear((0..vars.len() as i32).collect()),
                variances: vars,
                total_power: total,
            }
        };
        let rx = mk(Side::Rx, rx_factors);
        let tx = mk(Side::Tx, tx_factors);
        let mut grid = Vec::with_capacity(rx.dimension() * tx.dimension());
        for &vr in &rx.variances {
            for &vt in &tx.variances {
                grid.push(vr * vt);
            }
        }
        MimoSpectrum {
            tx,
            rx,
            grid,
            separable: true,
        }
    }

    /// (receive modes, transmit modes)
    pub fn dims(&self) -> (usize, usize) {
        (self.rx.dimension(), self.tx.dimension())
    }

    pub fn variance(&self, rx_mode: usize, tx_mode: usize) -> f64 {
        self.grid[rx_mode * self.tx.dimension() + tx_mode]
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Per-side receive factors ϱ²_{r,i}.
    pub fn rx_factors(&self) -> &[f64] {
        &self.rx.variances
    }

    /// Per-side transmit factors ϱ²_{t,j}.
    pub fn tx_factors(&self) -> &[f64] {
        &self.tx.variances
    }

    pub fn total_power(&self) -> f64 {
        self.grid.iter().sum()
    }

    pub fn min_entry(&self) -> f64 {
        self.grid.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    pub fn max_entry(&self) -> f64 {
        self.grid.iter().cloned().fold(0.0f64, f64::max)
    }
}

/// Build the MIMO variance grid from per-side spectra. Separable scattering
/// makes the grid an outer product of the per-side variance lists; for the
/// isotropic linear case every entry is 1/(2N_rx · 2N_tx).
pub fn mimo_variance_grid(
    config: &ApertureConfig,
    spectrum: &ScatteringSpectrum,
    layout: Layout,
) -> Result<MimoSpectrum> {
    let (tx, rx) = match layout {
        Layout::Linear => (
            linear_variances(config, spectrum, Side::Tx)?,
            linear_variances(config, spectrum, Side::Rx)?,
        ),
        Layout::Planar => (
            planar_variances(config, spectrum, Side::Tx)?,
            planar_variances(config, spectrum, Side::Rx)?,
        ),
    };
    let mut grid = Vec::with_capacity(rx.dimension() * tx.dimension());
    for &vr in &rx.variances {
        for &vt in &tx.variances {
            grid.push(vr * vt);
        }
    }
    Ok(MimoSpectrum {
        tx,
        rx,
        grid,
        separable: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ellipse_small_case() {
        let e = lattice_ellipse(1, 1);
        assert_eq!(e.len(), 5);
        for p in [(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)] {
            assert!(e.contains(&p), "missing {p:?}");
        }
    }

    #[test]
    fn ellipse_cardinality_near_pi_n_squared() {
        let e = lattice_ellipse(10, 10);
        let target = std::f64::consts::PI * 100.0;
        assert!((e.len() as f64) >= 0.9 * target && (e.len() as f64) <= 1.1 * target);
        // tighter at n = 32
        let e = lattice_ellipse(32, 32);
        let target = std::f64::consts::PI * 32.0 * 32.0;
        assert!((e.len() as f64 / target - 1.0).abs() < 0.05);
    }

    #[test]
    fn ellipse_symmetry() {
        for &(nx, nz) in &[(3, 5), (7, 2), (10, 10)] {
            let e = lattice_ellipse(nx, nz);
            for &(lx, lz) in &e {
                assert!(e.contains(&(-lx, -lz)), "asymmetry at {lx},{lz}");
            }
        }
    }

    #[test]
    fn covering_cells_tile_the_disk() {
        // Every disk point must land in exactly one covering cell; probe on
        // a grid. n = 1 is the worst case (4 quadrant cells).
        for &n in &[1u32, 3, 10] {
            let cells = disk_covering_cells(n, n);
            let delta = 1.0 / n as f64; // normalized so the disk has radius 1
            for i in -50..50i32 {
                for j in -50..50i32 {
                    let x = (i as f64 + 0.5) / 50.0;
                    let z = (j as f64 + 0.5) / 50.0;
                    if x * x + z * z >= 1.0 {
                        continue;
                    }
                    let lx = (x / delta).floor() as i32;
                    let lz = (z / delta).floor() as i32;
                    assert!(
                        cells.contains(&(lx, lz)),
                        "n={n}: point ({x},{z}) in uncovered cell ({lx},{lz})"
                    );
                }
            }
        }
    }

    #[test]
    fn linear_isotropic_flat_and_normalized() {
        let cfg = ApertureConfig::reference(10);
        let s = linear_variances(&cfg, &ScatteringSpectrum::Isotropic, Side::Tx).unwrap();
        assert_eq!(s.dimension(), 20);
        for &v in &s.variances {
            assert_eq!(v, 0.05);
        }
        assert!((s.total_power - 1.0).abs() < 1e-12);
        match &s.modes {
            ModeSet::Linear(idx) => {
                assert_eq!(idx.first(), Some(&-10));
                assert_eq!(idx.last(), Some(&9));
            }
            _ => panic!("expected linear modes"),
        }
    }

    #[test]
    fn planar_isotropic_power_conservation() {
        let cfg = ApertureConfig::reference(4);
        let s = planar_variances(&cfg, &ScatteringSpectrum::Isotropic, Side::Rx).unwrap();
        assert!(
            (s.total_power - 1.0).abs() < 1e-6,
            "planar power {} != 1",
            s.total_power
        );
        assert!(s.variances.iter().all(|&v| v > 0.0));
        assert_eq!(s.modes.len(), s.variances.len());
    }

    #[test]
    fn planar_quadrant_cell_exact() {
        // n = 1: each of the four covering cells is a quarter disk -> 1/4.
        let cfg = ApertureConfig::reference(1);
        let s = planar_variances(&cfg, &ScatteringSpectrum::Isotropic, Side::Tx).unwrap();
        assert_eq!(s.dimension(), 4);
        for &v in &s.variances {
            assert!((v - 0.25).abs() < 1e-10, "quadrant mass {v}");
        }
    }

    #[test]
    fn mimo_grid_isotropic_linear() {
        let cfg = ApertureConfig::reference(10);
        let g = mimo_variance_grid(&cfg, &ScatteringSpectrum::Isotropic, Layout::Linear).unwrap();
        assert_eq!(g.dims(), (20, 20));
        for i in 0..20 {
            for j in 0..20 {
                assert!((g.variance(i, j) - 0.0025).abs() < 1e-15);
            }
        }
        assert!((g.total_power() - 1.0).abs() < 1e-9);
        assert!(g.separable);
        // Row sums factorize.
        let row0: f64 = (0..20).map(|j| g.variance(0, j)).sum();
        let tx_sum: f64 = g.tx_factors().iter().sum();
        assert!((row0 - g.rx_factors()[0] * tx_sum).abs() < 1e-12);
    }

    #[test]
    fn spectrum_cache_roundtrip_and_corruption() {
        let cfg = ApertureConfig::reference(2);
        let s = planar_variances(&cfg, &ScatteringSpectrum::Isotropic, Side::Tx).unwrap();
        let dir = std::env::temp_dir().join("capa_spec_cache_test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("tx_planar.json");
        s.save_json(&path).unwrap();
        let loaded = AngularSpectrum::load_json(&path).unwrap();
        assert_eq!(loaded.variances, s.variances);
        // Corrupt the checksum field.
        let mut text = std::fs::read_to_string(&path).unwrap();
        text = text.replace("\"total_power\"", "\"total_power_x\"");
        // serde will fail on the missing field -> treated as corruption
        std::fs::write(&path, text).unwrap();
        assert!(AngularSpectrum::load_json(&path).is_err());
    }

    #[test]
    fn far_field_flag() {
        let mut cfg = ApertureConfig::reference(10);
        assert!(!cfg.far_field_warning());
        cfg.distance_m = 0.5;
        assert!(cfg.far_field_warning());
    }

    #[test]
    fn spacing_must_cover_element() {
        let mut cfg = ApertureConfig::reference(4);
        cfg.element_spacing_tx_m = cfg.element_area_tx_m2.sqrt() * 0.5;
        assert!(cfg.validate().is_err());
    }
}
