//! Hologram simulation from continuous scenes, the matrix-free forward and
//! adjoint operators on voxel maps, and the explicit dense matrix used as
//! an oracle.
//!
//! Scene simulation evaluates exact phases at arbitrary scatterer
//! positions. The operator path works on voxel centers through the unitary
//! transform of [`crate::fourier`], so a map holding amplitude `a` in one
//! voxel corresponds to a point scatterer of amplitude `a / sqrt(N)` at the
//! voxel center.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{dot, Acquisition, Vec3};
use crate::kgrid::{extract_with, sample_location, splat_with, KGrid, Stencil};
use crate::maps::{ThreeMaps, VoxelGrid};
use crate::polarimetry::{closed_form_weights, Channel, ModeWeights, ScatteringMatrix};

/// Default ceiling on the number of entries of an explicit forward matrix.
pub const DEFAULT_DENSE_CAP: usize = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scatterer {
    pub position: Vec3,
    pub matrix: ScatteringMatrix,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scene {
    pub scatterers: Vec<Scatterer>,
}

impl Scene {
    pub fn new(scatterers: Vec<Scatterer>) -> Result<Self> {
        for (i, s) in scatterers.iter().enumerate() {
            if s.position.iter().any(|p| !p.is_finite()) || !s.matrix.is_finite() {
                return Err(Error::invalid(format!("scatterer #{i} has non-finite entries")));
            }
        }
        Ok(Self { scatterers })
    }

    pub fn push(&mut self, position: Vec3, matrix: ScatteringMatrix) {
        self.scatterers.push(Scatterer { position, matrix });
    }
}

/// Measured (or simulated) complex samples, one per acquisition descriptor.
#[derive(Debug, Clone, PartialEq)]
pub struct Hologram {
    values: Vec<Complex64>,
    acquisition: Acquisition,
}

impl Hologram {
    pub fn new(values: Vec<Complex64>, acquisition: Acquisition) -> Result<Self> {
        if values.len() != acquisition.len() {
            return Err(Error::ShapeMismatch(format!(
                "hologram has {} values but the acquisition has {} descriptors",
                values.len(),
                acquisition.len()
            )));
        }
        Ok(Self {
            values,
            acquisition,
        })
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn acquisition(&self) -> &Acquisition {
        &self.acquisition
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_parts(self) -> (Vec<Complex64>, Acquisition) {
        (self.values, self.acquisition)
    }
}

pub(crate) fn acquisition_weights(acq: &Acquisition) -> Result<Vec<ModeWeights>> {
    acq.iter()
        .map(|d| closed_form_weights(d.theta(), d.phi(), d.mode()))
        .collect()
}

#[inline]
fn plane_wave(q: &Vec3, r: &Vec3) -> Complex64 {
    Complex64::from_polar(1.0, dot(q, r))
}

/// `S_i = Σ_n s*_n(i) exp(-2j k_i·r_n) + ε_i` with circular Gaussian noise of
/// total variance `noise_sigma²`.
///
/// Noise for sample `i` comes from stream `i` of a ChaCha generator keyed by
/// `seed`, so the output does not depend on the thread count.
pub fn simulate_hologram(scene: &Scene, acq: &Acquisition, noise_sigma: f64, seed: u64) -> Result<Hologram> {
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(Error::invalid(format!("noise sigma must be >= 0, got {noise_sigma}")));
    }
    let weights = acquisition_weights(acq)?;
    let normal = Normal::new(0.0, noise_sigma / std::f64::consts::SQRT_2)
        .map_err(|e| Error::invalid(e.to_string()))?;
    let values = acq
        .descriptors()
        .par_iter()
        .zip(weights.par_iter())
        .enumerate()
        .map(|(i, (d, w))| {
            let q = sample_location(d);
            let mut v: Complex64 = scene
                .scatterers
                .iter()
                .map(|s| w.apply(&s.matrix) * plane_wave(&q, &s.position))
                .sum();
            if noise_sigma > 0.0 {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                v += Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
            }
            v
        })
        .collect();
    Hologram::new(values, acq.clone())
}

/// Polarization-blind baseline `S_i = Σ_n s_n exp(-2j k_i·r_n)`; the mode of
/// each descriptor is ignored.
pub fn classical_ms_hologram(scene: &[(Vec3, Complex64)], acq: &Acquisition) -> Result<Hologram> {
    let values = acq
        .descriptors()
        .par_iter()
        .map(|d| {
            let q = sample_location(d);
            scene.iter().map(|(r, s)| s * plane_wave(&q, r)).sum()
        })
        .collect();
    Hologram::new(values, acq.clone())
}

/// Matrix-free `A = [T W_xx F | T W_yy F | T W_xy F]` for one acquisition and grid.
pub struct ForwardOperator {
    kgrid: KGrid,
    grid: VoxelGrid,
    stencils: Vec<Stencil>,
    weights: Vec<ModeWeights>,
    transform: crate::fourier::SpectralTransform,
}

impl ForwardOperator {
    pub fn new(acq: &Acquisition, kgrid: &KGrid) -> Result<Self> {
        Ok(Self {
            kgrid: *kgrid,
            grid: kgrid.image_grid(),
            stencils: kgrid.stencils(acq)?,
            weights: acquisition_weights(acq)?,
            transform: kgrid.transform(),
        })
    }

    pub fn grid(&self) -> &VoxelGrid {
        &self.grid
    }

    pub fn kgrid(&self) -> &KGrid {
        &self.kgrid
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[ModeWeights] {
        &self.weights
    }

    pub(crate) fn stencils(&self) -> &[Stencil] {
        &self.stencils
    }

    pub(crate) fn transform(&self) -> &crate::fourier::SpectralTransform {
        &self.transform
    }

    fn check_grid(&self, grid: &VoxelGrid) -> Result<()> {
        if grid.approx_eq(&self.grid, 1e-9) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "maps grid {grid:?} is not the conjugate grid {:?} of the k-space grid",
                self.grid
            )))
        }
    }

    pub fn apply(&self, maps: &ThreeMaps) -> Result<Vec<Complex64>> {
        self.check_grid(maps.grid())?;
        let mut out = vec![Complex64::default(); self.len()];
        for channel in Channel::ALL {
            let mut spectrum = maps.map(channel).to_vec();
            self.transform.image_to_spectrum(&mut spectrum);
            let sampled = extract_with(&spectrum, &self.stencils);
            for ((o, s), w) in out.iter_mut().zip(sampled).zip(&self.weights) {
                *o += s * w.get(channel);
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self, values: &[Complex64]) -> Result<ThreeMaps> {
        if values.len() != self.len() {
            return Err(Error::ShapeMismatch(format!(
                "{} values for an operator with {} rows",
                values.len(),
                self.len()
            )));
        }
        let mut maps = ThreeMaps::zeros(self.grid);
        for channel in Channel::ALL {
            let weighted = values.iter().zip(&self.weights).map(|(v, w)| v * w.get(channel));
            let gridded = splat_with(weighted, &self.stencils, self.kgrid.dims());
            let target = maps.map_mut(channel);
            target.copy_from_slice(&gridded.values);
            self.transform.spectrum_to_image(target);
        }
        Ok(maps)
    }
}

/// `A s` for voxel maps on the conjugate grid of `kgrid`; noise-free.
pub fn apply_forward(maps: &ThreeMaps, acq: &Acquisition, kgrid: &KGrid) -> Result<Vec<Complex64>> {
    ForwardOperator::new(acq, kgrid)?.apply(maps)
}

/// `A^H y`, the exact adjoint of [`apply_forward`].
pub fn apply_adjoint(values: &[Complex64], acq: &Acquisition, kgrid: &KGrid) -> Result<ThreeMaps> {
    ForwardOperator::new(acq, kgrid)?.adjoint(values)
}

/// Explicit `M x 3N` forward matrix: entry `(i, (k, n))` is
/// `w_k(i) exp(j q_i·r_n) / sqrt(N)` with `r_n` the voxel centers.
/// Column blocks follow the stacked map order xx, yy, xy.
pub fn dense_matrix(acq: &Acquisition, grid: &VoxelGrid, cap: usize) -> Result<DMatrix<Complex64>> {
    let n = grid.len();
    let entries = acq.len().saturating_mul(3 * n);
    if entries > cap {
        return Err(Error::SizeCap { entries, cap });
    }
    let weights = acquisition_weights(acq)?;
    let qs: Vec<Vec3> = acq.iter().map(sample_location).collect();
    let positions: Vec<Vec3> = (0..n).map(|i| grid.position(grid.unravel(i))).collect();
    let scale = 1.0 / (n as f64).sqrt();
    Ok(DMatrix::from_fn(acq.len(), 3 * n, |i, col| {
        let (k, voxel) = (col / n, col % n);
        plane_wave(&qs[i], &positions[voxel]) * (weights[i].get(Channel::ALL[k]) * scale)
    }))
}
