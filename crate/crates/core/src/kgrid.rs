//! Spatial-frequency grid: sample locations, the truncation/embedding
//! operator `T` (with nearest or trilinear regridding) and the FFT geometry.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::SpectralTransform;
use crate::geometry::{Acquisition, MeasurementDescriptor, Mode, Vec3, SPEED_OF_LIGHT};
use crate::maps::VoxelGrid;

/// Fractional offsets closer than this to a node (in cell units) snap onto it.
const NODE_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Interp {
    #[default]
    Nearest,
    Linear,
}

impl FromStr for Interp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nearest" => Ok(Interp::Nearest),
            "linear" => Ok(Interp::Linear),
            _ => Err(Error::invalid(format!(
                "unknown interpolation {s:?} (expected nearest or linear)"
            ))),
        }
    }
}

impl fmt::Display for Interp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Interp::Nearest => "nearest",
            Interp::Linear => "linear",
        })
    }
}

/// Cartesian k-space grid (rad/m). Node `m` sits at `center + (m - dims/2) * delta_k`;
/// the conjugate voxel pitch is `2π / (dims * delta_k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "KGridFile", into = "KGridFile")]
pub struct KGrid {
    dims: [usize; 3],
    delta_k: Vec3,
    center: Vec3,
    interp: Interp,
}

#[derive(Serialize, Deserialize)]
struct KGridFile {
    dims: [usize; 3],
    delta_k: Vec3,
    center: Vec3,
    #[serde(default)]
    interp: Interp,
}

impl TryFrom<KGridFile> for KGrid {
    type Error = Error;

    fn try_from(f: KGridFile) -> Result<Self> {
        KGrid::new(f.dims, f.delta_k, f.center, f.interp)
    }
}

impl From<KGrid> for KGridFile {
    fn from(g: KGrid) -> Self {
        KGridFile {
            dims: g.dims,
            delta_k: g.delta_k,
            center: g.center,
            interp: g.interp,
        }
    }
}

impl KGrid {
    pub fn new(dims: [usize; 3], delta_k: Vec3, center: Vec3, interp: Interp) -> Result<Self> {
        if dims.iter().any(|&d| d < 2) {
            return Err(Error::invalid(format!("k-grid dims must be >= 2, got {dims:?}")));
        }
        if delta_k.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
            return Err(Error::invalid(format!("delta_k must be positive, got {delta_k:?}")));
        }
        if center.iter().any(|c| !c.is_finite()) {
            return Err(Error::invalid("k-grid center must be finite"));
        }
        Ok(Self {
            dims,
            delta_k,
            center,
            interp,
        })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn delta_k(&self) -> Vec3 {
        self.delta_k
    }

    pub fn center(&self) -> Vec3 {
        self.center
    }

    pub fn interp(&self) -> Interp {
        self.interp
    }

    pub fn with_interp(mut self, interp: Interp) -> Self {
        self.interp = interp;
        self
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn half(&self) -> [usize; 3] {
        self.dims.map(|d| d / 2)
    }

    /// The conjugate image grid; voxel `dims/2` sits at the origin.
    pub fn image_grid(&self) -> VoxelGrid {
        let h = self.half();
        let pitch: Vec3 =
            std::array::from_fn(|a| 2.0 * std::f64::consts::PI / (self.dims[a] as f64 * self.delta_k[a]));
        let origin: Vec3 = std::array::from_fn(|a| -(h[a] as f64) * pitch[a]);
        VoxelGrid {
            dims: self.dims,
            pitch,
            origin,
        }
    }

    pub fn node(&self, idx: [usize; 3]) -> Vec3 {
        let h = self.half();
        std::array::from_fn(|a| self.center[a] + (idx[a] as f64 - h[a] as f64) * self.delta_k[a])
    }

    #[inline]
    pub fn linear_index(&self, idx: [usize; 3]) -> usize {
        idx[0] + self.dims[0] * (idx[1] + self.dims[1] * idx[2])
    }

    pub fn transform(&self) -> SpectralTransform {
        SpectralTransform::new(self.dims, self.delta_k, self.center)
    }

    /// Interpolation stencil of a k-space point, `None` when it leaves the grid.
    pub fn stencil(&self, q: &Vec3) -> Option<Stencil> {
        let h = self.half();
        let mut axes = [[(0usize, 0.0f64); 2]; 3];
        let mut counts = [0usize; 3];
        for a in 0..3 {
            let t = (q[a] - self.center[a]) / self.delta_k[a] + h[a] as f64;
            if !t.is_finite() {
                return None;
            }
            let n = self.dims[a] as f64;
            match self.interp {
                Interp::Nearest => {
                    let i = t.round();
                    if i < 0.0 || i >= n {
                        return None;
                    }
                    axes[a][0] = (i as usize, 1.0);
                    counts[a] = 1;
                }
                Interp::Linear => {
                    let mut lo = t.floor();
                    let mut frac = t - lo;
                    if frac > 1.0 - NODE_SNAP {
                        lo += 1.0;
                        frac = 0.0;
                    } else if frac < NODE_SNAP {
                        frac = 0.0;
                    }
                    if lo < 0.0 || lo >= n || (frac > 0.0 && lo + 1.0 >= n) {
                        return None;
                    }
                    axes[a][0] = (lo as usize, 1.0 - frac);
                    counts[a] = 1;
                    if frac > 0.0 {
                        axes[a][1] = (lo as usize + 1, frac);
                        counts[a] = 2;
                    }
                }
            }
        }
        let mut stencil = Stencil::default();
        for iz in &axes[2][..counts[2]] {
            for iy in &axes[1][..counts[1]] {
                for ix in &axes[0][..counts[0]] {
                    let cell = self.linear_index([ix.0, iy.0, iz.0]);
                    stencil.push(cell, ix.1 * iy.1 * iz.1);
                }
            }
        }
        Some(stencil)
    }

    /// Stencils for every descriptor, or an out-of-band error listing offenders.
    pub fn stencils(&self, acq: &Acquisition) -> Result<Vec<Stencil>> {
        let mut out = Vec::with_capacity(acq.len());
        let mut offenders: Vec<(usize, Vec3)> = Vec::new();
        for (i, d) in acq.iter().enumerate() {
            let q = sample_location(d);
            match self.stencil(&q) {
                Some(s) => out.push(s),
                None => offenders.push((i, q)),
            }
        }
        match offenders.first() {
            None => Ok(out),
            Some(&(first_index, first_q)) => {
                log::debug!("out-of-band measurements: {:?}", offenders.iter().map(|o| o.0).collect::<Vec<_>>());
                Err(Error::OutOfBand {
                    count: offenders.len(),
                    first_index,
                    first_q,
                })
            }
        }
    }
}

/// Cells touched by one sample and their interpolation weights (at most 8).
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Stencil {
    cells: [(usize, f64); 8],
    len: usize,
}

impl Stencil {
    fn push(&mut self, cell: usize, weight: f64) {
        self.cells[self.len] = (cell, weight);
        self.len += 1;
    }

    pub fn cells(&self) -> &[(usize, f64)] {
        &self.cells[..self.len]
    }
}

/// Regridded k-space data with the interpolation weight accumulated per cell.
#[derive(Debug, Clone, PartialEq)]
pub struct GriddedSpectrum {
    pub dims: [usize; 3],
    pub values: Vec<Complex64>,
    pub hit_weight: Vec<f64>,
}

impl GriddedSpectrum {
    pub fn zeros(dims: [usize; 3]) -> Self {
        let n = dims.iter().product();
        Self {
            dims,
            values: vec![Complex64::default(); n],
            hit_weight: vec![0.0; n],
        }
    }

    pub fn from_values(dims: [usize; 3], values: Vec<Complex64>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if values.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "spectrum has {} cells, dims {dims:?} need {n}",
                values.len()
            )));
        }
        Ok(Self {
            dims,
            values,
            hit_weight: vec![1.0; n],
        })
    }

    pub fn observed_cells(&self) -> usize {
        self.hit_weight.iter().filter(|&&w| w > 0.0).count()
    }
}

/// Spatial frequency sampled by a measurement: `q = -2 k k̂`.
///
/// A hologram sample equals `Σ s*(i) exp(j q·r)` over the scatterers.
pub fn sample_location(d: &MeasurementDescriptor) -> Vec3 {
    let (dir, k) = d.wave_vector();
    dir.map(|c| -2.0 * k * c)
}

/// Accumulates `value * interp_weight` per cell without normalizing; the
/// exact adjoint of [`extract_with`].
pub(crate) fn splat_with(
    values: impl Iterator<Item = Complex64>,
    stencils: &[Stencil],
    dims: [usize; 3],
) -> GriddedSpectrum {
    let mut out = GriddedSpectrum::zeros(dims);
    for (v, s) in values.zip(stencils) {
        for &(cell, w) in s.cells() {
            out.values[cell] += v * w;
            out.hit_weight[cell] += w;
        }
    }
    out
}

pub(crate) fn extract_with(values: &[Complex64], stencils: &[Stencil]) -> Vec<Complex64> {
    stencils
        .iter()
        .map(|s| s.cells().iter().map(|&(cell, w)| values[cell] * w).sum())
        .collect()
}

/// Averages coincident contributions: every observed cell is divided by its
/// accumulated interpolation weight.
pub(crate) fn normalize(spectrum: &mut GriddedSpectrum) {
    for (v, &w) in spectrum.values.iter_mut().zip(&spectrum.hit_weight) {
        if w > 0.0 {
            *v /= w;
        }
    }
}

fn check_len<T>(what: &str, xs: &[T], acq: &Acquisition) -> Result<()> {
    if xs.len() != acq.len() {
        return Err(Error::ShapeMismatch(format!(
            "{what} has {} entries but the acquisition has {}",
            xs.len(),
            acq.len()
        )));
    }
    Ok(())
}

/// Places `weights[i] * values[i]` onto the grid and averages per cell.
pub fn regrid(
    values: &[Complex64],
    weights: &[f64],
    acq: &Acquisition,
    kgrid: &KGrid,
) -> Result<GriddedSpectrum> {
    check_len("values", values, acq)?;
    check_len("weights", weights, acq)?;
    if values.iter().any(|v| v.is_nan()) || weights.iter().any(|w| w.is_nan()) {
        return Err(Error::invalid("NaN in regrid input"));
    }
    let stencils = kgrid.stencils(acq)?;
    let mut g = splat_with(
        values.iter().zip(weights).map(|(v, &w)| v * w),
        &stencils,
        kgrid.dims,
    );
    normalize(&mut g);
    Ok(g)
}

/// Interpolates the gridded values at every sample location.
pub fn extract(spectrum: &GriddedSpectrum, acq: &Acquisition, kgrid: &KGrid) -> Result<Vec<Complex64>> {
    if spectrum.dims != kgrid.dims {
        return Err(Error::ShapeMismatch(format!(
            "spectrum dims {:?} differ from grid dims {:?}",
            spectrum.dims, kgrid.dims
        )));
    }
    let stencils = kgrid.stencils(acq)?;
    Ok(extract_with(&spectrum.values, &stencils))
}

fn is_smooth(mut n: usize) -> bool {
    for p in [2, 3, 5] {
        while n.is_multiple_of(p) {
            n /= p;
        }
    }
    n == 1
}

/// Smallest 2·3·5-smooth integer >= `n` (and >= 2).
pub fn next_smooth(n: usize) -> usize {
    let mut m = n.max(2);
    while !is_smooth(m) {
        m += 1;
    }
    m
}

/// Grid whose field of view covers `image_extent_m` and whose k-space box
/// covers every sample (with one spare cell per side for trilinear stencils).
pub fn suggest_grid(acq: &Acquisition, image_extent_m: Vec3) -> Result<KGrid> {
    if acq.is_empty() {
        return Err(Error::CannotSuggest("empty acquisition".into()));
    }
    if image_extent_m.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
        return Err(Error::CannotSuggest(format!(
            "image extent must be positive, got {image_extent_m:?}"
        )));
    }
    let qs: Vec<Vec3> = acq.iter().map(sample_location).collect();
    let first = qs[0];
    let scale = first.iter().map(|c| c.abs()).fold(0.0, f64::max);
    if qs
        .iter()
        .all(|q| (0..3).all(|a| (q[a] - first[a]).abs() <= 1e-12 * scale))
    {
        return Err(Error::CannotSuggest(
            "all measurements sample the same spatial frequency".into(),
        ));
    }
    let m = qs.len() as f64;
    let center: Vec3 = std::array::from_fn(|a| qs.iter().map(|q| q[a]).sum::<f64>() / m);
    let delta_k: Vec3 = image_extent_m.map(|e| 2.0 * std::f64::consts::PI / e);
    let dims: [usize; 3] = std::array::from_fn(|a| {
        let below = qs.iter().map(|q| (center[a] - q[a]) / delta_k[a]).fold(0.0, f64::max);
        let above = qs.iter().map(|q| (q[a] - center[a]) / delta_k[a]).fold(0.0, f64::max);
        let half = (below.ceil() as usize + 1).max(above.ceil() as usize + 2);
        next_smooth(2 * half)
    });
    KGrid::new(dims, delta_k, center, Interp::Nearest)
}

/// Builds descriptors whose sample locations fall exactly on the requested
/// grid nodes, so that `T` is a pure selection.
///
/// Nodes on the `+z` axis (`theta = 0`) take the roll `phi_on_axis`; any
/// other node fixes `phi` itself. Repeated nodes are an error unless
/// `allow_duplicates` is set.
pub fn on_grid_acquisition(
    kgrid: &KGrid,
    nodes: &[[usize; 3]],
    mode: Mode,
    phi_on_axis: f64,
    allow_duplicates: bool,
) -> Result<Acquisition> {
    if !allow_duplicates {
        let mut seen = std::collections::HashSet::with_capacity(nodes.len());
        if let Some(dup) = nodes.iter().find(|n| !seen.insert(**n)) {
            return Err(Error::invalid(format!("duplicate node {dup:?} requested")));
        }
    }
    nodes
        .iter()
        .map(|&idx| {
            if (0..3).any(|a| idx[a] >= kgrid.dims[a]) {
                return Err(Error::invalid(format!("node {idx:?} outside grid {:?}", kgrid.dims)));
            }
            node_descriptor(kgrid.node(idx), mode, phi_on_axis)
                .map_err(|e| Error::Infeasible(format!("node {idx:?}: {e}")))
        })
        .collect::<Result<Vec<_>>>()
        .map(Acquisition::new)
}

/// Inverts [`sample_location`] for one spatial frequency.
pub fn node_descriptor(q: Vec3, mode: Mode, phi_on_axis: f64) -> Result<MeasurementDescriptor> {
    let qn = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
    if !(qn > 0.0) || q[2] <= 0.0 {
        return Err(Error::Infeasible(format!(
            "q = {q:?} is not reachable by a monostatic look from above (needs q_z > 0)"
        )));
    }
    let rho = q[0].hypot(q[1]);
    let theta = rho.atan2(q[2]);
    let phi = if rho <= 1e-12 * qn { phi_on_axis } else { q[1].atan2(q[0]) };
    let freq = SPEED_OF_LIGHT * qn / (4.0 * std::f64::consts::PI);
    MeasurementDescriptor::new(theta, phi, freq, mode)
}
