//! Image-domain voxel grids and the three co-registered channel maps.
//!
//! Volumes are stored flat with x fastest, then y, then z. Stacked
//! vectors over the three maps use block order xx, yy, xy.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::polarimetry::Channel;

/// Voxel-center lattice `r(n) = origin + n * pitch`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoxelGrid {
    pub dims: [usize; 3],
    pub pitch: Vec3,
    pub origin: Vec3,
}

impl VoxelGrid {
    pub fn new(dims: [usize; 3], pitch: Vec3, origin: Vec3) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::invalid(format!("voxel grid dims must be positive, got {dims:?}")));
        }
        if pitch.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
            return Err(Error::invalid(format!("voxel pitch must be positive, got {pitch:?}")));
        }
        if origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::invalid("voxel origin must be finite"));
        }
        Ok(Self {
            dims,
            pitch,
            origin,
        })
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn linear_index(&self, idx: [usize; 3]) -> usize {
        idx[0] + self.dims[0] * (idx[1] + self.dims[1] * idx[2])
    }

    #[inline]
    pub fn unravel(&self, n: usize) -> [usize; 3] {
        let x = n % self.dims[0];
        let rest = n / self.dims[0];
        [x, rest % self.dims[1], rest / self.dims[1]]
    }

    pub fn position(&self, idx: [usize; 3]) -> Vec3 {
        [
            self.origin[0] + idx[0] as f64 * self.pitch[0],
            self.origin[1] + idx[1] as f64 * self.pitch[1],
            self.origin[2] + idx[2] as f64 * self.pitch[2],
        ]
    }

    /// Index of the voxel whose center is nearest to `pos`, if inside the grid.
    pub fn nearest_voxel(&self, pos: &Vec3) -> Option<[usize; 3]> {
        let mut idx = [0usize; 3];
        for a in 0..3 {
            let t = ((pos[a] - self.origin[a]) / self.pitch[a]).round();
            if t < 0.0 || t >= self.dims[a] as f64 {
                return None;
            }
            idx[a] = t as usize;
        }
        Some(idx)
    }

    /// Same lattice to within `rel_tol` relative on pitch and origin.
    pub fn approx_eq(&self, other: &VoxelGrid, rel_tol: f64) -> bool {
        self.dims == other.dims
            && (0..3).all(|a| {
                let scale = self.pitch[a];
                (self.pitch[a] - other.pitch[a]).abs() <= rel_tol * scale
                    && (self.origin[a] - other.origin[a]).abs() <= rel_tol * scale
            })
    }
}

/// The xx, yy and xy backscatter maps on a shared voxel grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ThreeMaps {
    grid: VoxelGrid,
    maps: [Vec<Complex64>; 3],
}

impl ThreeMaps {
    pub fn zeros(grid: VoxelGrid) -> Self {
        let n = grid.len();
        Self {
            grid,
            maps: std::array::from_fn(|_| vec![Complex64::new(0.0, 0.0); n]),
        }
    }

    pub fn from_maps(grid: VoxelGrid, xx: Vec<Complex64>, yy: Vec<Complex64>, xy: Vec<Complex64>) -> Result<Self> {
        let n = grid.len();
        for (label, m) in [("xx", &xx), ("yy", &yy), ("xy", &xy)] {
            if m.len() != n {
                return Err(Error::ShapeMismatch(format!(
                    "{label} map has {} voxels, grid {:?} has {n}",
                    m.len(),
                    grid.dims
                )));
            }
        }
        Ok(Self {
            grid,
            maps: [xx, yy, xy],
        })
    }

    /// Splits a stacked `[xx; yy; xy]` vector.
    pub fn from_stacked(grid: VoxelGrid, stacked: &[Complex64]) -> Result<Self> {
        let n = grid.len();
        if stacked.len() != 3 * n {
            return Err(Error::ShapeMismatch(format!(
                "stacked vector has {} entries, expected {}",
                stacked.len(),
                3 * n
            )));
        }
        Ok(Self {
            grid,
            maps: std::array::from_fn(|k| stacked[k * n..(k + 1) * n].to_vec()),
        })
    }

    pub fn to_stacked(&self) -> Vec<Complex64> {
        self.maps.iter().flatten().copied().collect()
    }

    pub fn grid(&self) -> &VoxelGrid {
        &self.grid
    }

    pub fn map(&self, channel: Channel) -> &[Complex64] {
        &self.maps[channel.index()]
    }

    pub fn map_mut(&mut self, channel: Channel) -> &mut [Complex64] {
        &mut self.maps[channel.index()]
    }

    pub fn into_maps(self) -> [Vec<Complex64>; 3] {
        self.maps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.maps.iter().flatten().map(|v| v.norm_sqr()).sum()
    }

    /// Voxel index and magnitude of the largest entry of one map.
    pub fn peak(&self, channel: Channel) -> ([usize; 3], f64) {
        let (n, mag) = self
            .map(channel)
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.norm()))
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        (self.grid.unravel(n), mag)
    }

    pub fn scale(&mut self, factor: Complex64) {
        for v in self.maps.iter_mut().flatten() {
            *v *= factor;
        }
    }
}
