//! Joint minimum-norm reconstruction of the xx, yy and xy maps.
//!
//! The fast path never forms `A`. Because `A A^H = T (W_xx² + W_yy² + W_xy²) T^H`
//! is diagonal when the samples hit distinct grid nodes, the minimum-norm
//! solution `A^H (A A^H)^{-1} S` reduces to, for each channel `k`:
//!
//! 1. weight each sample by `π_k = w_k / (w_xx² + w_yy² + w_xy²)`,
//! 2. regrid, zero-fill the unobserved cells and apply the inverse transform.
//!
//! The dense path solves the same problem with explicit matrices and serves
//! as the oracle.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::forward::{dense_matrix, ForwardOperator, Hologram, DEFAULT_DENSE_CAP};
use crate::geometry::Acquisition;
use crate::kgrid::{normalize, sample_location, splat_with, KGrid};
use crate::maps::{ThreeMaps, VoxelGrid};
use crate::polarimetry::Channel;

/// Condition-number ceiling for `A A^H` on the dense path.
pub const MAX_CONDITION: f64 = 1e12;

/// Wall-clock seconds spent in each stage of [`mnls_fast`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct StageTimings {
    pub setup_s: f64,
    pub weighting_regrid_s: f64,
    pub inverse_fft_s: f64,
    pub residual_s: f64,
    pub total_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionReport {
    pub maps: ThreeMaps,
    /// `‖S - A ŝ‖`
    pub residual_norm: f64,
    /// `‖S - A ŝ‖ / ‖S‖`, zero for an all-zero hologram.
    pub data_fit_relative: f64,
    /// Cells that received at least one sample.
    pub observed_cells: usize,
    pub timings: StageTimings,
}

/// Two-step fast MNLS: per-sample `π_k` weighting, then regridding and an
/// inverse 3-D FFT per channel. The residual is checked with the forward
/// operator.
pub fn mnls_fast(holo: &Hologram, kgrid: &KGrid) -> Result<ReconstructionReport> {
    let start = Instant::now();
    let op = ForwardOperator::new(holo.acquisition(), kgrid)?;
    let data = holo.values();
    let pis: Vec<[f64; 3]> = op
        .weights()
        .iter()
        .map(|w| {
            let n = w.norm_sqr();
            w.as_array().map(|x| x / n)
        })
        .collect();
    let mut timings = StageTimings {
        setup_s: start.elapsed().as_secs_f64(),
        ..Default::default()
    };

    let mut maps = ThreeMaps::zeros(*op.grid());
    let mut observed_cells = 0;
    for channel in Channel::ALL {
        let t = Instant::now();
        let k = channel.index();
        let mut gridded = splat_with(
            data.iter().zip(&pis).map(|(s, p)| s * p[k]),
            op.stencils(),
            kgrid.dims(),
        );
        normalize(&mut gridded);
        observed_cells = gridded.observed_cells();
        timings.weighting_regrid_s += t.elapsed().as_secs_f64();

        let t = Instant::now();
        let target = maps.map_mut(channel);
        target.copy_from_slice(&gridded.values);
        op.transform().spectrum_to_image(target);
        timings.inverse_fft_s += t.elapsed().as_secs_f64();
    }

    let t = Instant::now();
    let predicted = op.apply(&maps)?;
    let residual_norm = predicted
        .iter()
        .zip(data)
        .map(|(p, s)| (s - p).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let data_norm = data.iter().map(|s| s.norm_sqr()).sum::<f64>().sqrt();
    timings.residual_s = t.elapsed().as_secs_f64();
    timings.total_s = start.elapsed().as_secs_f64();

    Ok(ReconstructionReport {
        maps,
        residual_norm,
        data_fit_relative: if data_norm > 0.0 { residual_norm / data_norm } else { 0.0 },
        observed_cells,
        timings,
    })
}

fn hermitian_eigen_extremes(m: &DMatrix<Complex64>) -> (f64, f64) {
    let eig = m.clone().symmetric_eigenvalues();
    let max = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.iter().copied().fold(f64::INFINITY, f64::min);
    (min, max)
}

/// Pairs of measurements whose sample locations coincide to 1e-9 relative.
fn coincident_samples(acq: &Acquisition) -> Vec<(usize, usize)> {
    let qs: Vec<_> = acq.iter().map(sample_location).collect();
    let mut out = Vec::new();
    for i in 0..qs.len() {
        let scale = crate::geometry::norm(&qs[i]);
        for j in i + 1..qs.len() {
            if (0..3).all(|a| (qs[i][a] - qs[j][a]).abs() <= 1e-9 * scale) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Dense MNLS `A^H (A A^H)^{-1} S` on an explicit voxel grid.
pub fn mnls_dense(holo: &Hologram, grid: &VoxelGrid) -> Result<ThreeMaps> {
    mnls_dense_with_cap(holo, grid, DEFAULT_DENSE_CAP)
}

pub fn mnls_dense_with_cap(holo: &Hologram, grid: &VoxelGrid, cap: usize) -> Result<ThreeMaps> {
    let a = dense_matrix(holo.acquisition(), grid, cap)?;
    if holo.is_empty() {
        return Ok(ThreeMaps::zeros(*grid));
    }
    let gram = &a * a.adjoint();
    let (min, max) = hermitian_eigen_extremes(&gram);
    let condition = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(condition <= MAX_CONDITION) {
        return Err(Error::Conditioning {
            condition,
            duplicates: coincident_samples(holo.acquisition()),
        });
    }
    let chol = gram.cholesky().ok_or(Error::Conditioning {
        condition,
        duplicates: coincident_samples(holo.acquisition()),
    })?;
    let s = DVector::from_column_slice(holo.values());
    let u = chol.solve(&s);
    let x = a.adjoint() * u;
    ThreeMaps::from_stacked(*grid, x.as_slice())
}

/// Minimizes `x^H Q x` subject to `A x = c`:
/// `x = Q^{-1} A^H (A Q^{-1} A^H)^{-1} c`.
///
/// `Q` must be Hermitian positive-definite and `A` of full row rank.
pub fn constrained_min_norm(
    q: &DMatrix<Complex64>,
    a: &DMatrix<Complex64>,
    c: &DVector<Complex64>,
) -> Result<DVector<Complex64>> {
    let (p, n) = a.shape();
    if q.shape() != (n, n) {
        return Err(Error::invalid(format!("Q is {:?}, expected {n}x{n}", q.shape())));
    }
    if c.len() != p {
        return Err(Error::invalid(format!("c has {} entries, A has {p} rows", c.len())));
    }
    if p > n {
        return Err(Error::invalid(format!("{p} constraints exceed {n} unknowns")));
    }
    let q_scale = q.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if (q - q.adjoint()).iter().any(|v| v.norm() > 1e-12 * q_scale) {
        return Err(Error::invalid("Q is not Hermitian"));
    }
    let (q_min, q_max) = hermitian_eigen_extremes(q);
    if !(q_min > 1e-14 * q_max) {
        return Err(Error::invalid("Q is not positive-definite"));
    }
    let q_chol = q.clone().cholesky().ok_or_else(|| Error::invalid("Q is not positive-definite"))?;
    let qinv_ah = q_chol.solve(&a.adjoint());
    let gram = a * &qinv_ah;
    let (g_min, g_max) = hermitian_eigen_extremes(&gram);
    if !(g_min > 1e-13 * g_max) {
        return Err(Error::invalid("A is rank-deficient"));
    }
    let g_chol = gram.cholesky().ok_or_else(|| Error::invalid("A is rank-deficient"))?;
    Ok(qinv_ah * g_chol.solve(c))
}

/// Diagonal of `A A^H`, `w_xx² + w_yy² + w_xy²` per measurement. Valid only
/// when every sample sits on its own grid node.
pub fn aadagger_diagonal(acq: &Acquisition, kgrid: &KGrid) -> Result<Vec<f64>> {
    let on_nodes = kgrid.with_interp(crate::kgrid::Interp::Nearest);
    let stencils = on_nodes.stencils(acq)?;
    let mut owner = std::collections::HashMap::with_capacity(acq.len());
    let dk = kgrid.delta_k();
    for (i, (d, s)) in acq.iter().zip(&stencils).enumerate() {
        let cell = s.cells()[0].0;
        let idx = [
            cell % kgrid.dims()[0],
            (cell / kgrid.dims()[0]) % kgrid.dims()[1],
            cell / (kgrid.dims()[0] * kgrid.dims()[1]),
        ];
        let q = sample_location(d);
        let node = kgrid.node(idx);
        if (0..3).any(|a| (q[a] - node[a]).abs() > 1e-6 * dk[a]) {
            return Err(Error::IdentityViolated(format!("measurement #{i} is not on a grid node")));
        }
        if let Some(j) = owner.insert(cell, i) {
            return Err(Error::IdentityViolated(format!(
                "measurements #{j} and #{i} share grid node {idx:?}"
            )));
        }
    }
    crate::forward::acquisition_weights(acq).map(|ws| ws.iter().map(|w| w.norm_sqr()).collect())
}

/// Least-squares criterion `‖S - A s‖²`.
pub fn ls_residual(maps: &ThreeMaps, holo: &Hologram, kgrid: &KGrid) -> Result<f64> {
    let predicted = crate::forward::apply_forward(maps, holo.acquisition(), kgrid)?;
    Ok(predicted
        .iter()
        .zip(holo.values())
        .map(|(p, s)| (s - p).norm_sqr())
        .sum())
}
