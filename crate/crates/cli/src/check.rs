//! Self-tests over randomized instances: weight cross-derivation, adjoint
//! identity and the dense oracle.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use polarsar3d::forward::{apply_adjoint, apply_forward};
use polarsar3d::geometry::{Acquisition, Mode};
use polarsar3d::inversion::{mnls_dense, mnls_fast};
use polarsar3d::kgrid::{on_grid_acquisition, Interp, KGrid};
use polarsar3d::maps::ThreeMaps;
use polarsar3d::polarimetry::{closed_form_weights, projection_weights};
use polarsar3d::{Hologram, Result};

pub struct Summary {
    pub label: &'static str,
    pub trials: usize,
    pub worst: f64,
    pub threshold: f64,
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.worst < self.threshold
    }
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

fn random_instance(rng: &mut ChaCha8Rng, dims: [usize; 3], m: usize) -> Result<(KGrid, Acquisition)> {
    let delta_k = [0; 3].map(|_| rng.random_range(1.0..4.0));
    let center = [rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0), rng.random_range(100.0..400.0)];
    let kgrid = KGrid::new(dims, delta_k, center, Interp::Nearest)?;
    let n = kgrid.len();
    let phi0 = rng.random_range(0.0..2.0 * PI);
    let mut descriptors = Vec::with_capacity(m);
    for i in sample(rng, n, m.min(n)) {
        let idx = [i % dims[0], (i / dims[0]) % dims[1], i / (dims[0] * dims[1])];
        let mode = Mode::ALL[rng.random_range(0..3)];
        descriptors.push(on_grid_acquisition(&kgrid, &[idx], mode, phi0, false)?.descriptors()[0]);
    }
    Ok((kgrid, Acquisition::new(descriptors)))
}

/// Closed-form weights against the Jones-projection composition on
/// `trials` random looks per mode.
pub fn weights(seed: u64, trials: usize) -> Result<Summary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for mode in Mode::ALL {
        for _ in 0..trials {
            let theta = rng.random_range(0.0..=80.0f64).to_radians();
            let phi = rng.random_range(0.0..360.0f64).to_radians();
            let a = closed_form_weights(theta, phi, mode)?.as_array();
            let b = projection_weights(theta, phi, mode)?.as_array();
            for k in 0..3 {
                worst = worst.max((a[k] - b[k]).abs());
            }
        }
    }
    Ok(Summary {
        label: "max |closed form - projection|",
        trials: 3 * trials,
        worst,
        threshold: 1e-12,
    })
}

/// Relative defect of `<Ax, y> - <x, A^H y>` on random on-grid instances.
pub fn adjoint(seed: u64, trials: usize) -> Result<Summary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let dims = [0; 3].map(|_| rng.random_range(2..=8));
        let m = rng.random_range(1..=128);
        let (kgrid, acq) = random_instance(&mut rng, dims, m)?;
        let grid = kgrid.image_grid();
        let n = grid.len();
        let x = ThreeMaps::from_maps(grid, random_vec(&mut rng, n), random_vec(&mut rng, n), random_vec(&mut rng, n))?;
        let y = random_vec(&mut rng, acq.len());
        let ax = apply_forward(&x, &acq, &kgrid)?;
        let aty = apply_adjoint(&y, &acq, &kgrid)?;
        let lhs: Complex64 = ax.iter().zip(&y).map(|(a, b)| a * b.conj()).sum();
        let rhs: Complex64 = x
            .to_stacked()
            .iter()
            .zip(aty.to_stacked())
            .map(|(a, b)| a * b.conj())
            .sum();
        worst = worst.max((lhs - rhs).norm() / lhs.norm().max(rhs.norm()));
    }
    Ok(Summary {
        label: "max relative adjoint defect",
        trials,
        worst,
        threshold: 1e-10,
    })
}

/// Fast MNLS against the dense solution on 6x6x6 grids with 96 measurements.
pub fn oracle(seed: u64, trials: usize) -> Result<Summary> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let (kgrid, acq) = random_instance(&mut rng, [6, 6, 6], 96)?;
        let holo = Hologram::new(random_vec(&mut rng, acq.len()), acq)?;
        let fast = mnls_fast(&holo, &kgrid)?;
        let dense = mnls_dense(&holo, &kgrid.image_grid())?;
        let xf = fast.maps.to_stacked();
        let xd = dense.to_stacked();
        let err = xf.iter().zip(&xd).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let scale = xd.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(err / scale).max(fast.data_fit_relative);
    }
    Ok(Summary {
        label: "max relative map error / data misfit (fast vs dense)",
        trials,
        worst,
        threshold: 1e-8,
    })
}
