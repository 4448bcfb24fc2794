//! Unitary 3-D transform between the voxel grid and the k-space grid.
//!
//! With image voxels at `r(n) = (n - h) * pitch` and k-space nodes at
//! `q(m) = center + (m - h) * delta_k` (`h = dims / 2`, `pitch = 2π / (dims * delta_k)`),
//! the transform is
//!
//! ```text
//! spectrum[m] = N^{-1/2} Σ_n image[n] exp(j q(m)·r(n))
//! ```
//!
//! which factors into separable phase modulations around one unnormalized
//! FFT. Both directions are exact inverses and adjoints of each other.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};

use crate::geometry::Vec3;

/// Unnormalized 3-D FFT on x-fastest buffers.
pub struct Fft3 {
    dims: [usize; 3],
    forward: [Arc<dyn Fft<f64>>; 3],
    inverse: [Arc<dyn Fft<f64>>; 3],
}

impl Fft3 {
    pub fn new(dims: [usize; 3]) -> Self {
        let mut planner = FftPlanner::new();
        let forward = dims.map(|n| planner.plan_fft(n, FftDirection::Forward));
        let inverse = dims.map(|n| planner.plan_fft(n, FftDirection::Inverse));
        Self {
            dims,
            forward,
            inverse,
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    /// `Σ_n x[n] exp(-2πj m·n / N)` in place.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.process(data, &self.forward);
    }

    /// `Σ_m x[m] exp(+2πj m·n / N)` in place (no 1/N scaling).
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.process(data, &self.inverse);
    }

    fn process(&self, data: &mut [Complex64], plans: &[Arc<dyn Fft<f64>>; 3]) {
        let [nx, ny, nz] = self.dims;
        assert_eq!(data.len(), nx * ny * nz, "buffer does not match FFT dims");

        data.par_chunks_mut(nx).for_each_init(
            || vec![Complex64::default(); plans[0].get_inplace_scratch_len()],
            |scratch, row| plans[0].process_with_scratch(row, scratch),
        );

        if ny > 1 {
            data.par_chunks_mut(nx * ny).for_each_init(
                || {
                    (
                        vec![Complex64::default(); ny],
                        vec![Complex64::default(); plans[1].get_inplace_scratch_len()],
                    )
                },
                |(line, scratch), slab| {
                    for x in 0..nx {
                        for (y, v) in line.iter_mut().enumerate() {
                            *v = slab[x + nx * y];
                        }
                        plans[1].process_with_scratch(line, scratch);
                        for (y, v) in line.iter().enumerate() {
                            slab[x + nx * y] = *v;
                        }
                    }
                },
            );
        }

        if nz > 1 {
            let plane = nx * ny;
            // z-major copy so every z-line is contiguous
            let mut columns = vec![Complex64::default(); data.len()];
            columns
                .par_chunks_mut(nz)
                .enumerate()
                .for_each_init(
                    || vec![Complex64::default(); plans[2].get_inplace_scratch_len()],
                    |scratch, (p, line)| {
                        for (z, v) in line.iter_mut().enumerate() {
                            *v = data[p + plane * z];
                        }
                        plans[2].process_with_scratch(line, scratch);
                    },
                );
            data.par_chunks_mut(plane).enumerate().for_each(|(z, slab)| {
                for (p, v) in slab.iter_mut().enumerate() {
                    *v = columns[p * nz + z];
                }
            });
        }
    }
}

/// `exp(2πj * num / den)` with the argument reduced exactly in integers.
fn root_of_unity(num: i64, den: usize) -> Complex64 {
    let r = num.rem_euclid(den as i64) as f64 / den as f64;
    Complex64::from_polar(1.0, 2.0 * PI * r)
}

/// Unitary image <-> spectrum transform for a k-space grid.
pub struct SpectralTransform {
    fft: Fft3,
    /// Per-axis image-side modulation; the full factor is the product over axes.
    image_phase: [Vec<Complex64>; 3],
    /// Per-axis spectrum-side modulation, without the N^{-1/2} scale.
    spectrum_phase: [Vec<Complex64>; 3],
    scale: f64,
}

impl SpectralTransform {
    pub fn new(dims: [usize; 3], delta_k: Vec3, center: Vec3) -> Self {
        let image_phase = std::array::from_fn(|a| {
            let n = dims[a];
            let h = (n / 2) as i64;
            let pitch = 2.0 * PI / (n as f64 * delta_k[a]);
            (0..n as i64)
                .map(|i| {
                    let r = (i - h) as f64 * pitch;
                    Complex64::from_polar(1.0, center[a] * r) * root_of_unity(-h * i, n)
                })
                .collect()
        });
        let spectrum_phase = std::array::from_fn(|a| {
            let n = dims[a];
            let h = (n / 2) as i64;
            (0..n as i64).map(|m| root_of_unity(-h * (m - h), n)).collect()
        });
        let total: usize = dims.iter().product();
        Self {
            fft: Fft3::new(dims),
            image_phase,
            spectrum_phase,
            scale: 1.0 / (total as f64).sqrt(),
        }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.fft.dims()
    }

    fn modulate(data: &mut [Complex64], tables: &[Vec<Complex64>; 3], scale: f64, conjugate: bool) {
        let nx = tables[0].len();
        let ny = tables[1].len();
        data.par_chunks_mut(nx * ny).enumerate().for_each(|(z, slab)| {
            let fz = tables[2][z] * scale;
            for (y, row) in slab.chunks_mut(nx).enumerate() {
                let fyz = tables[1][y] * fz;
                for (x, v) in row.iter_mut().enumerate() {
                    let f = tables[0][x] * fyz;
                    *v *= if conjugate { f.conj() } else { f };
                }
            }
        });
    }

    /// Image (one channel map) to its k-space spectrum, in place.
    pub fn image_to_spectrum(&self, data: &mut [Complex64]) {
        Self::modulate(data, &self.image_phase, 1.0, false);
        self.fft.inverse(data);
        Self::modulate(data, &self.spectrum_phase, self.scale, false);
    }

    /// Spectrum back to the image; the adjoint and inverse of [`Self::image_to_spectrum`].
    pub fn spectrum_to_image(&self, data: &mut [Complex64]) {
        Self::modulate(data, &self.spectrum_phase, self.scale, true);
        self.fft.forward(data);
        Self::modulate(data, &self.image_phase, 1.0, true);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_volume(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    }

    /// Direct O(N²) evaluation of the transform.
    fn brute_force(dims: [usize; 3], delta_k: Vec3, center: Vec3, image: &[Complex64]) -> Vec<Complex64> {
        let n: usize = dims.iter().product();
        let h = dims.map(|d| (d / 2) as f64);
        let pitch: Vec<f64> = (0..3).map(|a| 2.0 * PI / (dims[a] as f64 * delta_k[a])).collect();
        let coords = |i: usize| [i % dims[0], (i / dims[0]) % dims[1], i / (dims[0] * dims[1])];
        (0..n)
            .map(|m| {
                let mi = coords(m);
                let q: Vec<f64> = (0..3).map(|a| center[a] + (mi[a] as f64 - h[a]) * delta_k[a]).collect();
                let mut acc = Complex64::default();
                for (idx, v) in image.iter().enumerate() {
                    let ni = coords(idx);
                    let phase: f64 = (0..3).map(|a| q[a] * (ni[a] as f64 - h[a]) * pitch[a]).sum();
                    acc += v * Complex64::from_polar(1.0, phase);
                }
                acc / (n as f64).sqrt()
            })
            .collect()
    }

    #[test]
    fn matches_direct_sum_on_odd_and_even_dims() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for dims in [[4, 3, 5], [2, 2, 2], [6, 1, 4]] {
            let delta_k = [3.0, 1.5, 2.5];
            let center = [0.7, -12.0, 400.0];
            let n: usize = dims.iter().product();
            let image = random_volume(&mut rng, n);
            let expected = brute_force(dims, delta_k, center, &image);
            let t = SpectralTransform::new(dims, delta_k, center);
            let mut got = image.clone();
            t.image_to_spectrum(&mut got);
            let scale = expected.iter().map(|v| v.norm()).fold(0.0, f64::max);
            for (a, b) in got.iter().zip(&expected) {
                assert!((a - b).norm() < 1e-11 * scale, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn round_trip_and_unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let dims = [8, 6, 10];
        let t = SpectralTransform::new(dims, [2.0, 3.0, 0.5], [1.0, 2.0, 300.0]);
        let image = random_volume(&mut rng, 480);
        let mut data = image.clone();
        t.image_to_spectrum(&mut data);
        let e0: f64 = image.iter().map(|v| v.norm_sqr()).sum();
        let e1: f64 = data.iter().map(|v| v.norm_sqr()).sum();
        assert!((e0 - e1).abs() < 1e-12 * e0);
        t.spectrum_to_image(&mut data);
        for (a, b) in data.iter().zip(&image) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn centered_impulse_has_flat_spectrum() {
        let dims = [8, 8, 8];
        let t = SpectralTransform::new(dims, [1.0; 3], [0.0, 0.0, 50.0]);
        let mut data = vec![Complex64::default(); 512];
        data[4 + 8 * (4 + 8 * 4)] = Complex64::new(1.0, 0.0);
        t.image_to_spectrum(&mut data);
        let flat = 1.0 / 512f64.sqrt();
        for v in &data {
            assert!((v.norm() - flat).abs() < 1e-12);
        }
    }
}
