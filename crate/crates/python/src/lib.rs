//! Python bindings: acquisitions, scenes, k-grids, hologram simulation,
//! the forward/adjoint operators and fast MNLS reconstruction.
//!
//! Angles cross the boundary in degrees, frequencies in Hz, positions in
//! meters. Complex arrays are flat lists of `complex` in x-fastest order.

use std::path::PathBuf;

use num_complex::Complex64;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

use polarsar3d::geometry::{self, MeasurementDescriptor, Mode, SweepSpec};
use polarsar3d::kgrid::Interp;
use polarsar3d::polarimetry::{self, Channel, ScatteringMatrix};
use polarsar3d::{forward, inversion, io, maps};

fn to_py(e: polarsar3d::Error) -> PyErr {
    match e {
        polarsar3d::Error::Io { .. } => PyIOError::new_err(e.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = polarsar3d::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(to_py)
}

#[pyclass(name = "Acquisition", module = "polarsar3d", from_py_object)]
#[derive(Clone)]
struct PyAcquisition {
    inner: geometry::Acquisition,
}

#[pymethods]
impl PyAcquisition {
    /// Explicit descriptor lists; `modes` is one mode string or one per descriptor.
    #[new]
    fn new(theta_deg: Vec<f64>, phi_deg: Vec<f64>, freq_hz: Vec<f64>, modes: Bound<'_, PyAny>) -> PyResult<Self> {
        let m = theta_deg.len();
        if phi_deg.len() != m || freq_hz.len() != m {
            return Err(PyValueError::new_err("theta_deg, phi_deg and freq_hz differ in length"));
        }
        let modes: Vec<Mode> = if let Ok(single) = modes.extract::<String>() {
            vec![parse(&single)?; m]
        } else {
            let list: Vec<String> = modes.extract()?;
            if list.len() != m {
                return Err(PyValueError::new_err(format!("{} modes for {m} descriptors", list.len())));
            }
            list.iter().map(|s| parse(s)).collect::<PyResult<_>>()?
        };
        let descriptors = (0..m)
            .map(|i| MeasurementDescriptor::from_degrees(theta_deg[i], phi_deg[i], freq_hz[i], modes[i]))
            .collect::<polarsar3d::Result<Vec<_>>>()
            .map_err(to_py)?;
        Ok(Self {
            inner: geometry::Acquisition::new(descriptors),
        })
    }

    /// Expands `start:step:stop` sweeps (degrees, degrees, Hz); frequency varies fastest.
    #[staticmethod]
    fn from_sweep(theta_deg: &str, phi_deg: &str, freq_hz: &str, mode: &str) -> PyResult<Self> {
        let acq = geometry::expand_sweep(
            &parse::<SweepSpec>(theta_deg)?,
            &parse::<SweepSpec>(phi_deg)?,
            &parse::<SweepSpec>(freq_hz)?,
            parse(mode)?,
        )
        .map_err(to_py)?;
        Ok(Self { inner: acq })
    }

    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        io::read_acquisition(path).map(|inner| Self { inner }).map_err(to_py)
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        io::write_acquisition(path, &self.inner).map_err(to_py)
    }

    /// Concatenation, preserving order.
    fn __add__(&self, other: &PyAcquisition) -> Self {
        Self {
            inner: geometry::Acquisition::concat([&self.inner, &other.inner]),
        }
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn theta_deg(&self) -> Vec<f64> {
        self.inner.iter().map(|d| d.theta().to_degrees()).collect()
    }

    #[getter]
    fn phi_deg(&self) -> Vec<f64> {
        self.inner.iter().map(|d| d.phi().to_degrees()).collect()
    }

    #[getter]
    fn freq_hz(&self) -> Vec<f64> {
        self.inner.iter().map(|d| d.freq()).collect()
    }

    #[getter]
    fn modes(&self) -> Vec<&'static str> {
        self.inner.iter().map(|d| d.mode().as_str()).collect()
    }

    fn __repr__(&self) -> String {
        format!("Acquisition(M={})", self.inner.len())
    }
}

#[pyclass(name = "Scene", module = "polarsar3d", from_py_object)]
#[derive(Clone, Default)]
struct PyScene {
    inner: forward::Scene,
}

#[pymethods]
impl PyScene {
    #[new]
    fn new() -> Self {
        Self::default()
    }

    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        io::read_scene(path).map(|inner| Self { inner }).map_err(to_py)
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        io::write_scene(path, &self.inner).map_err(to_py)
    }

    /// Adds a point scatterer at `pos_m` with scattering coefficients `sxx`, `syy`, `sxy`.
    #[pyo3(signature = (pos_m, sxx, syy = Complex64::new(0.0, 0.0), sxy = Complex64::new(0.0, 0.0)))]
    fn add(&mut self, pos_m: [f64; 3], sxx: Complex64, syy: Complex64, sxy: Complex64) -> PyResult<()> {
        let s = ScatteringMatrix::new(sxx, syy, sxy);
        if !(s.is_finite() && pos_m.iter().all(|p| p.is_finite())) {
            return Err(PyValueError::new_err("scatterer must be finite"));
        }
        self.inner.push(pos_m, s);
        Ok(())
    }

    fn __len__(&self) -> usize {
        self.inner.scatterers.len()
    }
}

#[pyclass(name = "KGrid", module = "polarsar3d", from_py_object)]
#[derive(Clone)]
struct PyKGrid {
    inner: polarsar3d::KGrid,
}

#[pymethods]
impl PyKGrid {
    /// `delta_k` and `center` in rad/m; `interp` is "nearest" or "linear".
    #[new]
    #[pyo3(signature = (dims, delta_k, center, interp = "nearest"))]
    fn new(dims: [usize; 3], delta_k: [f64; 3], center: [f64; 3], interp: &str) -> PyResult<Self> {
        polarsar3d::KGrid::new(dims, delta_k, center, parse::<Interp>(interp)?)
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    /// Grid covering every sample of `acq` with a field of view of `extent_m` meters.
    #[staticmethod]
    #[pyo3(signature = (acq, extent_m, interp = "nearest"))]
    fn suggest(acq: &PyAcquisition, extent_m: [f64; 3], interp: &str) -> PyResult<Self> {
        let g = polarsar3d::kgrid::suggest_grid(&acq.inner, extent_m).map_err(to_py)?;
        Ok(Self {
            inner: g.with_interp(parse(interp)?),
        })
    }

    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        io::read_grid(path).map(|inner| Self { inner }).map_err(to_py)
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        io::write_grid(path, &self.inner).map_err(to_py)
    }

    #[getter]
    fn dims(&self) -> [usize; 3] {
        self.inner.dims()
    }

    #[getter]
    fn delta_k(&self) -> [f64; 3] {
        self.inner.delta_k()
    }

    #[getter]
    fn center(&self) -> [f64; 3] {
        self.inner.center()
    }

    #[getter]
    fn voxel_pitch_m(&self) -> [f64; 3] {
        self.inner.image_grid().pitch
    }

    #[getter]
    fn origin_m(&self) -> [f64; 3] {
        self.inner.image_grid().origin
    }

    /// Voxel index nearest to a position in meters, or None outside the volume.
    fn nearest_voxel(&self, pos_m: [f64; 3]) -> Option<[usize; 3]> {
        self.inner.image_grid().nearest_voxel(&pos_m)
    }

    fn __repr__(&self) -> String {
        format!(
            "KGrid(dims={:?}, delta_k={:?}, center={:?}, interp={})",
            self.inner.dims(),
            self.inner.delta_k(),
            self.inner.center(),
            self.inner.interp()
        )
    }
}

#[pyclass(name = "Hologram", module = "polarsar3d", from_py_object)]
#[derive(Clone)]
struct PyHologram {
    inner: forward::Hologram,
}

#[pymethods]
impl PyHologram {
    #[new]
    fn new(values: Vec<Complex64>, acq: &PyAcquisition) -> PyResult<Self> {
        forward::Hologram::new(values, acq.inner.clone())
            .map(|inner| Self { inner })
            .map_err(to_py)
    }

    #[staticmethod]
    fn read(path: PathBuf) -> PyResult<Self> {
        io::read_hologram(path).map(|inner| Self { inner }).map_err(to_py)
    }

    fn write(&self, path: PathBuf) -> PyResult<()> {
        io::write_hologram(path, &self.inner).map_err(to_py)
    }

    #[getter]
    fn values(&self) -> Vec<Complex64> {
        self.inner.values().to_vec()
    }

    #[getter]
    fn acquisition(&self) -> PyAcquisition {
        PyAcquisition {
            inner: self.inner.acquisition().clone(),
        }
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }
}

#[pyclass(name = "Reconstruction", module = "polarsar3d", frozen)]
struct PyReconstruction {
    report: inversion::ReconstructionReport,
}

#[pymethods]
impl PyReconstruction {
    /// Flat x-fastest values of one map ("xx", "yy" or "xy").
    fn map(&self, channel: &str) -> PyResult<Vec<Complex64>> {
        Ok(self.report.maps.map(parse::<Channel>(channel)?).to_vec())
    }

    /// `(voxel index, magnitude)` of the largest value in a map.
    fn peak(&self, channel: &str) -> PyResult<([usize; 3], f64)> {
        Ok(self.report.maps.peak(parse::<Channel>(channel)?))
    }

    #[getter]
    fn dims(&self) -> [usize; 3] {
        self.report.maps.grid().dims
    }

    #[getter]
    fn residual_norm(&self) -> f64 {
        self.report.residual_norm
    }

    #[getter]
    fn data_fit_relative(&self) -> f64 {
        self.report.data_fit_relative
    }

    #[getter]
    fn observed_cells(&self) -> usize {
        self.report.observed_cells
    }

    #[getter]
    fn total_seconds(&self) -> f64 {
        self.report.timings.total_s
    }

    /// Writes `xx.p3dvol`, `yy.p3dvol` and `xy.p3dvol` into `directory`.
    fn write_volumes(&self, directory: PathBuf) -> PyResult<Vec<PathBuf>> {
        std::fs::create_dir_all(&directory).map_err(|e| PyIOError::new_err(e.to_string()))?;
        Channel::ALL
            .iter()
            .map(|&ch| {
                let path = directory.join(format!("{}.p3dvol", ch.as_str()));
                io::write_volume(&path, self.report.maps.map(ch), self.report.maps.grid(), ch)
                    .map(|_| path)
                    .map_err(to_py)
            })
            .collect()
    }
}

/// Noise-free (or seeded noisy) polarimetric hologram of a scene.
#[pyfunction]
#[pyo3(signature = (scene, acq, noise_sigma = 0.0, seed = 0))]
fn simulate(py: Python<'_>, scene: &PyScene, acq: &PyAcquisition, noise_sigma: f64, seed: u64) -> PyResult<PyHologram> {
    let (scene, acq) = (&scene.inner, &acq.inner);
    py.detach(|| forward::simulate_hologram(scene, acq, noise_sigma, seed))
        .map(|inner| PyHologram { inner })
        .map_err(to_py)
}

/// Fast joint minimum-norm reconstruction of the xx, yy and xy maps.
#[pyfunction]
fn mnls_fast(py: Python<'_>, holo: &PyHologram, kgrid: &PyKGrid) -> PyResult<PyReconstruction> {
    let (holo, kgrid) = (&holo.inner, &kgrid.inner);
    py.detach(|| inversion::mnls_fast(holo, kgrid))
        .map(|report| PyReconstruction { report })
        .map_err(to_py)
}

/// `A s` for flat xx, yy, xy maps on the grid's conjugate voxel grid.
#[pyfunction]
fn apply_forward(
    xx: Vec<Complex64>,
    yy: Vec<Complex64>,
    xy: Vec<Complex64>,
    acq: &PyAcquisition,
    kgrid: &PyKGrid,
) -> PyResult<Vec<Complex64>> {
    let maps = maps::ThreeMaps::from_maps(kgrid.inner.image_grid(), xx, yy, xy).map_err(to_py)?;
    forward::apply_forward(&maps, &acq.inner, &kgrid.inner).map_err(to_py)
}

/// `A^H y` as a tuple of flat xx, yy, xy maps.
#[pyfunction]
fn apply_adjoint(
    values: Vec<Complex64>,
    acq: &PyAcquisition,
    kgrid: &PyKGrid,
) -> PyResult<(Vec<Complex64>, Vec<Complex64>, Vec<Complex64>)> {
    let [xx, yy, xy] = forward::apply_adjoint(&values, &acq.inner, &kgrid.inner)
        .map_err(to_py)?
        .into_maps();
    Ok((xx, yy, xy))
}

/// Closed-form mode weights `(w_xx, w_yy, w_xy)` at `(theta, phi)` in degrees.
#[pyfunction]
fn weights(theta_deg: f64, phi_deg: f64, mode: &str) -> PyResult<(f64, f64, f64)> {
    let w = polarimetry::closed_form_weights(theta_deg.to_radians(), phi_deg.to_radians(), parse(mode)?)
        .map_err(to_py)?;
    Ok((w.w_xx, w.w_yy, w.w_xy))
}

/// Per-channel inversion weights `w_k / (w_xx² + w_yy² + w_xy²)`.
#[pyfunction]
fn inversion_weights(theta_deg: f64, phi_deg: f64, mode: &str) -> PyResult<(f64, f64, f64)> {
    let w = polarimetry::inversion_weights(theta_deg.to_radians(), phi_deg.to_radians(), parse(mode)?)
        .map_err(to_py)?;
    Ok((w.w_xx, w.w_yy, w.w_xy))
}

#[pymodule(name = "polarsar3d")]
fn polarsar3d_python(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyAcquisition>()?;
    m.add_class::<PyScene>()?;
    m.add_class::<PyKGrid>()?;
    m.add_class::<PyHologram>()?;
    m.add_class::<PyReconstruction>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(mnls_fast, m)?)?;
    m.add_function(wrap_pyfunction!(apply_forward, m)?)?;
    m.add_function(wrap_pyfunction!(apply_adjoint, m)?)?;
    m.add_function(wrap_pyfunction!(weights, m)?)?;
    m.add_function(wrap_pyfunction!(inversion_weights, m)?)?;
    Ok(())
}
