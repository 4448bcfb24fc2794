//! Concentric acquisition geometry: wave vectors, antenna frames, Jones
//! projections and sweep expansion.
//!
//! A measurement is parametrized by the azimuth `theta`, the roll `phi`
//! (both radians) and the frequency. The wave direction is
//! `k = [-sin(theta) cos(phi), -sin(theta) sin(phi), -cos(theta)]`, so the
//! radar looks down the `-z` axis at zero angles.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polarimetry::kappa;

/// Speed of light in vacuum (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Descriptors with `K = cos²θ cos²φ + sin²φ` at or below this floor are rejected.
pub const KAPPA_MIN: f64 = 1e-6;

pub type Vec3 = [f64; 3];

#[inline]
pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Linear antenna polarization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AntennaPol {
    H,
    V,
}

/// Polarization acquisition mode (emission, reception).
///
/// `Hv` emits H and receives V. By monostatic reciprocity VH yields the same
/// weights, so there is no separate variant for it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "HH")]
    Hh,
    #[serde(rename = "VV")]
    Vv,
    #[serde(rename = "HV")]
    Hv,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Hh, Mode::Vv, Mode::Hv];

    pub fn emission(self) -> AntennaPol {
        match self {
            Mode::Hh | Mode::Hv => AntennaPol::H,
            Mode::Vv => AntennaPol::V,
        }
    }

    pub fn reception(self) -> AntennaPol {
        match self {
            Mode::Hh => AntennaPol::H,
            Mode::Vv | Mode::Hv => AntennaPol::V,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Hh => "HH",
            Mode::Vv => "VV",
            Mode::Hv => "HV",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "HH" => Ok(Mode::Hh),
            "VV" => Ok(Mode::Vv),
            "HV" | "VH" => Ok(Mode::Hv),
            other => Err(Error::invalid(format!(
                "unknown polarization mode {other:?} (expected HH, VV or HV)"
            ))),
        }
    }
}

/// One measurement `(theta, phi, freq, mode)`. Angles in radians, frequency in Hz.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementDescriptor {
    theta: f64,
    phi: f64,
    freq: f64,
    mode: Mode,
}

impl MeasurementDescriptor {
    pub fn new(theta: f64, phi: f64, freq: f64, mode: Mode) -> Result<Self> {
        if !(theta.is_finite() && phi.is_finite()) {
            return Err(Error::invalid("non-finite measurement angle"));
        }
        if !(freq.is_finite() && freq > 0.0) {
            return Err(Error::invalid(format!(
                "frequency must be positive, got {freq} Hz"
            )));
        }
        check_admissible(theta, phi)?;
        Ok(Self {
            theta,
            phi,
            freq,
            mode,
        })
    }

    /// Same as [`MeasurementDescriptor::new`] with angles in degrees.
    pub fn from_degrees(theta_deg: f64, phi_deg: f64, freq: f64, mode: Mode) -> Result<Self> {
        Self::new(theta_deg.to_radians(), phi_deg.to_radians(), freq, mode)
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn freq(&self) -> f64 {
        self.freq
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Unit wave direction and wavenumber (rad/m).
    pub fn wave_vector(&self) -> (Vec3, f64) {
        // freq > 0 is a construction invariant
        let k = 2.0 * std::f64::consts::PI * self.freq / SPEED_OF_LIGHT;
        (wave_direction(self.theta, self.phi), k)
    }
}

/// Ordered list of measurement descriptors. Order is preserved through
/// simulation and inversion: hologram sample `i` belongs to descriptor `i`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Acquisition {
    descriptors: Vec<MeasurementDescriptor>,
}

impl Acquisition {
    pub fn new(descriptors: Vec<MeasurementDescriptor>) -> Self {
        Self { descriptors }
    }

    pub fn descriptors(&self) -> &[MeasurementDescriptor] {
        &self.descriptors
    }

    pub fn len(&self) -> usize {
        self.descriptors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.descriptors.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MeasurementDescriptor> {
        self.descriptors.iter()
    }

    /// Concatenates acquisitions, keeping each one's internal order.
    pub fn concat<'a>(parts: impl IntoIterator<Item = &'a Acquisition>) -> Self {
        Self {
            descriptors: parts
                .into_iter()
                .flat_map(|a| a.descriptors.iter().copied())
                .collect(),
        }
    }

    /// The single mode shared by all descriptors, if any.
    pub fn uniform_mode(&self) -> Option<Mode> {
        let first = self.descriptors.first()?.mode;
        self.descriptors
            .iter()
            .all(|d| d.mode == first)
            .then_some(first)
    }
}

impl<'a> IntoIterator for &'a Acquisition {
    type Item = &'a MeasurementDescriptor;
    type IntoIter = std::slice::Iter<'a, MeasurementDescriptor>;

    fn into_iter(self) -> Self::IntoIter {
        self.descriptors.iter()
    }
}

impl FromIterator<MeasurementDescriptor> for Acquisition {
    fn from_iter<I: IntoIterator<Item = MeasurementDescriptor>>(iter: I) -> Self {
        Self::new(iter.into_iter().collect())
    }
}

/// Right-handed antenna triad expressed in the target frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaFrame {
    pub x_prime: Vec3,
    pub y_prime: Vec3,
    pub z_prime: Vec3,
}

fn check_admissible(theta: f64, phi: f64) -> Result<f64> {
    let k = kappa(theta, phi);
    if k > KAPPA_MIN {
        Ok(k)
    } else {
        Err(Error::FrameSingularity {
            theta_deg: theta.to_degrees(),
            phi_deg: phi.to_degrees(),
            kappa: k,
        })
    }
}

fn wave_direction(theta: f64, phi: f64) -> Vec3 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [-st * cp, -st * sp, -ct]
}

/// Unit wave direction and wavenumber `2π f / c` (rad/m).
pub fn wave_vector(theta: f64, phi: f64, freq: f64) -> Result<(Vec3, f64)> {
    if !(freq.is_finite() && freq > 0.0) {
        return Err(Error::invalid(format!(
            "frequency must be positive, got {freq} Hz"
        )));
    }
    let k = 2.0 * std::f64::consts::PI * freq / SPEED_OF_LIGHT;
    Ok((wave_direction(theta, phi), k))
}

/// Electric-field direction at emission (or reception) in the target frame.
pub fn jones_emission(theta: f64, phi: f64, pol: AntennaPol) -> Vec3 {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    match pol {
        AntennaPol::H => [-ct * cp, -ct * sp, st],
        AntennaPol::V => [-sp, cp, 0.0],
    }
}

/// Intermediate triad `(x0', y0', z0')` from the closed forms, which stay
/// defined at `theta = 0` where `z0' ∧ z` vanishes.
pub fn intermediate_frame(theta: f64, phi: f64) -> AntennaFrame {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    AntennaFrame {
        x_prime: [ct * cp, ct * sp, -st],
        y_prime: [-sp, cp, 0.0],
        z_prime: [st * cp, st * sp, ct],
    }
}

/// Antenna frame: `z' = -k`, `x'` along the projection of the target `x`
/// axis onto the plane normal to `k`, `y' = z' ∧ x'`.
pub fn antenna_frame(theta: f64, phi: f64) -> Result<AntennaFrame> {
    let k = check_admissible(theta, phi)?;
    let s = k.sqrt();
    let ct = theta.cos();
    let (sp, cp) = phi.sin_cos();
    let f0 = intermediate_frame(theta, phi);
    let a = ct * cp / s;
    let b = sp / s;
    let combine = |u: f64, v: f64| -> Vec3 {
        [
            u * f0.x_prime[0] + v * f0.y_prime[0],
            u * f0.x_prime[1] + v * f0.y_prime[1],
            u * f0.x_prime[2] + v * f0.y_prime[2],
        ]
    };
    Ok(AntennaFrame {
        x_prime: combine(a, -b),
        y_prime: combine(b, a),
        z_prime: f0.z_prime,
    })
}

/// Components `(e·x', e·y')` of the antenna polarization in the antenna frame.
pub fn jones_projection(theta: f64, phi: f64, pol: AntennaPol) -> Result<(f64, f64)> {
    let k = check_admissible(theta, phi)?;
    let s = k.sqrt();
    let ct = theta.cos();
    let (sp, cp) = phi.sin_cos();
    Ok(match pol {
        AntennaPol::H => (-ct * cp / s, -sp / s),
        AntennaPol::V => (-sp / s, ct * cp / s),
    })
}

/// Arithmetic progression `start:step:stop`.
///
/// `stop` is included when `(stop - start) / step` is an integer to within
/// 1e-9 relative; otherwise the last point is the one just below `stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub start: f64,
    pub step: f64,
    pub stop: f64,
}

impl SweepSpec {
    pub fn new(start: f64, step: f64, stop: f64) -> Result<Self> {
        if !(start.is_finite() && step.is_finite() && stop.is_finite()) {
            return Err(Error::invalid("sweep bounds must be finite"));
        }
        if step <= 0.0 {
            return Err(Error::invalid(format!("sweep step must be > 0, got {step}")));
        }
        if stop < start {
            return Err(Error::invalid(format!(
                "empty sweep: stop {stop} is below start {start}"
            )));
        }
        Ok(Self { start, step, stop })
    }

    pub fn len(&self) -> usize {
        let ratio = (self.stop - self.start) / self.step;
        let nearest = ratio.round();
        let steps = if (ratio - nearest).abs() <= 1e-9 * ratio.abs().max(1.0) {
            nearest
        } else {
            ratio.floor()
        };
        steps as usize + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(move |i| self.start + i as f64 * self.step)
    }
}

impl FromStr for SweepSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let parse = |p: &str| {
            p.parse::<f64>()
                .map_err(|_| Error::invalid(format!("bad number {p:?} in sweep {s:?}")))
        };
        match parts.as_slice() {
            [single] => {
                let v = parse(single)?;
                Self::new(v, 1.0, v)
            }
            [start, step, stop] => Self::new(parse(start)?, parse(step)?, parse(stop)?),
            _ => Err(Error::invalid(format!(
                "sweep {s:?} is not of the form start:step:stop"
            ))),
        }
    }
}

impl fmt::Display for SweepSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.step, self.stop)
    }
}

/// Cartesian product of the three sweeps, frequency fastest, then roll,
/// then azimuth. Angle sweeps are in degrees, frequency in Hz.
///
/// A singular `(theta, phi)` anywhere in the product is an error.
pub fn expand_sweep(
    theta_deg: &SweepSpec,
    phi_deg: &SweepSpec,
    freq_hz: &SweepSpec,
    mode: Mode,
) -> Result<Acquisition> {
    let freqs: Vec<f64> = freq_hz.values().collect();
    if let Some(&f) = freqs.iter().find(|&&f| f <= 0.0) {
        return Err(Error::invalid(format!(
            "frequency must be positive, got {f} Hz"
        )));
    }
    let mut descriptors = Vec::with_capacity(theta_deg.len() * phi_deg.len() * freqs.len());
    for t in theta_deg.values() {
        let theta = t.to_radians();
        for p in phi_deg.values() {
            let phi = p.to_radians();
            check_admissible(theta, phi).map_err(|_| Error::FrameSingularity {
                theta_deg: t,
                phi_deg: p,
                kappa: kappa(theta, phi),
            })?;
            descriptors.extend(freqs.iter().map(|&freq| MeasurementDescriptor {
                theta,
                phi,
                freq,
                mode,
            }));
        }
    }
    Ok(Acquisition::new(descriptors))
}
