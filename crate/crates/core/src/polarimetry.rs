//! Scattering matrices and per-measurement polarimetric weights.
//!
//! Every measurement observes a fixed linear combination
//! `w_xx s_xx + w_yy s_yy + w_xy s_xy` of a scatterer's matrix entries. The
//! weights depend only on `(theta, phi, mode)` and are evaluated on demand,
//! never stored as diagonal matrices.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{jones_projection, Mode, KAPPA_MIN};

/// Frame normalizer `K = cos²θ cos²φ + sin²φ`, in `[0, 1]`.
pub fn kappa(theta: f64, phi: f64) -> f64 {
    let ct = theta.cos();
    let (sp, cp) = phi.sin_cos();
    ct * ct * cp * cp + sp * sp
}

/// Polarimetric channel of the reconstructed maps, in the target frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Channel {
    #[serde(rename = "xx")]
    Xx,
    #[serde(rename = "yy")]
    Yy,
    #[serde(rename = "xy")]
    Xy,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::Xx, Channel::Yy, Channel::Xy];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Channel::Xx => "xx",
            Channel::Yy => "yy",
            Channel::Xy => "xy",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Channel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xx" => Ok(Channel::Xx),
            "yy" => Ok(Channel::Yy),
            "xy" => Ok(Channel::Xy),
            _ => Err(Error::invalid(format!("unknown map label {s:?}"))),
        }
    }
}

/// Monostatic scattering matrix; reciprocity makes it symmetric, so the
/// off-diagonal term is stored once.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScatteringMatrix {
    pub s_xx: Complex64,
    pub s_yy: Complex64,
    pub s_xy: Complex64,
}

impl ScatteringMatrix {
    pub fn new(s_xx: Complex64, s_yy: Complex64, s_xy: Complex64) -> Self {
        Self { s_xx, s_yy, s_xy }
    }

    /// `s_xx = s_yy = s`, `s_xy = 0`: a polarization-blind scatterer.
    pub fn isotropic(s: Complex64) -> Self {
        Self::new(s, s, Complex64::new(0.0, 0.0))
    }

    pub fn get(&self, channel: Channel) -> Complex64 {
        match channel {
            Channel::Xx => self.s_xx,
            Channel::Yy => self.s_yy,
            Channel::Xy => self.s_xy,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.s_xx, self.s_yy, self.s_xy].iter().all(|c| c.is_finite())
    }
}

/// Real weights applied to the three channels by one measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeWeights {
    pub w_xx: f64,
    pub w_yy: f64,
    pub w_xy: f64,
}

impl ModeWeights {
    pub fn get(&self, channel: Channel) -> f64 {
        match channel {
            Channel::Xx => self.w_xx,
            Channel::Yy => self.w_yy,
            Channel::Xy => self.w_xy,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.w_xx, self.w_yy, self.w_xy]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.w_xx * self.w_xx + self.w_yy * self.w_yy + self.w_xy * self.w_xy
    }

    pub fn apply(&self, s: &ScatteringMatrix) -> Complex64 {
        s.s_xx * self.w_xx + s.s_yy * self.w_yy + s.s_xy * self.w_xy
    }
}

fn guarded_kappa(theta: f64, phi: f64) -> Result<f64> {
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

/// Forward weights from the closed-form HH / VV / HV expressions.
pub fn closed_form_weights(theta: f64, phi: f64, mode: Mode) -> Result<ModeWeights> {
    let k = guarded_kappa(theta, phi)?;
    let ct = theta.cos();
    let (sp, cp) = phi.sin_cos();
    let a = ct * ct * cp * cp;
    let b = sp * sp;
    let c = ct * (2.0 * phi).sin();
    let (w_xx, w_yy, w_xy) = match mode {
        Mode::Hh => (a, b, c),
        Mode::Vv => (b, a, -c),
        Mode::Hv => (c / 2.0, -c / 2.0, -(a - b)),
    };
    Ok(ModeWeights {
        w_xx: w_xx / k,
        w_yy: w_yy / k,
        w_xy: w_xy / k,
    })
}

/// Forward weights obtained by pushing the Jones projections through the
/// bilinear form `[r·x' r·y'] S [e·x' e·y']ᵗ`. Independent of
/// [`closed_form_weights`]; the two must agree.
pub fn projection_weights(theta: f64, phi: f64, mode: Mode) -> Result<ModeWeights> {
    let (ex, ey) = jones_projection(theta, phi, mode.emission())?;
    let (rx, ry) = jones_projection(theta, phi, mode.reception())?;
    Ok(ModeWeights {
        w_xx: rx * ex,
        w_yy: ry * ey,
        w_xy: rx * ey + ry * ex,
    })
}

/// Coefficient `s*(i)` a scatterer presents to one measurement.
pub fn effective_coefficient(
    s: &ScatteringMatrix,
    theta: f64,
    phi: f64,
    mode: Mode,
) -> Result<Complex64> {
    Ok(closed_form_weights(theta, phi, mode)?.apply(s))
}

/// Inversion weights `π_k = w_k / (w_xx² + w_yy² + w_xy²)`.
pub fn inversion_weights(theta: f64, phi: f64, mode: Mode) -> Result<ModeWeights> {
    let w = closed_form_weights(theta, phi, mode)?;
    let n = w.norm_sqr();
    // K > KAPPA_MIN keeps the weight vector away from zero; see the tests
    debug_assert!(n > 0.0);
    Ok(ModeWeights {
        w_xx: w.w_xx / n,
        w_yy: w.w_yy / n,
        w_xy: w.w_xy / n,
    })
}
