//! On-disk formats: acquisition, scene and grid JSON; binary holograms and
//! volumes; PGM slice export; reconstruction reports.
//!
//! Binary files start with a 16-byte magic (ASCII tag, NUL padded), a
//! little-endian `u64` header length, the UTF-8 JSON header and the payload.
//! Holograms store `(f64 re, f64 im)` pairs, volumes `(f32 re, f32 im)`
//! pairs in x-fastest order, always little-endian.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{Hologram, Scatterer, Scene};
use crate::geometry::{expand_sweep, Acquisition, MeasurementDescriptor, Mode, SweepSpec};
use crate::inversion::{ReconstructionReport, StageTimings};
use crate::kgrid::KGrid;
use crate::maps::VoxelGrid;
use crate::polarimetry::{Channel, ScatteringMatrix};

pub const HOLOGRAM_MAGIC: &[u8; 8] = b"P3DHOLO1";
pub const VOLUME_MAGIC: &[u8; 8] = b"P3DVOL01";
const MAGIC_LEN: usize = 16;
const FORMAT_VERSION: u32 = 1;

fn padded_magic(tag: &[u8; 8]) -> [u8; MAGIC_LEN] {
    let mut m = [0u8; MAGIC_LEN];
    m[..8].copy_from_slice(tag);
    m
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

fn write_synced(path: &Path, chunks: &[&[u8]]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for c in chunks {
        w.write_all(c).map_err(|e| Error::io(path, e))?;
    }
    let file = w.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    file.sync_all().map_err(|e| Error::io(path, e))
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_reader(BufReader::new(file)).map_err(|e| Error::format(path, e.to_string()))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_vec_pretty(value).map_err(|e| Error::format(path, e.to_string()))?;
    write_synced(path, &[&text, b"\n"])
}

/// Splits a framed binary file into its JSON header and payload.
fn unframe<'a>(path: &Path, bytes: &'a [u8], tag: &[u8; 8]) -> Result<(&'a [u8], &'a [u8])> {
    if bytes.len() < MAGIC_LEN + 8 || bytes[..MAGIC_LEN] != padded_magic(tag) {
        return Err(Error::format(
            path,
            format!("missing {} magic", String::from_utf8_lossy(tag)),
        ));
    }
    let len = u64::from_le_bytes(bytes[MAGIC_LEN..MAGIC_LEN + 8].try_into().unwrap()) as usize;
    let start = MAGIC_LEN + 8;
    if bytes.len() - start < len {
        return Err(Error::format(path, "header length exceeds file size"));
    }
    Ok((&bytes[start..start + len], &bytes[start + len..]))
}

// ---------------------------------------------------------------------------
// Acquisition JSON

#[derive(Debug, Default, Serialize, Deserialize)]
pub struct AcquisitionFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    /// Per-descriptor modes for mixed acquisitions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub modes: Option<Vec<Mode>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta_deg: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi_deg: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freq_hz: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepFile>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SweepFile {
    pub theta_deg: String,
    pub phi_deg: String,
    pub freq_hz: String,
}

impl AcquisitionFile {
    pub fn from_acquisition(acq: &Acquisition) -> Self {
        let uniform = acq.uniform_mode();
        Self {
            mode: uniform,
            modes: match uniform {
                Some(_) => None,
                None => Some(acq.iter().map(|d| d.mode()).collect()),
            },
            theta_deg: Some(acq.iter().map(|d| d.theta().to_degrees()).collect()),
            phi_deg: Some(acq.iter().map(|d| d.phi().to_degrees()).collect()),
            freq_hz: Some(acq.iter().map(|d| d.freq()).collect()),
            sweep: None,
        }
    }

    pub fn into_acquisition(self) -> Result<Acquisition> {
        if let Some(sweep) = self.sweep {
            if self.theta_deg.is_some() || self.phi_deg.is_some() || self.freq_hz.is_some() {
                return Err(Error::invalid("acquisition has both a sweep and explicit lists"));
            }
            let mode = self
                .mode
                .ok_or_else(|| Error::invalid("a sweep acquisition needs a mode"))?;
            return expand_sweep(
                &SweepSpec::from_str(&sweep.theta_deg)?,
                &SweepSpec::from_str(&sweep.phi_deg)?,
                &SweepSpec::from_str(&sweep.freq_hz)?,
                mode,
            );
        }
        let (Some(theta), Some(phi), Some(freq)) = (self.theta_deg, self.phi_deg, self.freq_hz) else {
            return Err(Error::invalid(
                "acquisition needs either a sweep or theta_deg/phi_deg/freq_hz lists",
            ));
        };
        let m = theta.len();
        if phi.len() != m || freq.len() != m {
            return Err(Error::invalid(format!(
                "list lengths differ: theta {m}, phi {}, freq {}",
                phi.len(),
                freq.len()
            )));
        }
        if m == 0 {
            return Err(Error::invalid("acquisition is empty"));
        }
        let modes = match (self.mode, self.modes) {
            (_, Some(modes)) if modes.len() != m => {
                return Err(Error::invalid(format!("{} modes for {m} descriptors", modes.len())))
            }
            (_, Some(modes)) => modes,
            (Some(mode), None) => vec![mode; m],
            (None, None) => return Err(Error::invalid("acquisition needs a mode")),
        };
        (0..m)
            .map(|i| MeasurementDescriptor::from_degrees(theta[i], phi[i], freq[i], modes[i]))
            .collect::<Result<Vec<_>>>()
            .map(Acquisition::new)
    }
}

pub fn read_acquisition(path: impl AsRef<Path>) -> Result<Acquisition> {
    let path = path.as_ref();
    let file: AcquisitionFile = read_json(path)?;
    file.into_acquisition()
}

pub fn write_acquisition(path: impl AsRef<Path>, acq: &Acquisition) -> Result<()> {
    write_json(path.as_ref(), &AcquisitionFile::from_acquisition(acq))
}

/// Writes the compact sweep form; readers expand it exactly as [`expand_sweep`] does.
pub fn write_acquisition_sweep(
    path: impl AsRef<Path>,
    theta_deg: &SweepSpec,
    phi_deg: &SweepSpec,
    freq_hz: &SweepSpec,
    mode: Mode,
) -> Result<()> {
    let file = AcquisitionFile {
        mode: Some(mode),
        sweep: Some(SweepFile {
            theta_deg: theta_deg.to_string(),
            phi_deg: phi_deg.to_string(),
            freq_hz: freq_hz.to_string(),
        }),
        ..Default::default()
    };
    write_json(path.as_ref(), &file)
}

// ---------------------------------------------------------------------------
// Scene and grid JSON

#[derive(Debug, Serialize, Deserialize)]
struct SceneFile {
    scatterers: Vec<ScattererFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ScattererFile {
    pos_m: [f64; 3],
    #[serde(default)]
    sxx: [f64; 2],
    #[serde(default)]
    syy: [f64; 2],
    #[serde(default)]
    sxy: [f64; 2],
}

fn cplx(v: [f64; 2]) -> Complex64 {
    Complex64::new(v[0], v[1])
}

pub fn scene_from_json(text: &str) -> Result<Scene> {
    let file: SceneFile = serde_json::from_str(text).map_err(|e| Error::invalid(e.to_string()))?;
    scene_from_file(file)
}

fn scene_from_file(file: SceneFile) -> Result<Scene> {
    Scene::new(
        file.scatterers
            .into_iter()
            .map(|s| Scatterer {
                position: s.pos_m,
                matrix: ScatteringMatrix::new(cplx(s.sxx), cplx(s.syy), cplx(s.sxy)),
            })
            .collect(),
    )
}

pub fn read_scene(path: impl AsRef<Path>) -> Result<Scene> {
    scene_from_file(read_json(path.as_ref())?)
}

pub fn write_scene(path: impl AsRef<Path>, scene: &Scene) -> Result<()> {
    let file = SceneFile {
        scatterers: scene
            .scatterers
            .iter()
            .map(|s| ScattererFile {
                pos_m: s.position,
                sxx: [s.matrix.s_xx.re, s.matrix.s_xx.im],
                syy: [s.matrix.s_yy.re, s.matrix.s_yy.im],
                sxy: [s.matrix.s_xy.re, s.matrix.s_xy.im],
            })
            .collect(),
    };
    write_json(path.as_ref(), &file)
}

pub fn read_grid(path: impl AsRef<Path>) -> Result<KGrid> {
    read_json(path.as_ref())
}

pub fn write_grid(path: impl AsRef<Path>, grid: &KGrid) -> Result<()> {
    write_json(path.as_ref(), grid)
}

// ---------------------------------------------------------------------------
// Holograms

/// The header keeps angles in radians so that descriptors survive bit-exactly.
#[derive(Serialize, Deserialize)]
struct HologramHeader {
    version: u32,
    count: usize,
    modes: Vec<Mode>,
    theta_rad: Vec<f64>,
    phi_rad: Vec<f64>,
    freq_hz: Vec<f64>,
}

pub fn hologram_to_bytes(holo: &Hologram) -> Vec<u8> {
    let header = HologramHeader {
        version: FORMAT_VERSION,
        count: holo.len(),
        modes: holo.acquisition().iter().map(|d| d.mode()).collect(),
        theta_rad: holo.acquisition().iter().map(|d| d.theta()).collect(),
        phi_rad: holo.acquisition().iter().map(|d| d.phi()).collect(),
        freq_hz: holo.acquisition().iter().map(|d| d.freq()).collect(),
    };
    let header = serde_json::to_vec(&header).expect("hologram header serializes");
    let mut out = Vec::with_capacity(MAGIC_LEN + 8 + header.len() + 16 * holo.len());
    out.extend_from_slice(&padded_magic(HOLOGRAM_MAGIC));
    out.extend_from_slice(&(header.len() as u64).to_le_bytes());
    out.extend_from_slice(&header);
    for v in holo.values() {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

pub fn hologram_from_bytes(path: &Path, bytes: &[u8]) -> Result<Hologram> {
    let (header, payload) = unframe(path, bytes, HOLOGRAM_MAGIC)?;
    let header: HologramHeader =
        serde_json::from_slice(header).map_err(|e| Error::format(path, format!("bad header: {e}")))?;
    if header.version != FORMAT_VERSION {
        return Err(Error::format(path, format!("unsupported version {}", header.version)));
    }
    let expected = 16 * header.count;
    if payload.len() != expected {
        return Err(Error::format(
            path,
            format!("payload is {} bytes, expected {expected}", payload.len()),
        ));
    }
    let m = header.count;
    if [header.modes.len(), header.theta_rad.len(), header.phi_rad.len(), header.freq_hz.len()] != [m; 4] {
        return Err(Error::format(path, format!("header lists disagree with count {m}")));
    }
    let acq = (0..m)
        .map(|i| MeasurementDescriptor::new(header.theta_rad[i], header.phi_rad[i], header.freq_hz[i], header.modes[i]))
        .collect::<Result<Vec<_>>>()
        .map(Acquisition::new)
        .map_err(|e| Error::format(path, e.to_string()))?;
    let values = payload
        .chunks_exact(16)
        .map(|c| {
            Complex64::new(
                f64::from_le_bytes(c[..8].try_into().unwrap()),
                f64::from_le_bytes(c[8..].try_into().unwrap()),
            )
        })
        .collect();
    Hologram::new(values, acq).map_err(|e| Error::format(path, e.to_string()))
}

pub fn write_hologram(path: impl AsRef<Path>, holo: &Hologram) -> Result<()> {
    write_synced(path.as_ref(), &[&hologram_to_bytes(holo)])
}

pub fn read_hologram(path: impl AsRef<Path>) -> Result<Hologram> {
    let path = path.as_ref();
    hologram_from_bytes(path, &read_file(path)?)
}

// ---------------------------------------------------------------------------
// Volumes

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct VolumeHeader {
    version: u32,
    dims: [usize; 3],
    voxel_pitch_m: [f64; 3],
    origin_m: [f64; 3],
    map: Channel,
    value_type: String,
}

const VOLUME_VALUE_TYPE: &str = "complex_f32_le";

/// A single channel map as stored on disk (values carry float32 precision).
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    pub grid: VoxelGrid,
    pub channel: Channel,
    pub values: Vec<Complex64>,
}

pub fn write_volume(path: impl AsRef<Path>, values: &[Complex64], grid: &VoxelGrid, channel: Channel) -> Result<()> {
    let path = path.as_ref();
    if values.len() != grid.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} values for grid {:?}",
            values.len(),
            grid.dims
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("volume contains non-finite values"));
    }
    let header = VolumeHeader {
        version: FORMAT_VERSION,
        dims: grid.dims,
        voxel_pitch_m: grid.pitch,
        origin_m: grid.origin,
        map: channel,
        value_type: VOLUME_VALUE_TYPE.into(),
    };
    let header = serde_json::to_vec(&header).map_err(|e| Error::format(path, e.to_string()))?;
    let mut payload = Vec::with_capacity(8 * values.len());
    for v in values {
        payload.extend_from_slice(&(v.re as f32).to_le_bytes());
        payload.extend_from_slice(&(v.im as f32).to_le_bytes());
    }
    write_synced(
        path,
        &[
            &padded_magic(VOLUME_MAGIC),
            &(header.len() as u64).to_le_bytes(),
            &header,
            &payload,
        ],
    )
}

pub fn read_volume(path: impl AsRef<Path>) -> Result<Volume> {
    let path = path.as_ref();
    let bytes = read_file(path)?;
    let (header, payload) = unframe(path, &bytes, VOLUME_MAGIC)?;
    let header: VolumeHeader =
        serde_json::from_slice(header).map_err(|e| Error::format(path, format!("bad header: {e}")))?;
    if header.version != FORMAT_VERSION || header.value_type != VOLUME_VALUE_TYPE {
        return Err(Error::format(
            path,
            format!("unsupported version {} / value type {}", header.version, header.value_type),
        ));
    }
    let grid = VoxelGrid::new(header.dims, header.voxel_pitch_m, header.origin_m)
        .map_err(|e| Error::format(path, e.to_string()))?;
    let expected = 8 * grid.len();
    if payload.len() != expected {
        return Err(Error::format(
            path,
            format!("payload is {} bytes, expected {expected}", payload.len()),
        ));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| {
            Complex64::new(
                f32::from_le_bytes(c[..4].try_into().unwrap()) as f64,
                f32::from_le_bytes(c[4..].try_into().unwrap()) as f64,
            )
        })
        .collect();
    Ok(Volume {
        grid,
        channel: header.map,
        values,
    })
}

// ---------------------------------------------------------------------------
// Slices

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "x" | "X" => Ok(Axis::X),
            "y" | "Y" => Ok(Axis::Y),
            "z" | "Z" => Ok(Axis::Z),
            _ => Err(Error::invalid(format!("unknown axis {s:?}"))),
        }
    }
}

/// 8-bit log-magnitude rendering of one plane. Returns `(width, height, pixels)`.
///
/// Pixels map `[db_floor, 0]` dB relative to the volume peak onto `[0, 255]`.
/// An `X` slice has rows along z and columns along y; `Y` rows along z and
/// columns along x; `Z` rows along y and columns along x.
pub fn render_slice(
    values: &[Complex64],
    grid: &VoxelGrid,
    axis: Axis,
    index: usize,
    db_floor: f64,
) -> Result<(usize, usize, Vec<u8>)> {
    if values.len() != grid.len() {
        return Err(Error::ShapeMismatch(format!("{} values for grid {:?}", values.len(), grid.dims)));
    }
    if !(db_floor.is_finite() && db_floor < 0.0) {
        return Err(Error::invalid(format!("dB floor must be negative, got {db_floor}")));
    }
    let [nx, ny, nz] = grid.dims;
    let limit = match axis {
        Axis::X => nx,
        Axis::Y => ny,
        Axis::Z => nz,
    };
    if index >= limit {
        return Err(Error::invalid(format!("slice index {index} out of range 0..{limit}")));
    }
    let peak = values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if peak == 0.0 {
        log::warn!("volume is identically zero; writing a black slice");
    }
    let (w, h) = match axis {
        Axis::X => (ny, nz),
        Axis::Y => (nx, nz),
        Axis::Z => (nx, ny),
    };
    let mut pixels = Vec::with_capacity(w * h);
    for row in 0..h {
        for col in 0..w {
            let idx = match axis {
                Axis::X => [index, col, row],
                Axis::Y => [col, index, row],
                Axis::Z => [col, row, index],
            };
            let mag = values[grid.linear_index(idx)].norm();
            let px = if peak > 0.0 && mag > 0.0 {
                let db = 20.0 * (mag / peak).log10();
                (255.0 * (db - db_floor) / -db_floor).clamp(0.0, 255.0).round() as u8
            } else {
                0
            };
            pixels.push(px);
        }
    }
    Ok((w, h, pixels))
}

/// Writes a binary PGM (P5) slice; see [`render_slice`].
pub fn export_slice(
    values: &[Complex64],
    grid: &VoxelGrid,
    axis: Axis,
    index: usize,
    db_floor: f64,
    path: impl AsRef<Path>,
) -> Result<()> {
    let (w, h, pixels) = render_slice(values, grid, axis, index, db_floor)?;
    let header = format!("P5\n{w} {h}\n255\n");
    write_synced(path.as_ref(), &[header.as_bytes(), &pixels])
}

/// Reads back a P5 PGM written by [`export_slice`].
pub fn read_pgm(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<u8>)> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::format(path, "truncated PGM header"));
        }
        fields.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    let parse = |s: &str| s.parse::<usize>().map_err(|_| Error::format(path, "bad PGM header"));
    if fields[0] != "P5" || parse(&fields[3])? != 255 {
        return Err(Error::format(path, "not an 8-bit P5 PGM"));
    }
    let (w, h) = (parse(&fields[1])?, parse(&fields[2])?);
    let data = bytes.get(pos + 1..).unwrap_or(&[]);
    if data.len() != w * h {
        return Err(Error::format(path, format!("{} pixels, expected {}", data.len(), w * h)));
    }
    Ok((w, h, data.to_vec()))
}

// ---------------------------------------------------------------------------
// Reports

#[derive(Debug, Serialize)]
pub struct ReportFile<'a> {
    pub residual_norm: f64,
    pub data_fit_relative: f64,
    pub observed_cells: usize,
    pub measurements: usize,
    pub timings: StageTimings,
    pub grid: &'a KGrid,
    pub voxel_grid: VoxelGrid,
    pub volumes: Vec<String>,
}

pub fn write_report(
    path: impl AsRef<Path>,
    report: &ReconstructionReport,
    kgrid: &KGrid,
    measurements: usize,
    volumes: Vec<String>,
) -> Result<()> {
    let file = ReportFile {
        residual_norm: report.residual_norm,
        data_fit_relative: report.data_fit_relative,
        observed_cells: report.observed_cells,
        measurements,
        timings: report.timings,
        grid: kgrid,
        voxel_grid: *report.maps.grid(),
        volumes,
    };
    write_json(path.as_ref(), &file)
}
