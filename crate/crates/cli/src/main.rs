mod check;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use polarsar3d::geometry::{expand_sweep, Acquisition, Mode, SweepSpec};
use polarsar3d::io::{self, Axis};
use polarsar3d::kgrid::{suggest_grid, Interp};
use polarsar3d::polarimetry::Channel;
use polarsar3d::{forward, inversion, Error};

const THREADS_ENV: &str = "POLARSAR3D_THREADS";

/// Polarization-diverse 3-D radar imaging: acquisition design, hologram
/// simulation and joint xx/yy/xy minimum-norm reconstruction.
///
/// Units: angles in degrees, frequencies in Hz, positions in meters,
/// spatial frequencies in rad/m, slice levels in dB. Set POLARSAR3D_THREADS
/// to cap worker threads (0 = one per core).
#[derive(Parser)]
#[command(name = "polarsar3d", version)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Expand start:step:stop sweeps into an acquisition file and print M.
    MakeAcq {
        /// Polarization mode(s): HH, VV or HV; a comma list concatenates one sweep per mode.
        #[arg(long, value_delimiter = ',', required = true)]
        mode: Vec<Mode>,
        /// Azimuth sweep in degrees, e.g. 0:2:20 (stop included when reached exactly).
        #[arg(long, allow_hyphen_values = true)]
        theta: SweepSpec,
        /// Roll sweep in degrees, e.g. 0:5:360.
        #[arg(long, allow_hyphen_values = true)]
        phi: SweepSpec,
        /// Frequency sweep in Hz, e.g. 8.2e9:1e7:12.4e9.
        #[arg(long)]
        freq: SweepSpec,
        /// Output acquisition JSON.
        #[arg(long)]
        out: PathBuf,
    },
    /// Simulate a polarimetric hologram of a point-scatterer scene.
    Simulate {
        /// Scene JSON (positions in meters, complex scattering coefficients).
        #[arg(long)]
        scene: PathBuf,
        /// Acquisition JSON.
        #[arg(long)]
        acq: PathBuf,
        /// Output hologram file.
        #[arg(long)]
        out: PathBuf,
        /// Standard deviation of the complex Gaussian noise (hologram amplitude units; total variance sigma²).
        #[arg(long, default_value_t = 0.0)]
        noise_sigma: f64,
        /// Noise seed; identical seeds give byte-identical output.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Propose a k-space grid covering an acquisition and an image extent.
    SuggestGrid {
        /// Acquisition JSON.
        #[arg(long)]
        acq: PathBuf,
        /// Image extent in meters along x,y,z (comma separated).
        #[arg(long, value_delimiter = ',', required = true)]
        extent: Vec<f64>,
        /// Regridding interpolation.
        #[arg(long, value_enum, default_value_t = InterpArg::Nearest)]
        interp: InterpArg,
        /// Output grid JSON.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fast minimum-norm reconstruction into xx/yy/xy volumes plus report.json.
    Reconstruct {
        /// Hologram file.
        #[arg(long)]
        holo: PathBuf,
        /// k-space grid JSON (dims, delta_k and center in rad/m).
        #[arg(long)]
        grid: PathBuf,
        /// Output directory (created if missing).
        #[arg(long)]
        out_dir: PathBuf,
        /// Override the grid's regridding interpolation.
        #[arg(long, value_enum)]
        interp: Option<InterpArg>,
    },
    /// Randomized self-tests; exits 1 when a check fails.
    Check {
        #[arg(long, value_enum)]
        mode: CheckMode,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of random instances (looks per mode for `weights`).
        #[arg(long, default_value_t = 100)]
        trials: usize,
    },
    /// Export one plane of a volume as an 8-bit PGM in dB relative to the volume peak.
    Slice {
        /// Volume file.
        #[arg(long)]
        map: PathBuf,
        #[arg(long, value_enum)]
        axis: AxisArg,
        /// Plane index along the axis (voxels).
        #[arg(long)]
        index: usize,
        /// Level mapped to black, in dB below the peak (negative).
        #[arg(long, default_value_t = -40.0, allow_hyphen_values = true)]
        db_floor: f64,
        /// Output PGM.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum InterpArg {
    Nearest,
    Linear,
}

impl From<InterpArg> for Interp {
    fn from(a: InterpArg) -> Self {
        match a {
            InterpArg::Nearest => Interp::Nearest,
            InterpArg::Linear => Interp::Linear,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckMode {
    Adjoint,
    Oracle,
    Weights,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    X,
    Y,
    Z,
}

impl From<AxisArg> for Axis {
    fn from(a: AxisArg) -> Self {
        match a {
            AxisArg::X => Axis::X,
            AxisArg::Y => Axis::Y,
            AxisArg::Z => Axis::Z,
        }
    }
}

enum Failure {
    Check,
    Input(String),
    Io(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Check => 1,
            Failure::Input(_) => 2,
            Failure::Io(_) => 3,
        }
    }
}

/// Any failure while loading inputs is an input error.
fn input<T>(r: polarsar3d::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| Failure::Input(e.to_string()))
}

/// I/O failures while producing outputs keep their own exit code.
fn output<T>(r: polarsar3d::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| match e {
        Error::Io { .. } => Failure::Io(e.to_string()),
        other => Failure::Input(other.to_string()),
    })
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = value
        .trim()
        .parse()
        .map_err(|_| Failure::Input(format!("{THREADS_ENV} must be a non-negative integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Input(format!("cannot configure {n} threads: {e}")))
}

fn make_acq(modes: &[Mode], theta: &SweepSpec, phi: &SweepSpec, freq: &SweepSpec, out: &Path) -> Result<(), Failure> {
    let parts = modes
        .iter()
        .map(|&m| expand_sweep(theta, phi, freq, m))
        .collect::<polarsar3d::Result<Vec<_>>>();
    let parts = input(parts)?;
    let acq = Acquisition::concat(&parts);
    if let [mode] = modes {
        output(io::write_acquisition_sweep(out, theta, phi, freq, *mode))?;
    } else {
        output(io::write_acquisition(out, &acq))?;
    }
    println!("M = {}", acq.len());
    Ok(())
}

fn simulate(scene: &Path, acq: &Path, out: &Path, sigma: f64, seed: u64) -> Result<(), Failure> {
    let scene = input(io::read_scene(scene))?;
    let acq = input(io::read_acquisition(acq))?;
    let holo = input(forward::simulate_hologram(&scene, &acq, sigma, seed))?;
    output(io::write_hologram(out, &holo))?;
    println!("wrote {} samples to {}", holo.len(), out.display());
    Ok(())
}

fn reconstruct(holo: &Path, grid: &Path, out_dir: &Path, interp: Option<InterpArg>) -> Result<(), Failure> {
    let holo = input(io::read_hologram(holo))?;
    let mut kgrid = input(io::read_grid(grid))?;
    if let Some(i) = interp {
        kgrid = kgrid.with_interp(i.into());
    }
    let report = input(inversion::mnls_fast(&holo, &kgrid))?;
    std::fs::create_dir_all(out_dir).map_err(|e| Failure::Io(format!("cannot create {}: {e}", out_dir.display())))?;
    let mut volumes = Vec::new();
    for channel in Channel::ALL {
        let name = format!("{}.p3dvol", channel.as_str());
        output(io::write_volume(
            out_dir.join(&name),
            report.maps.map(channel),
            report.maps.grid(),
            channel,
        ))?;
        volumes.push(name);
    }
    output(io::write_report(out_dir.join("report.json"), &report, &kgrid, holo.len(), volumes))?;
    println!(
        "N = {} voxels per map, M = {}, data_fit_relative = {:.3e}, total {:.3} s",
        report.maps.grid().len(),
        holo.len(),
        report.data_fit_relative,
        report.timings.total_s
    );
    Ok(())
}

fn run_check(mode: CheckMode, seed: u64, trials: usize) -> Result<(), Failure> {
    let summary = input(match mode {
        CheckMode::Adjoint => check::adjoint(seed, trials),
        CheckMode::Oracle => check::oracle(seed, trials),
        CheckMode::Weights => check::weights(seed, trials),
    })?;
    let verdict = if summary.passed() { "PASS" } else { "FAIL" };
    println!(
        "{verdict}: {} = {:.3e} over {} trials (threshold {:.0e})",
        summary.label, summary.worst, summary.trials, summary.threshold
    );
    if summary.passed() {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Cmd::MakeAcq {
            mode,
            theta,
            phi,
            freq,
            out,
        } => make_acq(&mode, &theta, &phi, &freq, &out),
        Cmd::Simulate {
            scene,
            acq,
            out,
            noise_sigma,
            seed,
        } => simulate(&scene, &acq, &out, noise_sigma, seed),
        Cmd::SuggestGrid {
            acq,
            extent,
            interp,
            out,
        } => {
            let [ex, ey, ez] = extent[..] else {
                return Err(Failure::Input(format!("--extent needs 3 values, got {}", extent.len())));
            };
            let acq = input(io::read_acquisition(acq))?;
            let kgrid = input(suggest_grid(&acq, [ex, ey, ez]))?.with_interp(interp.into());
            output(io::write_grid(&out, &kgrid))?;
            let g = kgrid.image_grid();
            println!("dims = {:?}, voxel pitch = {:?} m", g.dims, g.pitch);
            Ok(())
        }
        Cmd::Reconstruct {
            holo,
            grid,
            out_dir,
            interp,
        } => reconstruct(&holo, &grid, &out_dir, interp),
        Cmd::Check { mode, seed, trials } => run_check(mode, seed, trials),
        Cmd::Slice {
            map,
            axis,
            index,
            db_floor,
            out,
        } => {
            let vol = input(io::read_volume(&map))?;
            output(io::export_slice(&vol.values, &vol.grid, axis.into(), index, db_floor, &out))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            match &failure {
                Failure::Check => {}
                Failure::Input(msg) | Failure::Io(msg) => eprintln!("error: {msg}"),
            }
            ExitCode::from(failure.code())
        }
    }
}
