//! Polarimetric 3-D radar imaging: forward simulation of fully polarimetric
//! monostatic holograms and fast minimum-norm least-squares reconstruction
//! of the three scattering-channel maps on a regular k-space grid.

// `!(x > y)` is used on purpose so that NaN falls on the rejecting side.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod forward;
pub mod fourier;
pub mod geometry;
pub mod inversion;
pub mod io;
pub mod kgrid;
pub mod maps;
pub mod polarimetry;

pub use error::{Error, Result};
pub use forward::{
    apply_adjoint, apply_forward, classical_ms_hologram, dense_matrix, simulate_hologram, ForwardOperator, Hologram,
    Scatterer, Scene,
};
pub use geometry::{expand_sweep, Acquisition, AntennaFrame, MeasurementDescriptor, Mode, SweepSpec, Vec3};
pub use inversion::{
    aadagger_diagonal, constrained_min_norm, ls_residual, mnls_dense, mnls_fast, ReconstructionReport, StageTimings,
};
pub use kgrid::{extract, regrid, suggest_grid, GriddedSpectrum, Interp, KGrid};
pub use maps::{ThreeMaps, VoxelGrid};
pub use polarimetry::{
    closed_form_weights, effective_coefficient, inversion_weights, Channel, ModeWeights, ScatteringMatrix,
};
