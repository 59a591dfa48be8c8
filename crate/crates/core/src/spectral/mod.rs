//! Periodic-grid Fourier representation: transforms, spectral derivatives,
//! Leray projection and 2/3-rule dealiasing.

mod fft;
mod field;
mod grid;
mod ops;

pub use field::{forward_many, inverse_many, SpectralField, VectorSpectralField};
pub use grid::{make_grid, signed_mode, FourierGrid};
pub use ops::{
    dealias, dealias_in_place, dealias_vector, derivative, divergence, leray_project,
    leray_project_in_place, mixed_derivative, remove_mean,
};
