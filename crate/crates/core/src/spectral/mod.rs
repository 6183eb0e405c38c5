//! Fourier representation of real mean-zero fields on `[0, 2π]^d` together with
//! the spectral operators and norms used by the solver.

mod fft;
pub mod field;
pub mod generate;
pub mod grid;
pub mod norms;
pub mod ops;

pub use field::{SpectralField, VectorField};
pub use grid::{GridSpec, Wavevector};
pub use norms::{gevrey_norm, h1_inner, l2_inner, l2_norm, linf_norm, sobolev_norm};
pub use ops::{advect, fractional_laplacian, gradient, lambda_power, DealiasRule};
pub use rustfft::num_complex::Complex64;
