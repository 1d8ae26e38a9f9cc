//! Phase-space operator calculus on discretized ℝ^{2d}.
//!
//! Symbols, functions and operators live on self-dual uniform grids
//! (h = sqrt(2π/N)), so every quantization map is an exact linear bijection on
//! grid data and the continuous identities of the calculus can be checked as
//! numerical properties.

pub mod calculus;
pub mod combinat;
pub mod confine;
pub mod error;
pub mod fft;
pub mod functions;
pub mod grid;
pub mod linalg;
pub mod modspace;
pub mod quantize;
pub mod symgroup;
pub mod tfa;
pub mod toeplitz;
pub mod weights;
pub mod weylalg;

pub use calculus::Quantization;
pub use error::{Error, Result};
pub use grid::{make_grid, quadrature, Domain, Grid1D, GridMode, PhaseGrid, SampledFunction, SampledSymbol};
pub use num_complex::Complex64 as C64;
pub use quantize::OperatorMatrix;
pub use weights::Weight;

