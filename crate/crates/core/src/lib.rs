//! Numerical laboratory for Coifman–Meyer multipliers, paraproducts and the
//! log-weighted function spaces they act on, discretized on a periodic box.

pub mod carleson;
pub mod error;
pub mod fd;
pub mod grid;
pub mod harness;
pub mod multipliers;
pub mod paraproducts;
pub mod smooth;
pub mod spaces;
pub mod tgrid;
pub mod weights;

pub use error::{GridError, HarnessError, RatioError, SymbolError, WeightError};
pub use grid::{dealiased_product, dft, idft, integrate, zero_pad, Grid, SampledField, SpectralField};
pub use num_complex::Complex64;
