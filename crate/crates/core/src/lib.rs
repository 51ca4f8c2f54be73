//! Phase-space quantization on discretized 1-D phase space: Moyal star
//! product, cross-Wigner intertwiners, Weyl operators and the star-genvalue
//! problem `H★Ψ = λΨ`.

pub mod error;
pub mod field;
pub mod fourier;
pub mod grid;
pub mod io;
pub mod moyal;
pub mod special;
pub mod spectral;
pub mod verify;
pub mod wigner;

pub use error::{Error, Result};
pub use field::{PhaseField, WaveField, C64};
pub use fourier::symplectic_fourier;
pub use grid::{symplectic_form, HbarContext, PhaseGrid, SpatialGrid, SymplecticVector};
