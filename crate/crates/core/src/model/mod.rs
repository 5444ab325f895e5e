//! Physical models shared by every other module.
//!
//! Continuum quantities use ħ = 2m = 1 throughout, so a free particle with
//! wavenumber `k` has energy `k²` and group velocity `2k`. Lattice
//! quantities are measured in units of the lead hopping `J`.

mod file;
mod lattice;
mod pendulum;
mod potential;

pub use file::ModelFile;
pub use lattice::LatticeModel;
pub use pendulum::{NormalMode, PendulumPair, PendulumState};
pub use potential::{Piece, Potential1D, Segment};

use num_complex::Complex64;

/// Unit conventions for the continuum model.
///
/// Both constants are fixed; nothing in the crate rescales them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitSystem;

impl UnitSystem {
    pub const HBAR: f64 = 1.0;
    pub const TWO_M: f64 = 1.0;

    /// E = ħ²k²/2m, which is k² here.
    pub fn energy(k: Complex64) -> Complex64 {
        Self::HBAR * Self::HBAR * k * k / Self::TWO_M
    }

    /// Speed Re(ħk)/m of the probability front carried by `e^{ikx}`.
    pub fn front_speed(k: Complex64) -> f64 {
        2.0 * Self::HBAR * k.re / Self::TWO_M
    }
}
