//! Discrete spectra of one-dimensional open quantum systems.
//!
//! Two routes to the same resonances are provided: Siegert poles of
//! piecewise-constant continuum potentials (zeros of the incoming-wave
//! amplitude, located and certified with the argument principle), and the
//! energy-dependent non-Hermitian effective Hamiltonian of a tight-binding
//! system with its leads projected out.

#[cfg(test)]
#[path = "../tests/common/mod.rs"]
#[allow(dead_code)]
mod oracles;

pub mod dynamics;
pub mod error;
pub mod feshbach;
pub mod hermiticity;
pub mod model;
pub mod poles;
pub mod roots;
pub mod series;
pub mod transfer;

pub use dynamics::{LocalSpectrum, PoleDecomposition};
pub use error::{Error, Result};
pub use feshbach::{BiorthogonalSystem, Branch, EffectiveHamiltonian, NonlinearPole, SelfEnergy};
pub use hermiticity::SiegertWavefunction;
pub use model::{LatticeModel, ModelFile, PendulumPair, Potential1D, Segment, UnitSystem};
pub use poles::{ComplexPole, PoleClass, SearchWindow, Sheet};
pub use series::TimeSeries;
pub use transfer::{ScatteringResult, TransferMatrix};
