//! Projection of the leads onto an energy-dependent, non-Hermitian
//! effective Hamiltonian for the system sites.

mod biorthogonal;
mod effective;
mod lattice_poles;
mod nonlinear;
mod self_energy;

pub use biorthogonal::{biorthogonal_expand, BiorthogonalExpansion, BiorthogonalSystem, MAX_CONDITION};
pub use effective::{effective_hamiltonian, effective_matrix, EffectiveHamiltonian};
pub use lattice_poles::{
    classify_kappa, default_kappa_window, exterior_weight, lattice_siegert_poles, normalize_kappa,
    siegert_determinant, siegert_matrix, LatticePoleSearch,
};
pub use nonlinear::{seed_grid, solve_from_seeds, solve_nonlinear_eig, NonlinearPole, SeedSweep, MAX_ITERATIONS};
pub use self_energy::{
    continue_self_energy, kappa_from_self_energy, lead_energy, lead_self_energy, Branch, SelfEnergy,
    BAND_EDGE_TOLERANCE,
};
