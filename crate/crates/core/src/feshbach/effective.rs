use nalgebra::DMatrix;
use num_complex::Complex64;

use super::self_energy::{lead_self_energy, Branch};
use crate::error::Result;
use crate::model::LatticeModel;

/// `PHP + PHQ (E - QHQ)⁻¹ QHP` at one probe energy.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian {
    pub energy: Complex64,
    pub branch: Branch,
    pub self_energy: Complex64,
    pub matrix: DMatrix<Complex64>,
}

impl EffectiveHamiltonian {
    /// Frobenius norm of `H - H†`.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).norm()
    }
}

/// Effective Hamiltonian for an explicitly given lead self-energy, so that
/// callers can continue `Σ` along a path instead of using the branch formula.
pub fn effective_matrix(m: &LatticeModel, sigma: Complex64) -> DMatrix<Complex64> {
    let n = m.system_sites();
    let j = m.lead_hopping();
    let (gl, gr) = m.coupling();
    let mut h = m.system_hamiltonian().map(|v| Complex64::new(v, 0.0));
    h[(0, 0)] += gl * gl / (j * j) * sigma;
    h[(n - 1, n - 1)] += gr * gr / (j * j) * sigma;
    h
}

pub fn effective_hamiltonian(m: &LatticeModel, energy: Complex64, branch: Branch) -> Result<EffectiveHamiltonian> {
    let sigma = lead_self_energy(energy, m.lead_hopping(), branch)?.value;
    Ok(EffectiveHamiltonian {
        energy,
        branch,
        self_energy: sigma,
        matrix: effective_matrix(m, sigma),
    })
}
