use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::effective::effective_matrix;
use super::lattice_poles::classify_kappa;
use super::self_energy::{continue_self_energy, kappa_from_self_energy, lead_self_energy, Branch};
use crate::error::{Error, Result};
use crate::model::LatticeModel;
use crate::poles::{ComplexPole, PoleClass, Sheet};

pub const MAX_ITERATIONS: usize = 200;
const TOLERANCE: f64 = 1e-12;
/// Iterates closer than this (relative to `J`) to `±2J` are treated as
/// having been drawn into a band edge.
const EDGE_ATTRACTION: f64 = 1e-8;

/// Root of `det(E - H_eff(E)) = 0` together with the self-energy it was
/// found with.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonlinearPole {
    pub energy: Complex64,
    pub branch: Branch,
    pub self_energy: Complex64,
    /// Lead quasi-momentum with `Σ = -J e^{iκ}`.
    pub kappa: Complex64,
    pub class: PoleClass,
    /// `|det(E - H_eff(E))|`.
    pub residual: f64,
    pub iterations: usize,
}

impl NonlinearPole {
    pub fn to_complex_pole(&self) -> ComplexPole {
        ComplexPole {
            k: self.kappa,
            energy: self.energy,
            sheet: if self.kappa.im > 0.0 { Sheet::First } else { Sheet::Second },
            class: self.class,
            residual: self.residual,
            newton_iterations: self.iterations,
            certified: true,
            winding: 0,
        }
    }
}

fn characteristic(m: &LatticeModel, e: Complex64, sigma: Complex64) -> Complex64 {
    let h = effective_matrix(m, sigma);
    let n = h.nrows();
    let a = nalgebra::DMatrix::from_diagonal_element(n, n, e) - h;
    a.determinant()
}

fn residual_scale(m: &LatticeModel, e: Complex64, sigma: Complex64) -> f64 {
    let norm = effective_matrix(m, sigma).norm() + e.norm();
    norm.max(1.0).powi(m.system_sites() as i32)
}

fn near_band_edge(e: Complex64, j: f64) -> bool {
    (e - 2.0 * j).norm() < EDGE_ATTRACTION * j || (e + 2.0 * j).norm() < EDGE_ATTRACTION * j
}

/// Newton iteration on `d(E) = det(E - H_eff(E))` from `seed`.
///
/// The self-energy starts on `branch` at the seed and is continued along
/// the iteration path, so a seed below the real axis on the retarded branch
/// reaches anti-bound states through the band. A converged root whose
/// self-energy disagrees with the branch formula off the real axis lies on
/// the other branch's sheet and is rejected.
pub fn solve_nonlinear_eig(m: &LatticeModel, branch: Branch, seed: Complex64) -> Result<NonlinearPole> {
    let j = m.lead_hopping();
    let mut sigma = lead_self_energy(seed, j, branch)?.value;
    let mut e = seed;
    let mut d = characteristic(m, e, sigma);
    for it in 1..=MAX_ITERATIONS {
        let h = 1e-7 * e.norm().max(1.0);
        let dp = {
            let ep = e + h;
            let em = e - h;
            let fp = characteristic(m, ep, continue_self_energy(ep, j, sigma));
            let fm = characteristic(m, em, continue_self_energy(em, j, sigma));
            (fp - fm) / (2.0 * h)
        };
        let step = d / dp;
        if !step.is_finite() {
            break;
        }
        e -= step;
        sigma = continue_self_energy(e, j, sigma);
        d = characteristic(m, e, sigma);
        if near_band_edge(e, j) {
            return Err(Error::BandEdge { energy: e });
        }
        let converged = d.norm() < TOLERANCE * residual_scale(m, e, sigma) && step.norm() < TOLERANCE * e.norm().max(1.0);
        if converged || d.norm() == 0.0 {
            return finish(m, branch, e, sigma, it);
        }
    }
    Err(Error::NoConvergence {
        iterations: MAX_ITERATIONS,
        last: e,
        residual: d.norm(),
    })
}

fn finish(m: &LatticeModel, branch: Branch, mut e: Complex64, mut sigma: Complex64, iterations: usize) -> Result<NonlinearPole> {
    let j = m.lead_hopping();
    let mut kappa = kappa_from_self_energy(sigma, j);
    let mut class = classify_kappa(kappa, 1e-9);
    if matches!(class, PoleClass::Bound | PoleClass::AntiBound) {
        // Real energy outside the band: drop the rounding residue in Im E and
        // polish on the real line.
        e = Complex64::new(e.re, 0.0);
        sigma = Complex64::new(continue_self_energy(e, j, sigma).re, 0.0);
        for _ in 0..4 {
            let h = 1e-7 * e.re.abs().max(1.0);
            let f = |x: f64| {
                let z = Complex64::new(x, 0.0);
                characteristic(m, z, Complex64::new(continue_self_energy(z, j, sigma).re, 0.0)).re
            };
            let step = f(e.re) / ((f(e.re + h) - f(e.re - h)) / (2.0 * h));
            if !step.is_finite() || step == 0.0 {
                break;
            }
            e.re -= step;
            sigma = Complex64::new(continue_self_energy(e, j, sigma).re, 0.0);
        }
        kappa = kappa_from_self_energy(sigma, j);
        kappa.re = if kappa.re.abs() < 1.0 { 0.0 } else { std::f64::consts::PI };
        class = classify_kappa(kappa, 1e-9);
    } else {
        let on_branch = lead_self_energy(e, j, branch)?.value;
        if (on_branch - sigma).norm() > 1e-6 * j {
            return Err(Error::OffBranch { energy: e });
        }
    }
    Ok(NonlinearPole {
        energy: e,
        branch,
        self_energy: sigma,
        kappa,
        class,
        residual: characteristic(m, e, sigma).norm(),
        iterations,
    })
}

/// Outcome of a multi-seed sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SeedSweep {
    pub poles: Vec<NonlinearPole>,
    pub failed_seeds: usize,
}

/// Runs [`solve_nonlinear_eig`] from every seed in parallel and merges the
/// converged roots within `1e-8`, sorted by (Re E, Im E).
pub fn solve_from_seeds(m: &LatticeModel, branch: Branch, seeds: &[Complex64]) -> SeedSweep {
    let results: Vec<Result<NonlinearPole>> = seeds.par_iter().map(|&s| solve_nonlinear_eig(m, branch, s)).collect();
    let failed_seeds = results.iter().filter(|r| r.is_err()).count();
    let mut found: Vec<NonlinearPole> = results.into_iter().filter_map(|r| r.ok()).collect();
    found.sort_by(|a, b| {
        a.energy
            .re
            .total_cmp(&b.energy.re)
            .then(a.energy.im.total_cmp(&b.energy.im))
            .then(a.residual.total_cmp(&b.residual))
    });
    let mut poles: Vec<NonlinearPole> = Vec::new();
    for p in found {
        match poles.iter_mut().find(|q| (q.energy - p.energy).norm() < 1e-8) {
            Some(q) if p.residual < q.residual => *q = p,
            Some(_) => {}
            None => poles.push(p),
        }
    }
    SeedSweep { poles, failed_seeds }
}

/// Default seeds: a lattice over the half-plane the branch continues into,
/// plus real seeds outside the band for bound states.
pub fn seed_grid(m: &LatticeModel, branch: Branch) -> Vec<Complex64> {
    let j = m.lead_hopping();
    let (gl, gr) = m.coupling();
    let spread = m.onsite().iter().fold(0.0f64, |a, v| a.max(v.abs()))
        + 2.0 * m.intra_hopping().iter().fold(0.0f64, |a, v| a.max(v.abs()))
        + (gl * gl + gr * gr) / j;
    let reach = 2.0 * j + spread + 0.5;
    let sign = match branch {
        Branch::Retarded => -1.0,
        Branch::Advanced => 1.0,
    };
    let n_re = 41;
    let mut seeds = Vec::new();
    for i in 0..n_re {
        let re = -reach + 2.0 * reach * (i as f64 + 0.5) / n_re as f64;
        for im in [0.02, 0.1, 0.3, 0.7, 1.5] {
            seeds.push(Complex64::new(re, sign * im * j));
        }
    }
    for i in 1..=12 {
        let re = 2.0 * j + (reach + 1.0 - 2.0 * j) * i as f64 / 12.0;
        seeds.push(Complex64::new(re, 0.0));
        seeds.push(Complex64::new(-re, 0.0));
    }
    seeds
}
