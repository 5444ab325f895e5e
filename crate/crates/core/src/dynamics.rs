//! Survival probability on a long finite chain, and its decomposition into
//! contributions of the discrete (pole) spectrum.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::feshbach::{continue_self_energy, effective_matrix, seed_grid, solve_from_seeds, Branch, NonlinearPole};
use crate::model::LatticeModel;
use crate::poles::PoleClass;
use crate::series::{check_grid, TimeSeries};

pub const MIN_SITES: usize = 401;
pub const RESIDUE_RADIUS: f64 = 1e-3;
pub const RESIDUE_NODES: usize = 64;

/// Eigenvalues of the finite chain and the weights `|⟨n|0⟩|²` of the
/// initial site (system site 1) on each eigenvector.
#[derive(Debug, Clone)]
pub struct LocalSpectrum {
    pub energies: Vec<f64>,
    pub weights: Vec<f64>,
    pub sites: usize,
}

/// Checks that a chain of `total_sites` is long enough that nothing
/// reflected from its ends returns to the system before `t_max`.
pub fn check_sites(m: &LatticeModel, total_sites: usize, t_max: f64) -> Result<()> {
    if total_sites % 2 == 0 || total_sites < MIN_SITES {
        return Err(Error::InvalidInput(format!(
            "site count must be odd and at least {MIN_SITES}, got {total_sites}"
        )));
    }
    let front = 2.0 * m.lead_hopping() * t_max.abs();
    if !((total_sites as f64) > 2.0 * front + m.system_sites() as f64) {
        return Err(Error::BoundaryReflection {
            sites: total_sites,
            t_max,
        });
    }
    Ok(())
}

pub fn local_spectrum(m: &LatticeModel, total_sites: usize) -> Result<LocalSpectrum> {
    let (h, start): (DMatrix<f64>, usize) = m.finite_chain(total_sites)?;
    let eig = SymmetricEigen::new(h);
    let weights = eig.eigenvectors.row(start).iter().map(|v| v * v).collect();
    Ok(LocalSpectrum {
        energies: eig.eigenvalues.iter().copied().collect(),
        weights,
        sites: total_sites,
    })
}

impl LocalSpectrum {
    /// `⟨0| e^{-iHt} |0⟩`.
    pub fn amplitude(&self, t: f64) -> Complex64 {
        let (mut re, mut im) = (0.0, 0.0);
        for (&e, &w) in self.energies.iter().zip(&self.weights) {
            let (s, c) = (e * t).sin_cos();
            re += w * c;
            im -= w * s;
        }
        Complex64::new(re, im)
    }
}

/// `P(t) = |⟨0| e^{-iHt} |0⟩|²` for the first system site. Every grid
/// point, negative times included, is evaluated directly.
pub fn evolve_survival(m: &LatticeModel, total_sites: usize, t_grid: &[f64]) -> Result<TimeSeries<f64>> {
    check_grid(t_grid, true)?;
    let t_max = t_grid.iter().fold(0.0f64, |a, t| a.max(t.abs()));
    check_sites(m, total_sites, t_max)?;
    let spectrum = local_spectrum(m, total_sites)?;
    Ok(survival_from_spectrum(&spectrum, t_grid))
}

pub fn survival_from_spectrum(spectrum: &LocalSpectrum, t_grid: &[f64]) -> TimeSeries<f64> {
    let values = t_grid.par_iter().map(|&t| spectrum.amplitude(t).norm_sqr()).collect();
    TimeSeries::new("P", t_grid.to_vec(), values)
}

fn contact_green(m: &LatticeModel, e: Complex64, sigma: Complex64) -> Result<Complex64> {
    let n = m.system_sites();
    let a = DMatrix::from_diagonal_element(n, n, e) - effective_matrix(m, sigma);
    let inv = a.try_inverse().ok_or(Error::NonFinite("contact Green's function"))?;
    Ok(inv[(0, 0)])
}

fn contour_residue(m: &LatticeModel, pole: &NonlinearPole, radius: f64) -> Result<Complex64> {
    let j = m.lead_hopping();
    let mut sum = Complex64::new(0.0, 0.0);
    for k in 0..RESIDUE_NODES {
        let phase = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / RESIDUE_NODES as f64);
        let e = pole.energy + radius * phase;
        let sigma = continue_self_energy(e, j, pole.self_energy);
        sum += contact_green(m, e, sigma)? * phase;
    }
    Ok(sum * radius / RESIDUE_NODES as f64)
}

/// Residue of `[E - H_eff(E)]⁻¹₁₁` at a pole, with the self-energy
/// continued around the circle from its value at the pole.
pub fn pole_residue(m: &LatticeModel, pole: &NonlinearPole) -> Result<Complex64> {
    let j = m.lead_hopping();
    let edge = (pole.energy - 2.0 * j).norm().min((pole.energy + 2.0 * j).norm());
    if edge < 2.0 * RESIDUE_RADIUS {
        return Err(Error::BandEdge { energy: pole.energy });
    }
    let c = contour_residue(m, pole, RESIDUE_RADIUS)?;
    let check = contour_residue(m, pole, RESIDUE_RADIUS / 2.0)?;
    if (c - check).norm() > 1e-6 * c.norm().max(1e-300) {
        // A radius-dependent residue means another singularity sits inside
        // the circle.
        return Err(Error::ExceptionalPoint {
            condition: (c - check).norm() / c.norm(),
        });
    }
    Ok(c)
}

/// Time window on which a pole's term is part of the expansion: resonant
/// poles describe `t > 0`, anti-resonant ones `t < 0`, bound states all
/// times. Anti-bound poles are not included.
fn attributed(class: PoleClass, t: f64) -> bool {
    match class {
        PoleClass::Bound => true,
        PoleClass::Resonant => t > 0.0,
        PoleClass::AntiResonant => t < 0.0,
        PoleClass::AntiBound | PoleClass::Unphysical => false,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PoleTerm {
    pub pole: NonlinearPole,
    pub residue: Complex64,
    /// `|c_n e^{-iE_n t}|²` on the attributed half of the grid, zero elsewhere.
    pub contribution: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PoleDecomposition {
    pub t: Vec<f64>,
    pub survival: Vec<f64>,
    /// `|Σ c_n e^{-iE_n t}|²` over each class.
    pub resonant: Vec<f64>,
    pub anti_resonant: Vec<f64>,
    pub bound: Vec<f64>,
    /// `P(t)` minus the squared modulus of the coherent pole sum: the
    /// background from the band continuum.
    pub residual: Vec<f64>,
    pub terms: Vec<PoleTerm>,
}

/// Splits a computed survival series into pole contributions.
pub fn decompose(m: &LatticeModel, survival: &TimeSeries<f64>, poles: &[NonlinearPole]) -> Result<PoleDecomposition> {
    let terms: Vec<(NonlinearPole, Complex64)> = poles
        .par_iter()
        .filter(|p| !matches!(p.class, PoleClass::AntiBound | PoleClass::Unphysical))
        .map(|p| Ok((*p, pole_residue(m, p)?)))
        .collect::<Result<_>>()?;
    let amplitude = |p: &NonlinearPole, c: Complex64, t: f64| c * (Complex64::new(0.0, -t) * p.energy).exp();

    let n = survival.len();
    let mut out = PoleDecomposition {
        t: survival.t.clone(),
        survival: survival.values.clone(),
        resonant: vec![0.0; n],
        anti_resonant: vec![0.0; n],
        bound: vec![0.0; n],
        residual: vec![0.0; n],
        terms: Vec::with_capacity(terms.len()),
    };
    for (i, &t) in survival.t.iter().enumerate() {
        let mut by_class = [Complex64::new(0.0, 0.0); 3];
        for (p, c) in &terms {
            if !attributed(p.class, t) {
                continue;
            }
            let slot = match p.class {
                PoleClass::Resonant => 0,
                PoleClass::AntiResonant => 1,
                _ => 2,
            };
            by_class[slot] += amplitude(p, *c, t);
        }
        out.resonant[i] = by_class[0].norm_sqr();
        out.anti_resonant[i] = by_class[1].norm_sqr();
        out.bound[i] = by_class[2].norm_sqr();
        let coherent: Complex64 = by_class.iter().sum();
        out.residual[i] = survival.values[i] - coherent.norm_sqr();
    }
    for (p, c) in terms {
        let contribution = survival
            .t
            .iter()
            .map(|&t| if attributed(p.class, t) { amplitude(&p, c, t).norm_sqr() } else { 0.0 })
            .collect();
        out.terms.push(PoleTerm {
            pole: p,
            residue: c,
            contribution,
        });
    }
    Ok(out)
}

/// Poles of both branches from the default seed grids, merged.
pub fn discrete_spectrum(m: &LatticeModel) -> Vec<NonlinearPole> {
    let mut poles = solve_from_seeds(m, Branch::Retarded, &seed_grid(m, Branch::Retarded)).poles;
    for p in solve_from_seeds(m, Branch::Advanced, &seed_grid(m, Branch::Advanced)).poles {
        if !poles.iter().any(|q| (q.energy - p.energy).norm() < 1e-8) {
            poles.push(p);
        }
    }
    poles.sort_by(|a, b| a.energy.re.total_cmp(&b.energy.re).then(a.energy.im.total_cmp(&b.energy.im)));
    poles
}

/// Evolution followed by decomposition over the poles found by
/// [`discrete_spectrum`].
pub fn pole_decomposition(m: &LatticeModel, total_sites: usize, t_grid: &[f64]) -> Result<PoleDecomposition> {
    let survival = evolve_survival(m, total_sites, t_grid)?;
    decompose(m, &survival, &discrete_spectrum(m))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    /// `-d ln P / dt` over the local maxima in the window.
    pub rate: f64,
    pub intercept: f64,
    pub maxima: usize,
}

/// Least-squares slope of `ln P` through the local maxima of `P` with
/// `t ∈ [t_lo, t_hi]`; the maxima follow the envelope rather than the beats.
pub fn fit_decay_rate(series: &TimeSeries<f64>, t_lo: f64, t_hi: f64) -> Result<DecayFit> {
    let (t, p) = (&series.t, &series.values);
    let points: Vec<(f64, f64)> = (1..p.len().saturating_sub(1))
        .filter(|&i| p[i] > p[i - 1] && p[i] > p[i + 1] && t[i] >= t_lo && t[i] <= t_hi && p[i] > 0.0)
        .map(|i| (t[i], p[i].ln()))
        .collect();
    if points.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "fewer than two local maxima of P in [{t_lo}, {t_hi}]"
        )));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    Ok(DecayFit {
        rate: -slope,
        intercept: my - slope * mx,
        maxima: points.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feshbach::solve_nonlinear_eig;
    use crate::oracles as common;
    use crate::series::symmetric_grid;

    #[test]
    fn site_guard() {
        let m = LatticeModel::double_dot();
        assert!(check_sites(&m, 400, 1.0).is_err());
        assert!(check_sites(&m, 399, 1.0).is_err());
        assert!(matches!(check_sites(&m, 401, 100.0), Err(Error::BoundaryReflection { .. })));
        assert!(check_sites(&m, 401, 99.0).is_ok());
    }

    #[test]
    fn free_chain_follows_bessel() {
        let m = LatticeModel::single_impurity(0.0, 1.0).unwrap();
        let grid = symmetric_grid(10.0, 100);
        let p = evolve_survival(&m, 401, &grid).unwrap();
        assert!((p.values[100] - 1.0).abs() < 1e-12);
        for (t, v) in p.iter() {
            let oracle = common::bessel_j0(2.0 * t).powi(2);
            assert!((v - oracle).abs() < 1e-8, "t = {t}: {v} vs {oracle}");
        }
    }

    #[test]
    fn survival_is_time_symmetric() {
        let m = LatticeModel::double_dot();
        let grid = symmetric_grid(20.0, 200);
        let p = evolve_survival(&m, 401, &grid).unwrap();
        let n = grid.len();
        for i in 0..n {
            assert!((p.values[i] - p.values[n - 1 - i]).abs() < 1e-10);
        }
    }

    #[test]
    fn impurity_bound_residue_is_the_localized_weight() {
        // Bound state of a single impurity: ψ_j ∝ x^{|j|} with x = -Σ/J, so
        // |ψ_0|² = (1 - x²)/(1 + x²).
        let m = LatticeModel::single_impurity(1.0, 1.0).unwrap();
        let pole = solve_nonlinear_eig(&m, Branch::Retarded, Complex64::new(2.3, 0.0)).unwrap();
        let x = pole.self_energy.re.abs();
        let c = pole_residue(&m, &pole).unwrap();
        assert!((c.re - (1.0 - x * x) / (1.0 + x * x)).abs() < 1e-12, "{c}");
        assert!(c.im.abs() < 1e-12);
    }

    #[test]
    fn resonant_and_anti_resonant_terms_mirror() {
        let m = LatticeModel::double_dot();
        let grid = symmetric_grid(15.0, 150);
        let d = pole_decomposition(&m, 401, &grid).unwrap();
        let n = grid.len();
        for i in 0..n {
            assert!((d.resonant[i] - d.anti_resonant[n - 1 - i]).abs() < 1e-10);
        }
        let res = d.terms.iter().find(|t| t.pole.class == PoleClass::Resonant).unwrap();
        let gamma = 2.0 * res.pole.energy.im.abs();
        let (i0, i1) = (160, 250);
        let ratio = res.contribution[i1] / res.contribution[i0];
        assert!((ratio - (-gamma * (grid[i1] - grid[i0])).exp()).abs() < 1e-10);
        // Past the initial transient the two resonances carry nearly all of P.
        assert!(d.residual[160..].iter().all(|r| r.abs() < 0.01));
    }

    #[test]
    fn decay_fit_recovers_exponential() {
        let t: Vec<f64> = (0..2001).map(|i| i as f64 * 0.01).collect();
        let p = t.iter().map(|x| (-0.3 * x).exp() * (1.0 + 0.5 * (3.0 * x).cos())).collect();
        let fit = fit_decay_rate(&TimeSeries::new("P", t, p), 1.0, 19.0).unwrap();
        assert!((fit.rate - 0.3).abs() < 0.01, "{fit:?}");
    }
}
