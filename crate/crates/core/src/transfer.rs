//! Transfer matrices and scattering coefficients for piecewise-constant
//! potentials.
//!
//! Outside the support a solution is `a e^{ik(x - x₀)} + b e^{-ik(x - x₀)}`,
//! with the phase referenced at a point `x₀` (the support edges `∓ℓ` by
//! default). A [`TransferMatrix`] maps `(a, b)` on the left to `(c, d)` on
//! the right. Inside each piece the local wavenumber obeys `q² = k² − v`;
//! the propagator for `(ψ, ψ')` depends on `q²` only, so everything here is
//! analytic in complex `k` away from `k = 0`.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::Potential1D;

/// Largest `|Im(q)|·width` accepted in a single propagation factor.
pub const EXPONENT_GUARD: f64 = 700.0;

/// Below this `|q|·width` the degenerate (linear-in-x) propagator is used.
const DEGENERATE_THRESHOLD: f64 = 1e-6;

/// 2e²/h in siemens (exact SI constants).
pub const CONDUCTANCE_QUANTUM: f64 = 2.0 * 1.602_176_634e-19 * 1.602_176_634e-19 / 6.626_070_15e-34;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub k: Complex64,
    pub m: Matrix2<Complex64>,
}

impl TransferMatrix {
    pub fn det(&self) -> Complex64 {
        self.m.determinant()
    }

    /// `A/C` for a purely outgoing right-hand wave: the element whose zeros
    /// are the Siegert poles.
    pub fn incoming(&self) -> Complex64 {
        self.m[(1, 1)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScatteringResult {
    pub energy: f64,
    /// Reflection amplitude `B/A`.
    pub r: Complex64,
    /// Transmission amplitude `C/A`.
    pub t: Complex64,
    pub reflection: f64,
    pub transmission: f64,
}

fn check_k(k: Complex64) -> Result<()> {
    if !k.is_finite() {
        return Err(Error::NonFinite("wavenumber"));
    }
    if k == Complex64::new(0.0, 0.0) {
        return Err(Error::ZeroWavenumber);
    }
    Ok(())
}

/// `(ψ, ψ')` propagator across a constant piece of width `w` with `q² = k² − v`.
pub(crate) fn piece_propagator(q2: Complex64, w: f64) -> Result<Matrix2<Complex64>> {
    let q = q2.sqrt();
    let qw = q * w;
    if qw.norm() < DEGENERATE_THRESHOLD {
        let z2 = q2 * w * w;
        let c = Complex64::new(1.0, 0.0) - z2 / 2.0;
        let s = (Complex64::new(1.0, 0.0) - z2 / 6.0) * w;
        return Ok(Matrix2::new(c, s, -q2 * s, c));
    }
    let exponent = qw.im.abs();
    if exponent > EXPONENT_GUARD {
        return Err(Error::Overflow { exponent });
    }
    let c = qw.cos();
    let s = qw.sin() / q;
    Ok(Matrix2::new(c, s, -q2 * s, c))
}

/// Map of `(ψ, ψ')` from `x_from` to `x_to` (`x_from ≤ x_to`).
pub fn propagator(p: &Potential1D, k: Complex64, x_from: f64, x_to: f64) -> Result<Matrix2<Complex64>> {
    check_k(k)?;
    if !(x_from.is_finite() && x_to.is_finite()) {
        return Err(Error::NonFinite("propagation interval"));
    }
    if x_from > x_to {
        return Err(Error::InvalidInput("propagation must run left to right".into()));
    }
    let mut cuts: Vec<f64> = p
        .segments()
        .iter()
        .flat_map(|s| [s.x_left, s.x_right])
        .filter(|&x| x > x_from && x < x_to)
        .collect();
    cuts.push(x_from);
    cuts.push(x_to);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let k2 = k * k;
    let mut total = Matrix2::identity();
    for w in cuts.windows(2) {
        let width = w[1] - w[0];
        if width <= 0.0 {
            continue;
        }
        let v = p.potential_at(0.5 * (w[0] + w[1]));
        total = piece_propagator(k2 - v, width)? * total;
    }
    Ok(total)
}

fn amplitude_basis(k: Complex64) -> (Matrix2<Complex64>, Matrix2<Complex64>) {
    let ik = I * k;
    let s = Matrix2::new(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), ik, -ik);
    let half = Complex64::new(0.5, 0.0);
    let inv = Matrix2::new(half, half / ik, half, -half / ik);
    (s, inv)
}

/// Transfer matrix between arbitrary reference points `x_from ≤ x_to`.
pub fn transfer_between(p: &Potential1D, k: Complex64, x_from: f64, x_to: f64) -> Result<TransferMatrix> {
    let prop = propagator(p, k, x_from, x_to)?;
    let (s, s_inv) = amplitude_basis(k);
    Ok(TransferMatrix { k, m: s_inv * prop * s })
}

/// Transfer matrix referenced at the support edges `∓ℓ`.
pub fn transfer_matrix(p: &Potential1D, k: Complex64) -> Result<TransferMatrix> {
    let ell = p.halfwidth();
    transfer_between(p, k, -ell, ell)
}

/// Plane-wave amplitudes `(a, b)` at reference `x₀` from `(ψ, ψ')` there.
pub(crate) fn amplitudes_from_state(k: Complex64, state: [Complex64; 2]) -> [Complex64; 2] {
    let (_, s_inv) = amplitude_basis(k);
    let v = s_inv * nalgebra::Vector2::new(state[0], state[1]);
    [v[0], v[1]]
}

/// Reflection and transmission for a wave incident from the left at energy
/// `E = k² > 0`.
pub fn scattering_amplitudes(p: &Potential1D, energy: f64) -> Result<ScatteringResult> {
    if !energy.is_finite() {
        return Err(Error::NonFinite("energy"));
    }
    if energy <= 0.0 {
        return Err(Error::InvalidInput(format!("scattering energy must be positive, got {energy}")));
    }
    let tm = transfer_matrix(p, Complex64::new(energy.sqrt(), 0.0))?;
    let m11 = tm.m[(1, 1)];
    let t = Complex64::new(1.0, 0.0) / m11;
    let r = -tm.m[(1, 0)] / m11;
    Ok(ScatteringResult {
        energy,
        r,
        t,
        reflection: r.norm_sqr(),
        transmission: t.norm_sqr(),
    })
}

/// Same as [`scattering_amplitudes`] for a wave incident from the right.
pub fn scattering_from_right(p: &Potential1D, energy: f64) -> Result<ScatteringResult> {
    scattering_amplitudes(&p.mirrored(), energy)
}

/// Landauer conductance at the Fermi energy in units of 2e²/h.
pub fn landauer_conductance(p: &Potential1D, fermi_energy: f64) -> Result<f64> {
    Ok(scattering_amplitudes(p, fermi_energy)?.transmission)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Segment;
    use std::f64::consts::PI;

    use crate::oracles as common;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn free_space_is_identity() {
        let p = Potential1D::free();
        for k in [c(1.0, 0.0), c(0.3, -2.0), c(-4.0, 1.5)] {
            let tm = transfer_matrix(&p, k).unwrap();
            assert!((tm.m - Matrix2::identity()).norm() < 1e-15);
        }
        let s = scattering_amplitudes(&p, 1.0).unwrap();
        assert_eq!(s.t, c(1.0, 0.0));
        assert_eq!(s.r, c(0.0, 0.0));
        assert_eq!(landauer_conductance(&p, 1.0).unwrap(), 1.0);
    }

    #[test]
    fn square_well_matches_closed_form() {
        let p = Potential1D::square_well(1.0, 1.0).unwrap();
        let tm = transfer_matrix(&p, c(1.0, 0.0)).unwrap();
        assert!((tm.det() - 1.0).norm() < 1e-12);
        let s = scattering_amplitudes(&p, 1.0).unwrap();
        let oracle = common::square_well_transmission(1.0, 1.0, c(1.0, 0.0));
        assert!((s.t - oracle).norm() < 1e-13, "{} vs {}", s.t, oracle);
        assert!((s.reflection + s.transmission - 1.0).abs() < 1e-12);
    }

    #[test]
    fn transmission_resonances_are_perfect() {
        let p = Potential1D::square_well(1.0, 1.0).unwrap();
        for n in 1..5 {
            let q = n as f64 * PI / 2.0;
            let e = q * q - 1.0;
            let s = scattering_amplitudes(&p, e).unwrap();
            assert!((s.transmission - 1.0).abs() < 1e-12, "n={n} T={}", s.transmission);
            assert!((landauer_conductance(&p, e).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn barrier_matches_closed_form() {
        let p = Potential1D::square_barrier(4.0, 0.5).unwrap();
        let s = scattering_amplitudes(&p, 1.0).unwrap();
        let oracle = common::square_well_transmission(-4.0, 0.5, c(1.0, 0.0));
        assert!((s.t - oracle).norm() < 1e-13);
        assert!(s.transmission > 0.0 && s.transmission < 1.0);
        assert!((s.reflection + s.transmission - 1.0).abs() < 1e-10);
        assert_eq!(landauer_conductance(&p, 1.0).unwrap(), s.transmission);
    }

    #[test]
    fn bound_state_zeroes_incoming_element() {
        let p = Potential1D::square_well(1.0, 1.0).unwrap();
        let roots = common::square_well_bound_kappas(1.0, 1.0);
        assert_eq!(roots.len(), 1);
        let tm = transfer_matrix(&p, c(0.0, roots[0])).unwrap();
        assert!(tm.incoming().norm() < 1e-12, "{}", tm.incoming());
    }

    #[test]
    fn complex_k_stays_unimodular() {
        let p = Potential1D::new(vec![Segment::new(-1.0, -0.2, 3.0), Segment::new(0.1, 0.8, -2.0)]).unwrap();
        for k in [c(2.0, -0.5), c(-1.0, -3.0), c(0.2, 4.5), c(5.0, 5.0)] {
            let det = transfer_matrix(&p, k).unwrap().det();
            // Rounding in the product grows with the size of the evanescent factors.
            let scale = propagator(&p, k, -1.0, 1.0).unwrap().norm().powi(2);
            assert!((det - 1.0).norm() < 1e-10f64.max(1e-14 * scale), "k={k} det={det}");
        }
    }

    #[test]
    fn degenerate_propagator_is_continuous() {
        // q = 0 exactly inside the segment when k² = v.
        let p = Potential1D::square_barrier(1.0, 1.0).unwrap();
        let exact = transfer_matrix(&p, c(1.0, 0.0)).unwrap().m;
        let near = transfer_matrix(&p, c(1.0 + 1e-9, 0.0)).unwrap().m;
        assert!((exact - near).norm() < 1e-7);
        assert!((exact.determinant() - 1.0).norm() < 1e-14);
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = Potential1D::square_well(1.0, 1.0).unwrap();
        assert!(matches!(transfer_matrix(&p, c(0.0, 0.0)), Err(Error::ZeroWavenumber)));
        assert!(transfer_matrix(&p, c(f64::NAN, 0.0)).is_err());
        assert!(scattering_amplitudes(&p, 0.0).is_err());
        assert!(scattering_amplitudes(&p, -1.0).is_err());
        let thick = Potential1D::square_barrier(1.0, 200.0).unwrap();
        assert!(matches!(transfer_matrix(&thick, c(0.0, 2.0)), Err(Error::Overflow { .. })));
    }

    #[test]
    fn composition_of_halves() {
        let p = Potential1D::new(vec![
            Segment::new(-1.0, -0.3, 2.5),
            Segment::new(-0.3, 0.0, -1.0),
            Segment::new(0.0, 0.6, 0.7),
            Segment::new(0.6, 1.0, -3.0),
        ])
        .unwrap();
        for k in [c(1.3, 0.0), c(2.0, -0.7)] {
            let whole = transfer_matrix(&p, k).unwrap().m;
            let left = transfer_between(&p, k, -1.0, 0.0).unwrap().m;
            let right = transfer_between(&p, k, 0.0, 1.0).unwrap().m;
            assert!((whole - right * left).norm() < 1e-12 * whole.norm());
        }
    }

    #[test]
    fn conductance_quantum_value() {
        assert!((CONDUCTANCE_QUANTUM - 7.748_091_729e-5).abs() < 1e-13);
    }
}
