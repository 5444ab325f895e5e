//! Why Siegert states escape the Hermitian framework, and how probability
//! is still conserved once the integration window moves with the wave front.

use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Potential1D, UnitSystem};
use crate::poles::{ComplexPole, PoleClass};
use crate::series::{check_grid, TimeSeries};
use crate::transfer::{amplitudes_from_state, piece_propagator, EXPONENT_GUARD};

/// Largest admissible incoming amplitude at `-ℓ`, relative to the outgoing one.
pub const MATCHING_TOLERANCE: f64 = 1e-8;

const QUADRATURE_POINTS: usize = 32;

#[derive(Debug, Clone, Copy)]
struct InteriorPiece {
    x_left: f64,
    x_right: f64,
    q2: Complex64,
    /// `(ψ, ψ')` at `x_right`.
    right_state: [Complex64; 2],
}

/// Siegert state of a certified pole, normalized so that `ψ(ℓ) = 1`.
///
/// Outside the support the state is `b e^{-ik(x+ℓ)}` on the left and
/// `e^{ik(x-ℓ)}` on the right, i.e. `B = b e^{-ikℓ}` and `C = e^{-ikℓ}` in
/// the unreferenced form `B e^{-ikx}`, `C e^{ikx}`.
#[derive(Debug, Clone)]
pub struct SiegertWavefunction {
    pub pole: ComplexPole,
    pub halfwidth: f64,
    /// Left outgoing amplitude referenced at `-ℓ`.
    pub b: Complex64,
    /// Incoming amplitude left over at `-ℓ` relative to `1 + |b|`.
    pub matching_residual: f64,
    pub samples: Vec<(f64, Complex64)>,
    pieces: Vec<InteriorPiece>,
}

fn propagate(q2: Complex64, w: f64, state: [Complex64; 2]) -> Result<[Complex64; 2]> {
    let m = piece_propagator(q2, w)?;
    Ok([
        m[(0, 0)] * state[0] + m[(0, 1)] * state[1],
        m[(1, 0)] * state[0] + m[(1, 1)] * state[1],
    ])
}

/// Integrates the exact piecewise solution leftward from `x = ℓ`, where the
/// state is a pure outgoing wave.
pub fn build_wavefunction(p: &Potential1D, pole: &ComplexPole, grid_step: f64) -> Result<SiegertWavefunction> {
    if !pole.certified {
        return Err(Error::InvalidInput("wavefunction requested for an uncertified pole".into()));
    }
    if pole.class == PoleClass::Unphysical {
        return Err(Error::InvalidInput(format!("pole at k = {} is unphysical", pole.k)));
    }
    if p.is_free() {
        return Err(Error::InvalidInput("free space has no Siegert states".into()));
    }
    if !(grid_step.is_finite() && grid_step > 0.0) {
        return Err(Error::InvalidInput(format!("grid step must be positive, got {grid_step}")));
    }
    let k = pole.k;
    let k2 = k * k;
    let ik = Complex64::new(0.0, 1.0) * k;

    let mut state = [Complex64::new(1.0, 0.0), ik];
    let mut pieces = Vec::new();
    for piece in p.pieces().iter().rev() {
        let q2 = k2 - piece.v;
        pieces.push(InteriorPiece {
            x_left: piece.x_left,
            x_right: piece.x_right,
            q2,
            right_state: state,
        });
        state = propagate(q2, -piece.width(), state)?;
    }
    pieces.reverse();

    let [a, b] = amplitudes_from_state(k, state);
    let matching_residual = a.norm() / (1.0 + b.norm());
    if !(matching_residual < MATCHING_TOLERANCE) {
        return Err(Error::SpuriousPole {
            residual: matching_residual,
        });
    }

    let ell = p.halfwidth();
    let n = ((2.0 * ell / grid_step).ceil() as usize).max(1);
    let mut w = SiegertWavefunction {
        pole: *pole,
        halfwidth: ell,
        b,
        matching_residual,
        samples: Vec::with_capacity(n + 1),
        pieces,
    };
    let h = 2.0 * ell / n as f64;
    for i in 0..=n {
        let x = if i == n { ell } else { -ell + h * i as f64 };
        w.samples.push((x, w.eval(x)?));
    }
    Ok(w)
}

impl SiegertWavefunction {
    pub fn k(&self) -> Complex64 {
        self.pole.k
    }

    /// Unreferenced exterior amplitudes `(B, C)`.
    pub fn exterior_amplitudes(&self) -> (Complex64, Complex64) {
        let phase = (Complex64::new(0.0, -1.0) * self.k() * self.halfwidth).exp();
        (self.b * phase, phase)
    }

    fn exterior_exponent(&self, x: f64) -> Result<()> {
        let exponent = self.k().im.abs() * (x.abs() - self.halfwidth);
        if exponent > EXPONENT_GUARD {
            return Err(Error::Overflow { exponent });
        }
        Ok(())
    }

    /// `(ψ(x), ψ'(x))`.
    pub fn state(&self, x: f64) -> Result<[Complex64; 2]> {
        if !x.is_finite() {
            return Err(Error::NonFinite("position"));
        }
        let k = self.k();
        let ik = Complex64::new(0.0, 1.0) * k;
        let ell = self.halfwidth;
        if x >= ell {
            self.exterior_exponent(x)?;
            let psi = (ik * (x - ell)).exp();
            return Ok([psi, ik * psi]);
        }
        if x <= -ell {
            self.exterior_exponent(x)?;
            let psi = self.b * (-ik * (x + ell)).exp();
            return Ok([psi, -ik * psi]);
        }
        let piece = self
            .pieces
            .iter()
            .find(|s| x >= s.x_left && x <= s.x_right)
            .expect("pieces tile the support");
        propagate(piece.q2, x - piece.x_right, piece.right_state)
    }

    pub fn eval(&self, x: f64) -> Result<Complex64> {
        Ok(self.state(x)?[0])
    }

    /// `∫_{-ℓ}^{ℓ} |ψ|² dx`.
    pub fn interior_norm(&self) -> Result<f64> {
        let rule = GaussLegendre::new(NonZeroUsize::new(QUADRATURE_POINTS).unwrap());
        let mut total = 0.0;
        for piece in &self.pieces {
            let mut failure = None;
            total += rule.integrate(piece.x_left, piece.x_right, |x| {
                match propagate(piece.q2, x - piece.x_right, piece.right_state) {
                    Ok(s) => s[0].norm_sqr(),
                    Err(e) => {
                        failure = Some(e);
                        0.0
                    }
                }
            });
            if let Some(e) = failure {
                return Err(e);
            }
        }
        Ok(total)
    }

    /// `∫_{ℓ}^{L} |ψ|² + ∫_{-L}^{-ℓ} |ψ|²`, in closed form.
    pub fn exterior_norm(&self, big_l: f64) -> Result<f64> {
        let d = big_l - self.halfwidth;
        self.exterior_exponent(big_l)?;
        Ok((1.0 + self.b.norm_sqr()) * exterior_integral(-self.k().im, d))
    }
}

/// `∫_0^d e^{2γx} dx`.
fn exterior_integral(gamma: f64, d: f64) -> f64 {
    if gamma == 0.0 {
        d
    } else {
        (2.0 * gamma * d).exp_m1() / (2.0 * gamma)
    }
}

/// `[ψ* ψ']` between `-L` and `L`.
///
/// Both ends contribute `ik |ψ|²`, so the imaginary part is
/// `Re k (|ψ(L)|² + |ψ(-L)|²)`: zero for states on the imaginary axis and
/// growing with `L` for resonances.
pub fn surface_term(w: &SiegertWavefunction, big_l: f64) -> Result<Complex64> {
    if !(big_l.is_finite() && big_l > w.halfwidth) {
        return Err(Error::InvalidInput(format!(
            "surface must lie outside the support (L = {big_l}, ℓ = {})",
            w.halfwidth
        )));
    }
    let [psi_r, dpsi_r] = w.state(big_l)?;
    let [psi_l, dpsi_l] = w.state(-big_l)?;
    Ok(psi_r.conj() * dpsi_r - psi_l.conj() * dpsi_l)
}

/// True when the wave front moves slower than the state spreads, a regime
/// in which conservation in the expanding window is not guaranteed.
pub fn is_near_threshold(pole: &ComplexPole) -> bool {
    matches!(pole.class, PoleClass::Resonant | PoleClass::AntiResonant) && pole.k.re.abs() < pole.k.im.abs()
}

fn check_window(w: &SiegertWavefunction, l0: f64, t_grid: &[f64]) -> Result<()> {
    if !(l0.is_finite() && l0 > w.halfwidth) {
        return Err(Error::InvalidInput(format!(
            "initial window L0 = {l0} must exceed the support half-width {}",
            w.halfwidth
        )));
    }
    check_grid(t_grid, false)?;
    match w.pole.class {
        PoleClass::Resonant if t_grid.iter().any(|&t| t < 0.0) => Err(Error::InvalidInput(
            "resonant windows expand forward in time; t must be non-negative".into(),
        )),
        PoleClass::AntiResonant if t_grid.iter().any(|&t| t > 0.0) => Err(Error::InvalidInput(
            "anti-resonant windows expand backward in time; t must be non-positive".into(),
        )),
        PoleClass::Unphysical => Err(Error::InvalidInput("unphysical pole".into())),
        _ => Ok(()),
    }
}

/// `N(t) = ∫_{-L(t)}^{L(t)} |e^{-iEt} ψ|² dx` with `L(t) = L0 + 2 Re k · t`.
pub fn expanding_norm(w: &SiegertWavefunction, l0: f64, t_grid: &[f64]) -> Result<TimeSeries<f64>> {
    expanding_norm_with_speed(w, l0, t_grid, UnitSystem::front_speed(w.k()))
}

/// [`expanding_norm`] with an arbitrary window speed.
pub fn expanding_norm_with_speed(
    w: &SiegertWavefunction,
    l0: f64,
    t_grid: &[f64],
    speed: f64,
) -> Result<TimeSeries<f64>> {
    check_window(w, l0, t_grid)?;
    if !speed.is_finite() {
        return Err(Error::NonFinite("window speed"));
    }
    if is_near_threshold(&w.pole) {
        log::warn!(
            "pole k = {} is near threshold (|Re k| < |Im k|); window conservation may not hold",
            w.k()
        );
    }
    let interior = w.interior_norm()?;
    let growth = 2.0 * UnitSystem::energy(w.k()).im;
    let gamma = -w.k().im;
    let tails = 1.0 + w.b.norm_sqr();
    let values = t_grid
        .par_iter()
        .map(|&t| {
            let d = l0 + speed * t - w.halfwidth;
            if d < 0.0 {
                return Err(Error::InvalidInput(format!("window shrank inside the support at t = {t}")));
            }
            let decay = growth * t;
            if decay.abs() > EXPONENT_GUARD || (gamma * d).abs() > EXPONENT_GUARD {
                return Err(Error::Overflow {
                    exponent: decay.abs().max((gamma * d).abs()),
                });
            }
            let exterior = if gamma == 0.0 {
                tails * d * decay.exp()
            } else {
                tails * ((decay + 2.0 * gamma * d).exp() - decay.exp()) / (2.0 * gamma)
            };
            Ok(decay.exp() * interior + exterior)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TimeSeries::new("N", t_grid.to_vec(), values))
}

/// Bulk and window-edge contributions to `dN/dt` at one instant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FluxBalance {
    pub t: f64,
    /// `2 Im E ∫|Ψ|²`.
    pub bulk: f64,
    /// `(2 Re k)(|Ψ(L)|² + |Ψ(-L)|²)`.
    pub boundary: f64,
}

impl FluxBalance {
    pub fn relative_mismatch(&self) -> f64 {
        (self.bulk + self.boundary).abs() / self.bulk.abs().max(self.boundary.abs()).max(f64::MIN_POSITIVE)
    }
}

pub fn flux_balance(w: &SiegertWavefunction, l0: f64, t_grid: &[f64]) -> Result<Vec<FluxBalance>> {
    let norms = expanding_norm(w, l0, t_grid)?;
    let speed = UnitSystem::front_speed(w.k());
    let growth = 2.0 * UnitSystem::energy(w.k()).im;
    t_grid
        .iter()
        .zip(&norms.values)
        .map(|(&t, &n)| {
            let big_l = l0 + speed * t;
            let edge = (w.eval(big_l)?.norm_sqr() + w.eval(-big_l)?.norm_sqr()) * (growth * t).exp();
            Ok(FluxBalance {
                t,
                bulk: growth * n,
                boundary: speed * edge,
            })
        })
        .collect()
}

/// Five-point finite-difference derivative on a uniform grid, one-sided at
/// the ends.
pub fn five_point_derivative(series: &TimeSeries<f64>) -> Result<Vec<f64>> {
    let (t, y) = (&series.t, &series.values);
    let n = t.len();
    if n < 5 {
        return Err(Error::InvalidInput("need at least 5 samples to differentiate".into()));
    }
    let h = (t[n - 1] - t[0]) / (n - 1) as f64;
    if !(h > 0.0) || t.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1.0)) {
        return Err(Error::InvalidInput("derivative needs a uniform increasing grid".into()));
    }
    let forward = |i: usize| {
        (-25.0 * y[i] + 48.0 * y[i + 1] - 36.0 * y[i + 2] + 16.0 * y[i + 3] - 3.0 * y[i + 4]) / (12.0 * h)
    };
    let backward = |i: usize| {
        (25.0 * y[i] - 48.0 * y[i - 1] + 36.0 * y[i - 2] - 16.0 * y[i - 3] + 3.0 * y[i - 4]) / (12.0 * h)
    };
    Ok((0..n)
        .map(|i| match i {
            0 | 1 => forward(i),
            _ if i + 2 >= n => backward(i),
            _ => (y[i - 2] - 8.0 * y[i - 1] + 8.0 * y[i + 1] - y[i + 2]) / (12.0 * h),
        })
        .collect())
}
