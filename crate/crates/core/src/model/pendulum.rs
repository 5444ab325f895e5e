use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::Matrix2;

use crate::error::{Error, Result};
use crate::series::{check_grid, TimeSeries};

/// Two identical pendulums with frequency `omega` joined by a spring `alpha`.
///
/// Equations of motion: `ẍ = -K x` with
/// `K = [[ω² + α, -α], [-α, ω² + α]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumPair {
    omega: f64,
    alpha: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormalMode {
    pub frequency: f64,
    pub vector: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PendulumState {
    pub x: [f64; 2],
    pub v: [f64; 2],
}

impl PendulumPair {
    pub fn new(omega: f64, alpha: f64) -> Result<Self> {
        if !(omega.is_finite() && alpha.is_finite()) {
            return Err(Error::NonFinite("pendulum parameters"));
        }
        if omega <= 0.0 {
            return Err(Error::InvalidInput("omega must be positive".into()));
        }
        if alpha < 0.0 {
            return Err(Error::InvalidInput("coupling alpha must be non-negative".into()));
        }
        Ok(Self { omega, alpha })
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn stiffness(&self) -> Matrix2<f64> {
        let d = self.omega * self.omega + self.alpha;
        Matrix2::new(d, -self.alpha, -self.alpha, d)
    }

    /// In-phase mode at `ω`, then the anti-phase mode at `√(ω² + 2α)`.
    pub fn modes(&self) -> [NormalMode; 2] {
        [
            NormalMode {
                frequency: self.omega,
                vector: [FRAC_1_SQRT_2, FRAC_1_SQRT_2],
            },
            NormalMode {
                frequency: (self.omega * self.omega + 2.0 * self.alpha).sqrt(),
                vector: [FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
            },
        ]
    }

    /// Exact state at time `t` by superposing the two normal modes.
    pub fn state_at(&self, x0: [f64; 2], v0: [f64; 2], t: f64) -> PendulumState {
        let mut x = [0.0; 2];
        let mut v = [0.0; 2];
        for mode in self.modes() {
            let u = mode.vector;
            let w = mode.frequency;
            let a = u[0] * x0[0] + u[1] * x0[1];
            let b = (u[0] * v0[0] + u[1] * v0[1]) / w;
            let (s, c) = (w * t).sin_cos();
            let q = a * c + b * s;
            let dq = w * (b * c - a * s);
            for i in 0..2 {
                x[i] += q * u[i];
                v[i] += dq * u[i];
            }
        }
        PendulumState { x, v }
    }

    /// Positions on `t_grid`.
    pub fn evolve(&self, x0: [f64; 2], v0: [f64; 2], t_grid: &[f64]) -> Result<TimeSeries<[f64; 2]>> {
        check_grid(t_grid, false)?;
        let values = t_grid.iter().map(|&t| self.state_at(x0, v0, t).x).collect();
        Ok(TimeSeries::new("pendulum positions", t_grid.to_vec(), values))
    }

    /// Conserved energy `½|v|² + ½ xᵀK x`.
    pub fn energy(&self, state: &PendulumState) -> f64 {
        let [x1, x2] = state.x;
        let [v1, v2] = state.v;
        let w2 = self.omega * self.omega;
        0.5 * (v1 * v1 + v2 * v2)
            + 0.5 * w2 * (x1 * x1 + x2 * x2)
            + 0.5 * self.alpha * (x1 - x2) * (x1 - x2)
    }
}
