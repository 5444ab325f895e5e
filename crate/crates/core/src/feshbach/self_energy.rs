use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Which side of the real axis the lead Green's function is approached
/// from: `E + i0` (outgoing waves) or `E - i0` (incoming waves).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Retarded,
    Advanced,
}

impl Branch {
    pub fn conjugate(self) -> Self {
        match self {
            Branch::Retarded => Branch::Advanced,
            Branch::Advanced => Branch::Retarded,
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Retarded => "ret",
            Branch::Advanced => "adv",
        })
    }
}

impl FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ret" | "retarded" => Ok(Branch::Retarded),
            "adv" | "advanced" => Ok(Branch::Advanced),
            _ => Err(Error::InvalidInput(format!("unknown branch '{s}' (expected ret or adv)"))),
        }
    }
}

/// Self-energy of one semi-infinite lead seen from its end site, per unit
/// `(g/J)²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SelfEnergy {
    pub branch: Branch,
    pub energy: Complex64,
    pub value: Complex64,
}

/// Relative distance to `±2J` below which an energy counts as a band edge.
pub const BAND_EDGE_TOLERANCE: f64 = 1e-12;

pub(crate) fn check_hopping(j: f64) -> Result<()> {
    if !(j.is_finite() && j > 0.0) {
        return Err(Error::InvalidInput(format!("lead hopping must be positive, got {j}")));
    }
    Ok(())
}

/// Root of `Σ² - EΣ + J² = 0` written as `(E - s)/2`, evaluated without
/// cancellation through the product of the two roots.
fn stable_root(e: Complex64, s: Complex64, j: f64) -> Complex64 {
    let small = e - s;
    let large = e + s;
    if small.norm() >= large.norm() {
        small / 2.0
    } else {
        2.0 * j * j / large
    }
}

/// `Σ(E)` for a lead of hopping `J`.
///
/// Off the real axis the retarded branch is `(E - i√(4J² - E²))/2` with the
/// principal root, analytic in the upper half-plane and continued through
/// the band `[-2J, 2J]` into the lower one; the advanced branch is its
/// mirror image. Both cuts run along the real axis outside the band, where
/// the boundary value is the decaying real root.
pub fn lead_self_energy(energy: Complex64, j: f64, branch: Branch) -> Result<SelfEnergy> {
    check_hopping(j)?;
    if !energy.is_finite() {
        return Err(Error::NonFinite("energy"));
    }
    let edge = 2.0 * j;
    if (energy - edge).norm() < BAND_EDGE_TOLERANCE * j || (energy + edge).norm() < BAND_EDGE_TOLERANCE * j {
        return Err(Error::BandEdge { energy });
    }
    let value = if energy.im == 0.0 && energy.re.abs() > edge {
        let e = energy.re;
        let root = (e * e - edge * edge).sqrt();
        Complex64::new(stable_root(energy, Complex64::new(e.signum() * root, 0.0), j).re, 0.0)
    } else {
        let i = Complex64::new(0.0, 1.0);
        let s = i * (edge * edge - energy * energy).sqrt();
        match branch {
            Branch::Retarded => stable_root(energy, s, j),
            Branch::Advanced => stable_root(energy, -s, j),
        }
    };
    Ok(SelfEnergy { branch, energy, value })
}

/// Continues `Σ` to `energy` from a nearby value `reference`: the root of
/// `Σ² - EΣ + J² = 0` closest to it.
pub fn continue_self_energy(energy: Complex64, j: f64, reference: Complex64) -> Complex64 {
    let disc = (energy * energy - 4.0 * j * j).sqrt();
    let a = stable_root(energy, disc, j);
    let b = stable_root(energy, -disc, j);
    if (a - reference).norm() <= (b - reference).norm() {
        a
    } else {
        b
    }
}

/// Lead quasi-momentum `κ` with `Σ = -J e^{iκ}`, `Re κ ∈ (-π, π]`.
pub fn kappa_from_self_energy(sigma: Complex64, j: f64) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    -i * (-sigma / j).ln()
}

/// Dispersion of the leads, `E = -2J cos κ`.
pub fn lead_energy(kappa: Complex64, j: f64) -> Complex64 {
    -2.0 * j * kappa.cos()
}
