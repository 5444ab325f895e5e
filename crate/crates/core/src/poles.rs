//! Discrete spectrum of a continuum potential: zeros of the incoming-wave
//! amplitude in the complex wavenumber plane.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Potential1D, UnitSystem};
use crate::roots::{self, Rect, RootSearch, SearchConfig, Subdivision};
use crate::transfer::transfer_matrix;

/// Location of a pole in the complex wavenumber plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PoleClass {
    /// Positive imaginary axis.
    Bound,
    /// Negative imaginary axis.
    AntiBound,
    /// Fourth quadrant.
    Resonant,
    /// Third quadrant.
    AntiResonant,
    /// Upper half-plane off the axis. Never a genuine pole of a real
    /// potential; only reachable through a numerical failure.
    Unphysical,
}

/// Riemann sheet of `E = k²`: the first sheet is `Im k > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sheet {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexPole {
    /// Wavenumber (for lattice poles: the lead quasi-momentum κ).
    pub k: Complex64,
    pub energy: Complex64,
    pub sheet: Sheet,
    pub class: PoleClass,
    pub residual: f64,
    pub newton_iterations: usize,
    pub certified: bool,
    pub winding: i64,
}

/// Rectangle of the complex `k` plane to search, with solver tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchWindow {
    pub re_k: (f64, f64),
    pub im_k: (f64, f64),
    pub max_depth: usize,
    pub axis_tolerance: f64,
}

/// Radius of the square cut out around `k = 0`.
pub const ORIGIN_EXCLUSION: f64 = 1e-3;

impl SearchWindow {
    pub fn new(re_k: (f64, f64), im_k: (f64, f64)) -> Self {
        Self {
            re_k,
            im_k,
            max_depth: SearchConfig::default().max_depth,
            axis_tolerance: 1e-9,
        }
    }

    pub fn rect(&self) -> Result<Rect> {
        Rect::new(self.re_k.0, self.re_k.1, self.im_k.0, self.im_k.1)
    }
}

pub fn classify(k: Complex64, axis_tolerance: f64) -> PoleClass {
    if k.re.abs() < axis_tolerance {
        if k.im > 0.0 {
            PoleClass::Bound
        } else {
            PoleClass::AntiBound
        }
    } else if k.im < 0.0 {
        if k.re > 0.0 {
            PoleClass::Resonant
        } else {
            PoleClass::AntiResonant
        }
    } else {
        PoleClass::Unphysical
    }
}

pub fn sheet_of(k: Complex64) -> Sheet {
    if k.im > 0.0 {
        Sheet::First
    } else {
        Sheet::Second
    }
}

/// Incoming amplitude `A/C` under purely outgoing normalization.
pub fn siegert_function(p: &Potential1D, k: Complex64) -> Result<Complex64> {
    Ok(transfer_matrix(p, k)?.incoming())
}

/// Number of Siegert zeros inside `rect` (argument principle).
pub fn winding_count(p: &Potential1D, rect: &Rect) -> Result<i64> {
    if rect.distance_to(Complex64::new(0.0, 0.0)) == 0.0 {
        return Err(Error::InvalidInput("counting box contains k = 0".into()));
    }
    let f = |k| siegert_function(p, k);
    Ok(roots::winding_count(&f, rect, SearchConfig::default().boundary_tolerance)?.0)
}

/// Outcome of [`find_poles`], including the bisection log.
#[derive(Debug, Clone, Serialize)]
pub struct PoleSearch {
    pub poles: Vec<ComplexPole>,
    pub subdivisions: Vec<Subdivision>,
    pub total_count: i64,
}

/// Newton iteration restricted to the vertical line `Re z = re`, for
/// functions that are real there.
pub(crate) fn refine_on_vertical<F>(f: &F, re: f64, im0: f64) -> Result<(f64, usize)>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut y = im0;
    for it in 1..=60 {
        let z = Complex64::new(re, y);
        let fz = f(z)?;
        if fz.norm() == 0.0 {
            return Ok((y, it));
        }
        let h = 1e-7 * y.abs().max(1.0);
        let dfdy = (f(Complex64::new(re, y + h))? - f(Complex64::new(re, y - h))?) / (2.0 * h);
        let step = (fz / dfdy).re;
        if !step.is_finite() {
            break;
        }
        y -= step;
        if step.abs() <= 1e-15 * y.abs().max(1.0) {
            return Ok((y, it));
        }
    }
    Err(Error::NoConvergence {
        iterations: 60,
        last: Complex64::new(re, y),
        residual: f(Complex64::new(re, y))?.norm(),
    })
}

fn to_pole<F>(f: &F, root: &roots::RefinedRoot, axis_tolerance: f64, residual_tolerance: f64) -> Result<ComplexPole>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let class = classify(root.z, axis_tolerance);
    let mut k = root.z;
    let mut residual = root.residual;
    let mut certified = root.certified;
    let mut iters = root.newton_iterations;
    if root.certified && matches!(class, PoleClass::Bound | PoleClass::AntiBound) {
        // f is real on the imaginary axis; re-solve there so the energy is
        // exactly real.
        let (im, extra) = refine_on_vertical(f, 0.0, k.im)?;
        k = Complex64::new(0.0, im);
        residual = f(k)?.norm();
        certified = residual < residual_tolerance && (k - root.z).norm() < 1e-8;
        iters += extra;
    }
    let energy = if k.re == 0.0 {
        Complex64::new(-k.im * k.im, 0.0)
    } else {
        UnitSystem::energy(k)
    };
    Ok(ComplexPole {
        k,
        energy,
        sheet: sheet_of(k),
        class: classify(k, axis_tolerance),
        residual,
        newton_iterations: iters,
        certified,
        winding: root.winding,
    })
}

/// All Siegert poles inside the window.
///
/// A small square around the branch point `k = 0` is removed from the
/// window first. Poles come back sorted by (Re k, Im k).
pub fn find_poles(p: &Potential1D, window: &SearchWindow) -> Result<PoleSearch> {
    let rect = window.rect()?;
    let cfg = SearchConfig {
        max_depth: window.max_depth,
        ..SearchConfig::default()
    };
    let f = |k: Complex64| siegert_function(p, k);
    if p.is_free() {
        return Ok(PoleSearch {
            poles: Vec::new(),
            subdivisions: Vec::new(),
            total_count: 0,
        });
    }
    let pieces = rect.excluding(&[Complex64::new(0.0, 0.0)], ORIGIN_EXCLUSION);
    let RootSearch {
        roots: found,
        subdivisions,
        total_count,
    } = roots::find_roots_in(&f, &pieces, &cfg)?;
    let mut poles = found
        .iter()
        .map(|r| to_pole(&f, r, window.axis_tolerance, cfg.residual_tolerance))
        .collect::<Result<Vec<_>>>()?;
    poles.sort_by(|a, b| a.k.re.total_cmp(&b.k.re).then(a.k.im.total_cmp(&b.k.im)));
    Ok(PoleSearch {
        poles,
        subdivisions,
        total_count,
    })
}
