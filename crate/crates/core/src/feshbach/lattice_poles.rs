use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::model::LatticeModel;
use crate::poles::{refine_on_vertical, ComplexPole, PoleClass, SearchWindow, Sheet, ORIGIN_EXCLUSION};
use crate::roots::{self, RootSearch, SearchConfig, Subdivision};

/// Exterior weight `(|B|² + |C|²)/‖v‖²` below which a null vector is a
/// bound state of the isolated system rather than a Siegert state.
const EXTERIOR_THRESHOLD: f64 = 1e-8;

/// Default κ window: one Brillouin zone, widened so that roots on
/// `Re κ = ±π` sit strictly inside.
pub fn default_kappa_window() -> SearchWindow {
    SearchWindow::new((-PI - 0.2, PI + 0.2), (-2.0, 2.0))
}

/// Wrap `Re κ` into `(-π, π]`.
pub fn normalize_kappa(kappa: Complex64) -> Complex64 {
    let mut re = kappa.re.rem_euclid(2.0 * PI);
    if re > PI {
        re -= 2.0 * PI;
    }
    Complex64::new(re, kappa.im)
}

/// Lattice analogue of [`crate::poles::classify`]: the axes are `Re κ = 0`
/// and `Re κ = π`, and outgoing waves have `0 < Re κ < π`.
pub fn classify_kappa(kappa: Complex64, axis_tolerance: f64) -> PoleClass {
    let kappa = normalize_kappa(kappa);
    let on_axis = kappa.re.abs() < axis_tolerance || PI - kappa.re.abs() < axis_tolerance;
    if on_axis {
        if kappa.im > 0.0 {
            PoleClass::Bound
        } else {
            PoleClass::AntiBound
        }
    } else if kappa.im < 0.0 {
        if kappa.re > 0.0 {
            PoleClass::Resonant
        } else {
            PoleClass::AntiResonant
        }
    } else {
        PoleClass::Unphysical
    }
}

/// Linear system for `[B, ψ_1 … ψ_N, C]` with `ψ = B e^{iκ|j|}` on the left
/// lead and `C e^{iκ(j-N-1)}` on the right, at `E = -2J cos κ`.
pub fn siegert_matrix(m: &LatticeModel, kappa: Complex64) -> DMatrix<Complex64> {
    let n = m.system_sites();
    let j = m.lead_hopping();
    let (gl, gr) = m.coupling();
    let e = -2.0 * j * kappa.cos();
    let lead_end = e + j * (Complex64::new(0.0, 1.0) * kappa).exp();
    let h = m.system_hamiltonian();
    let mut a = DMatrix::zeros(n + 2, n + 2);
    a[(0, 0)] = lead_end;
    a[(0, 1)] = Complex64::new(gl, 0.0);
    a[(n + 1, n + 1)] = lead_end;
    a[(n + 1, n)] = Complex64::new(gr, 0.0);
    for r in 0..n {
        for c in 0..n {
            a[(r + 1, c + 1)] = -Complex64::new(h[(r, c)], 0.0);
        }
        a[(r + 1, r + 1)] += e;
    }
    a[(1, 0)] += gl;
    a[(n, n + 1)] += gr;
    a
}

pub fn siegert_determinant(m: &LatticeModel, kappa: Complex64) -> Complex64 {
    siegert_matrix(m, kappa).determinant()
}

/// Share of the null vector carried by the lead amplitudes.
pub fn exterior_weight(m: &LatticeModel, kappa: Complex64) -> f64 {
    let a = siegert_matrix(m, kappa);
    let n = a.ncols();
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let (idx, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .expect("non-empty");
    let row = v_t.row(idx);
    (row[0].norm_sqr() + row[n - 1].norm_sqr()) / row.norm_squared()
}

#[derive(Debug, Clone, Serialize)]
pub struct LatticePoleSearch {
    pub poles: Vec<ComplexPole>,
    pub subdivisions: Vec<Subdivision>,
    pub total_count: i64,
    /// Roots dropped because the state never leaves the system.
    pub interior_only: usize,
}

/// Siegert poles of a tight-binding model in the complex κ plane.
///
/// Small squares around every `κ ∈ πℤ` (the band edges) are removed from
/// the window. Roots are mapped into `Re κ ∈ (-π, π]`, merged and sorted.
pub fn lattice_siegert_poles(m: &LatticeModel, window: &SearchWindow) -> Result<LatticePoleSearch> {
    let rect = window.rect()?;
    let cfg = SearchConfig {
        max_depth: window.max_depth,
        ..SearchConfig::default()
    };
    let f = |kappa: Complex64| Ok(siegert_determinant(m, kappa));
    let first = (rect.re_min / PI).floor() as i64;
    let last = (rect.re_max / PI).ceil() as i64;
    let holes: Vec<Complex64> = (first..=last).map(|n| Complex64::new(n as f64 * PI, 0.0)).collect();
    let pieces = rect.excluding(&holes, ORIGIN_EXCLUSION);
    let RootSearch {
        roots: found,
        subdivisions,
        total_count,
    } = roots::find_roots_in(&f, &pieces, &cfg)?;

    let j = m.lead_hopping();
    let mut poles = Vec::new();
    let mut interior_only = 0;
    for r in &found {
        let mut kappa = normalize_kappa(r.z);
        let mut residual = r.residual;
        let mut certified = r.certified;
        let mut iterations = r.newton_iterations;
        let mut energy = -2.0 * j * kappa.cos();
        if certified && matches!(classify_kappa(kappa, window.axis_tolerance), PoleClass::Bound | PoleClass::AntiBound) {
            let re = if kappa.re.abs() < 1.0 { 0.0 } else { PI };
            let (im, extra) = refine_on_vertical(&f, re, kappa.im)?;
            let snapped = Complex64::new(re, im);
            certified = (snapped - kappa).norm() < 1e-8;
            kappa = snapped;
            residual = siegert_determinant(m, kappa).norm();
            certified &= residual < cfg.residual_tolerance;
            iterations += extra;
            energy = Complex64::new(-2.0 * j * re.cos() * im.cosh(), 0.0);
        }
        if exterior_weight(m, kappa) < EXTERIOR_THRESHOLD {
            interior_only += 1;
            continue;
        }
        poles.push(ComplexPole {
            k: kappa,
            energy,
            sheet: if kappa.im > 0.0 { Sheet::First } else { Sheet::Second },
            class: classify_kappa(kappa, window.axis_tolerance),
            residual,
            newton_iterations: iterations,
            certified,
            winding: r.winding,
        });
    }
    poles.sort_by(|a, b| a.k.re.total_cmp(&b.k.re).then(a.k.im.total_cmp(&b.k.im)));
    let mut merged: Vec<ComplexPole> = Vec::with_capacity(poles.len());
    for p in poles {
        match merged.iter_mut().find(|q| (q.k - p.k).norm() < cfg.dedup_tolerance) {
            Some(q) if p.certified && !q.certified => *q = p,
            Some(_) => {}
            None => merged.push(p),
        }
    }
    Ok(LatticePoleSearch {
        poles: merged,
        subdivisions,
        total_count,
        interior_only,
    })
}
