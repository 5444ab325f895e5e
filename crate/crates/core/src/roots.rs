//! Certified zeros of analytic functions inside rectangles of the complex
//! plane.
//!
//! Zeros are counted with the argument principle: the phase of `f` is
//! tracked around the rectangle with adaptive sampling so consecutive
//! samples never differ in phase by π/2 or more. Rectangles are bisected
//! until each holds at most one zero, which is then refined by Newton's
//! method and certified by a winding count of one in a tiny isolating box.

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{Error, Result};

/// Axis-aligned rectangle in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rect {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Rect {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Result<Self> {
        let all_finite = [re_min, re_max, im_min, im_max].iter().all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::NonFinite("rectangle"));
        }
        if re_min >= re_max || im_min >= im_max {
            return Err(Error::InvalidInput(format!(
                "empty rectangle [{re_min}, {re_max}]x[{im_min}, {im_max}]"
            )));
        }
        Ok(Self {
            re_min,
            re_max,
            im_min,
            im_max,
        })
    }

    /// Square of half-width `radius` centred on `z`.
    pub fn around(z: Complex64, radius: f64) -> Self {
        Self {
            re_min: z.re - radius,
            re_max: z.re + radius,
            im_min: z.im - radius,
            im_max: z.im + radius,
        }
    }

    pub fn width(&self) -> f64 {
        self.re_max - self.re_min
    }

    pub fn height(&self) -> f64 {
        self.im_max - self.im_min
    }

    pub fn center(&self) -> Complex64 {
        Complex64::new(
            0.5 * (self.re_min + self.re_max),
            0.5 * (self.im_min + self.im_max),
        )
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re_min && z.re <= self.re_max && z.im >= self.im_min && z.im <= self.im_max
    }

    /// Chebyshev distance from `z` to the rectangle (0 inside).
    pub fn distance_to(&self, z: Complex64) -> f64 {
        let dx = (self.re_min - z.re).max(z.re - self.re_max).max(0.0);
        let dy = (self.im_min - z.im).max(z.im - self.im_max).max(0.0);
        dx.max(dy)
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re_min, self.im_min),
            Complex64::new(self.re_max, self.im_min),
            Complex64::new(self.re_max, self.im_max),
            Complex64::new(self.re_min, self.im_max),
        ]
    }

    fn grown(&self, delta: f64) -> Self {
        Self {
            re_min: self.re_min - delta,
            re_max: self.re_max + delta,
            im_min: self.im_min - delta,
            im_max: self.im_max + delta,
        }
    }

    /// Split perpendicular to the longer side at fraction `frac`.
    fn split(&self, frac: f64) -> (Self, Self) {
        if self.width() >= self.height() {
            let x = self.re_min + frac * self.width();
            (
                Self { re_max: x, ..*self },
                Self { re_min: x, ..*self },
            )
        } else {
            let y = self.im_min + frac * self.height();
            (
                Self { im_max: y, ..*self },
                Self { im_min: y, ..*self },
            )
        }
    }

    /// Cover `self` minus the open squares of half-width `radius` around
    /// each point in `holes` with disjoint rectangles.
    pub fn excluding(&self, holes: &[Complex64], radius: f64) -> Vec<Rect> {
        let mut pieces = vec![*self];
        for &h in holes {
            let hole = Rect::around(h, radius);
            let mut next = Vec::new();
            for r in pieces {
                let overlaps = hole.re_min < r.re_max
                    && hole.re_max > r.re_min
                    && hole.im_min < r.im_max
                    && hole.im_max > r.im_min;
                if !overlaps {
                    next.push(r);
                    continue;
                }
                let cut = Rect {
                    re_min: hole.re_min.max(r.re_min),
                    re_max: hole.re_max.min(r.re_max),
                    im_min: hole.im_min.max(r.im_min),
                    im_max: hole.im_max.min(r.im_max),
                };
                let candidates = [
                    Rect { re_max: cut.re_min, ..r },
                    Rect { re_min: cut.re_max, ..r },
                    Rect { re_min: cut.re_min, re_max: cut.re_max, im_max: cut.im_min, ..r },
                    Rect { re_min: cut.re_min, re_max: cut.re_max, im_min: cut.im_max, ..r },
                ];
                next.extend(candidates.into_iter().filter(|c| c.width() > 0.0 && c.height() > 0.0));
            }
            pieces = next;
        }
        pieces
    }
}

/// Tolerances for [`find_roots`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SearchConfig {
    /// Maximum bisection depth below the starting rectangle.
    pub max_depth: usize,
    /// `|f|` below this on a contour sample means a zero is too close.
    pub boundary_tolerance: f64,
    /// Half-width of the certification box around each refined root.
    pub isolation_radius: f64,
    /// Roots closer than this are merged.
    pub dedup_tolerance: f64,
    pub newton_max_iterations: usize,
    /// Relative step of the central-difference derivative.
    pub derivative_step: f64,
    /// Certified roots must have `|f| <` this.
    pub residual_tolerance: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            max_depth: 48,
            boundary_tolerance: 1e-9,
            isolation_radius: 1e-6,
            dedup_tolerance: 1e-8,
            newton_max_iterations: 100,
            derivative_step: 1e-7,
            residual_tolerance: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RefinedRoot {
    pub z: Complex64,
    pub residual: f64,
    pub newton_iterations: usize,
    /// Winding count of the isolating box (or of the last box when the
    /// root could not be refined).
    pub winding: i64,
    pub certified: bool,
}

/// One bisection step: the parent count and the counts of its two halves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Subdivision {
    pub parent: Rect,
    pub parent_count: i64,
    pub children: [(Rect, i64); 2],
}

impl Subdivision {
    pub fn is_additive(&self) -> bool {
        self.parent_count == self.children[0].1 + self.children[1].1
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct RootSearch {
    pub roots: Vec<RefinedRoot>,
    pub subdivisions: Vec<Subdivision>,
    /// Total zero count over the searched rectangles.
    pub total_count: i64,
}

const EDGE_SAMPLES: usize = 16;
const MAX_SAMPLES: usize = 1 << 20;

/// Change of phase of `f` along the segment `a → b`, with adaptive
/// bisection keeping every step below π/2.
fn edge_phase<F>(f: &F, a: Complex64, b: Complex64, tol: f64) -> std::result::Result<f64, EdgeFailure>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let eval = |z: Complex64| -> std::result::Result<Complex64, EdgeFailure> {
        let v = f(z).map_err(EdgeFailure::Function)?;
        if !v.is_finite() {
            return Err(EdgeFailure::Function(Error::NonFinite("contour function")));
        }
        if v.norm() < tol {
            return Err(EdgeFailure::Proximity);
        }
        Ok(v)
    };
    let min_len = 1e-14 * (a.norm() + b.norm()).max(1.0);
    let mut total = 0.0;
    let mut samples = 0usize;
    let mut za = a;
    let mut fa = eval(a)?;
    // Stack of pending right endpoints, nearest on top.
    let mut stack: Vec<(Complex64, Complex64)> = Vec::new();
    for i in (1..=EDGE_SAMPLES).rev() {
        let z = a + (b - a) * (i as f64 / EDGE_SAMPLES as f64);
        stack.push((z, Complex64::new(f64::NAN, 0.0)));
    }
    while let Some((zb, cached)) = stack.pop() {
        let fb = if cached.re.is_nan() { eval(zb)? } else { cached };
        samples += 1;
        let step = (fb / fa).arg();
        if step.abs() < FRAC_PI_2 {
            total += step;
            za = zb;
            fa = fb;
            continue;
        }
        if (zb - za).norm() < min_len || samples > MAX_SAMPLES {
            return Err(EdgeFailure::Proximity);
        }
        let zm = 0.5 * (za + zb);
        let fm = eval(zm)?;
        stack.push((zb, fb));
        stack.push((zm, fm));
    }
    Ok(total)
}

enum EdgeFailure {
    Proximity,
    Function(Error),
}

/// Number of zeros of `f` inside `rect`, without perturbation.
pub fn winding_count_exact<F>(f: &F, rect: &Rect, boundary_tolerance: f64) -> Result<i64>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let c = rect.corners();
    let mut total = 0.0;
    for i in 0..4 {
        match edge_phase(f, c[i], c[(i + 1) % 4], boundary_tolerance) {
            Ok(p) => total += p,
            Err(EdgeFailure::Function(e)) => return Err(e),
            Err(EdgeFailure::Proximity) => {
                return Err(Error::BoundaryProximity {
                    re_min: rect.re_min,
                    re_max: rect.re_max,
                    im_min: rect.im_min,
                    im_max: rect.im_max,
                })
            }
        }
    }
    let turns = total / (2.0 * PI);
    let n = turns.round();
    if (turns - n).abs() > 1e-6 {
        return Err(Error::InvalidInput(format!("non-integer winding {turns}")));
    }
    Ok(n as i64)
}

/// Zero count with up to five outward perturbations of the rectangle when a
/// zero sits on its boundary. Returns the count and the rectangle used.
pub fn winding_count<F>(f: &F, rect: &Rect, boundary_tolerance: f64) -> Result<(i64, Rect)>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let scale = rect.width().max(rect.height());
    let mut last = None;
    for attempt in 0..=5 {
        let r = if attempt == 0 {
            *rect
        } else {
            rect.grown(scale * 1e-3 * PERTURBATIONS[attempt - 1])
        };
        match winding_count_exact(f, &r, boundary_tolerance) {
            Ok(n) => return Ok((n, r)),
            Err(e @ Error::BoundaryProximity { .. }) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt was made"))
}

const PERTURBATIONS: [f64; 5] = [0.137, 0.291, 0.473, 0.619, 0.853];
const SPLIT_FRACTIONS: [f64; 6] = [0.5, 0.4714, 0.5331, 0.4418, 0.5627, 0.4129];

/// Newton's method with a central-difference derivative.
pub fn newton<F>(f: &F, z0: Complex64, cfg: &SearchConfig) -> Result<(Complex64, usize)>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let mut z = z0;
    let mut fz = f(z)?;
    for it in 1..=cfg.newton_max_iterations {
        if fz == Complex64::new(0.0, 0.0) {
            return Ok((z, it - 1));
        }
        let h = cfg.derivative_step * z.norm().max(1.0);
        let df = (f(z + h)? - f(z - h)?) / (2.0 * h);
        if df == Complex64::new(0.0, 0.0) || !df.is_finite() {
            break;
        }
        let step = fz / df;
        z -= step;
        fz = f(z)?;
        if !z.is_finite() {
            break;
        }
        if step.norm() <= 1e-14 * z.norm().max(1.0) {
            return Ok((z, it));
        }
    }
    Err(Error::NoConvergence {
        iterations: cfg.newton_max_iterations,
        last: z,
        residual: fz.norm(),
    })
}

fn certify<F>(f: &F, z: Complex64, iters: usize, cfg: &SearchConfig) -> Result<RefinedRoot>
where
    F: Fn(Complex64) -> Result<Complex64>,
{
    let residual = f(z)?.norm();
    let iso = Rect::around(z, cfg.isolation_radius);
    let winding = match winding_count(f, &iso, cfg.boundary_tolerance * 1e-3) {
        Ok((n, _)) => n,
        Err(Error::BoundaryProximity { .. }) => -1,
        Err(e) => return Err(e),
    };
    Ok(RefinedRoot {
        z,
        residual,
        newton_iterations: iters,
        winding,
        certified: winding == 1 && residual < cfg.residual_tolerance,
    })
}

fn split_counted<F>(f: &F, rect: &Rect, cfg: &SearchConfig) -> Result<Option<[(Rect, i64); 2]>>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    for frac in SPLIT_FRACTIONS {
        let (a, b) = rect.split(frac);
        let (ca, cb) = rayon::join(
            || winding_count_exact(f, &a, cfg.boundary_tolerance),
            || winding_count_exact(f, &b, cfg.boundary_tolerance),
        );
        match (ca, cb) {
            (Ok(na), Ok(nb)) => return Ok(Some([(a, na), (b, nb)])),
            (Err(e), _) | (_, Err(e)) if !matches!(e, Error::BoundaryProximity { .. }) => return Err(e),
            _ => continue,
        }
    }
    Ok(None)
}

/// Locate every zero of `f` inside `window`.
///
/// Every bisection performed is logged in [`RootSearch::subdivisions`];
/// roots that cannot be isolated or refined are still reported, with
/// `certified == false`.
pub fn find_roots<F>(f: &F, window: &Rect, cfg: &SearchConfig) -> Result<RootSearch>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    let (count, start) = winding_count(f, window, cfg.boundary_tolerance)?;
    let mut out = RootSearch {
        total_count: count,
        ..Default::default()
    };
    let mut queue = vec![(start, count, 0usize)];
    while let Some((rect, n, depth)) = queue.pop() {
        if n <= 0 {
            continue;
        }
        if n == 1 {
            if let Ok((z, iters)) = newton(f, rect.center(), cfg) {
                if rect.grown(cfg.isolation_radius).contains(z) {
                    out.roots.push(certify(f, z, iters, cfg)?);
                    continue;
                }
            }
        }
        let children = if depth < cfg.max_depth {
            split_counted(f, &rect, cfg)?
        } else {
            None
        };
        match children {
            Some(children) => {
                out.subdivisions.push(Subdivision {
                    parent: rect,
                    parent_count: n,
                    children,
                });
                // Push in reverse so the lower half is processed first.
                for (r, c) in children.into_iter().rev() {
                    queue.push((r, c, depth + 1));
                }
            }
            None => {
                let z = rect.center();
                log::warn!("unresolved zero cluster (count {n}) near {z}");
                out.roots.push(RefinedRoot {
                    z,
                    residual: f(z)?.norm(),
                    newton_iterations: 0,
                    winding: n,
                    certified: false,
                });
            }
        }
    }
    dedup_roots(&mut out.roots, cfg.dedup_tolerance);
    Ok(out)
}

/// Search several rectangles and merge the results.
pub fn find_roots_in<F>(f: &F, windows: &[Rect], cfg: &SearchConfig) -> Result<RootSearch>
where
    F: Fn(Complex64) -> Result<Complex64> + Sync,
{
    let mut merged = RootSearch::default();
    for w in windows {
        let part = find_roots(f, w, cfg)?;
        merged.total_count += part.total_count;
        merged.roots.extend(part.roots);
        merged.subdivisions.extend(part.subdivisions);
    }
    dedup_roots(&mut merged.roots, cfg.dedup_tolerance);
    Ok(merged)
}

/// Sort lexicographically by (Re, Im) and merge near-duplicates, keeping the
/// certified one (or the smaller residual).
pub fn dedup_roots(roots: &mut Vec<RefinedRoot>, tol: f64) {
    roots.sort_by(|a, b| a.z.re.total_cmp(&b.z.re).then(a.z.im.total_cmp(&b.z.im)));
    let mut kept: Vec<RefinedRoot> = Vec::with_capacity(roots.len());
    for r in roots.drain(..) {
        match kept.iter_mut().find(|k| (k.z - r.z).norm() < tol) {
            Some(k) => {
                let better = (r.certified && !k.certified)
                    || (r.certified == k.certified && r.residual < k.residual);
                if better {
                    *k = r;
                }
            }
            None => kept.push(r),
        }
    }
    kept.sort_by(|a, b| a.z.re.total_cmp(&b.z.re).then(a.z.im.total_cmp(&b.z.im)));
    *roots = kept;
}
