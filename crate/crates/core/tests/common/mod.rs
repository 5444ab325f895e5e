//! Independent oracles shared by unit and integration tests.
//!
//! Nothing here calls into the crate's numerical routines.

use num_complex::Complex64;

/// Closed-form transmission amplitude of a square well of `depth` on
/// `[-a, a]`, with phases referenced at the well edges. A barrier is a
/// negative depth.
pub fn square_well_transmission(depth: f64, a: f64, k: Complex64) -> Complex64 {
    let q = (k * k + depth).sqrt();
    let i = Complex64::new(0.0, 1.0);
    let denom = (2.0 * q * a).cos() - i * (q * q + k * k) / (2.0 * q * k) * (2.0 * q * a).sin();
    Complex64::new(1.0, 0.0) / denom
}

pub fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let mut flo = f(lo);
    assert!(flo * f(hi) <= 0.0, "no sign change on [{lo}, {hi}]");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Bound-state decay constants κ of a square well (depth `v0`, half-width
/// `a`), from the even (`q tan qa = κ`) and odd (`-q cot qa = κ`) matching
/// conditions, solved by bisection in κ. Sorted descending (deepest first).
pub fn square_well_bound_kappas(v0: f64, a: f64) -> Vec<f64> {
    use std::f64::consts::FRAC_PI_2;
    let kmax = v0.sqrt();
    let q_of = |kappa: f64| (v0 - kappa * kappa).max(0.0).sqrt();
    // Matching conditions multiplied through by cos/sin to remove poles.
    let even = |kappa: f64| {
        let q = q_of(kappa);
        q * (q * a).sin() - kappa * (q * a).cos()
    };
    let odd = |kappa: f64| {
        let q = q_of(kappa);
        -q * (q * a).cos() - kappa * (q * a).sin()
    };
    let z0 = kmax * a;
    let kappa_at = |z: f64| (z0 * z0 - z * z).max(0.0).sqrt() / a;
    let mut roots = Vec::new();
    let mut n = 0;
    loop {
        let z_lo = n as f64 * FRAC_PI_2;
        if z_lo >= z0 {
            break;
        }
        let z_hi = ((n + 1) as f64 * FRAC_PI_2).min(z0);
        // κ decreases as z = qa increases; parity alternates per quarter period.
        let (k_hi, k_lo) = (kappa_at(z_lo), kappa_at(z_hi));
        let f: &dyn Fn(f64) -> f64 = if n % 2 == 0 { &even } else { &odd };
        let eps = 1e-14 * kmax.max(1.0);
        let lo = k_lo.max(eps);
        let hi = (k_hi - eps).max(lo);
        if hi > lo && f(lo) * f(hi) < 0.0 {
            roots.push(bisect(lo, hi, f));
        }
        n += 1;
    }
    roots.sort_by(|a, b| b.total_cmp(a));
    roots
}

/// Classical RK4 for `ẍ = -K x` with a 2×2 stiffness `K`.
pub fn rk4_pendulum(
    k: [[f64; 2]; 2],
    x0: [f64; 2],
    v0: [f64; 2],
    t_end: f64,
    steps: usize,
) -> ([f64; 2], [f64; 2]) {
    let accel = |x: [f64; 2]| {
        [
            -(k[0][0] * x[0] + k[0][1] * x[1]),
            -(k[1][0] * x[0] + k[1][1] * x[1]),
        ]
    };
    let add = |a: [f64; 2], b: [f64; 2], s: f64| [a[0] + s * b[0], a[1] + s * b[1]];
    let h = t_end / steps as f64;
    let (mut x, mut v) = (x0, v0);
    for _ in 0..steps {
        let k1x = v;
        let k1v = accel(x);
        let k2x = add(v, k1v, h / 2.0);
        let k2v = accel(add(x, k1x, h / 2.0));
        let k3x = add(v, k2v, h / 2.0);
        let k3v = accel(add(x, k2x, h / 2.0));
        let k4x = add(v, k3v, h);
        let k4v = accel(add(x, k3x, h));
        for i in 0..2 {
            x[i] += h / 6.0 * (k1x[i] + 2.0 * k2x[i] + 2.0 * k3x[i] + k4x[i]);
            v[i] += h / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
        }
    }
    (x, v)
}

/// Bessel J₀ by its power series.
pub fn bessel_j0(x: f64) -> f64 {
    let y = 0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut m = 1.0;
    while m < 1000.0 {
        term *= -y / (m * m);
        sum += term;
        if m > y.sqrt() && term.abs() < 1e-20 {
            break;
        }
        m += 1.0;
    }
    sum
}

/// Eigenvalues of a 2×2 complex matrix from its characteristic polynomial.
pub fn eig2(a: [[Complex64; 2]; 2]) -> [Complex64; 2] {
    let tr = a[0][0] + a[1][1];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let disc = (tr * tr - 4.0 * det).sqrt();
    [(tr + disc) / 2.0, (tr - disc) / 2.0]
}
