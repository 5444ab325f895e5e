use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Eigenvector condition number above which a matrix is treated as
/// sitting at an exceptional point.
pub const MAX_CONDITION: f64 = 1e8;

/// Eigenvalues closer than this (relative to the spectral scale) are
/// bi-orthonormalized as one block.
const CLUSTER_TOLERANCE: f64 = 1e-8;

/// Right eigenvectors (columns of `right`) and left covectors (rows of
/// `left`) normalized so that `left · right = 1`.
#[derive(Debug, Clone)]
pub struct BiorthogonalSystem {
    pub eigenvalues: Vec<Complex64>,
    pub right: DMatrix<Complex64>,
    pub left: DMatrix<Complex64>,
    pub condition: f64,
}

/// Eigenvalues and unit eigenvectors of a complex matrix by Schur
/// decomposition and back-substitution on the triangular factor.
fn eigenpairs(a: &DMatrix<Complex64>) -> Result<(Vec<Complex64>, DMatrix<Complex64>)> {
    let n = a.nrows();
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NoConvergence {
            iterations: 10_000,
            last: Complex64::new(f64::NAN, f64::NAN),
            residual: f64::NAN,
        })?;
    let (q, t) = schur.unpack();
    let scale = t.norm().max(f64::MIN_POSITIVE);
    let lambdas: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (i, &lambda) in lambdas.iter().enumerate() {
        let mut y = DVector::zeros(n);
        y[i] = Complex64::new(1.0, 0.0);
        for r in (0..i).rev() {
            let mut s = Complex64::new(0.0, 0.0);
            for c in r + 1..=i {
                s += t[(r, c)] * y[c];
            }
            let mut denom = t[(r, r)] - lambda;
            if denom.norm() < f64::EPSILON * scale {
                denom = Complex64::new(f64::EPSILON * scale, 0.0);
            }
            y[r] = -s / denom;
        }
        let v = &q * y;
        let norm = v.norm();
        vecs.set_column(i, &(v / Complex64::new(norm, 0.0)));
    }
    Ok((lambdas, vecs))
}

fn clusters(values: &[Complex64], tol: f64) -> Vec<Vec<usize>> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, v) in values.iter().enumerate() {
        let hit: Vec<usize> = groups
            .iter()
            .enumerate()
            .filter(|(_, g)| g.iter().any(|&k| (values[k] - v).norm() < tol))
            .map(|(gi, _)| gi)
            .collect();
        match hit.first() {
            None => groups.push(vec![i]),
            Some(&first) => {
                for &gi in hit.iter().skip(1).rev() {
                    let g = groups.remove(gi);
                    groups[first].extend(g);
                }
                groups[first].push(i);
            }
        }
    }
    groups
}

impl BiorthogonalSystem {
    pub fn new(a: &DMatrix<Complex64>) -> Result<Self> {
        let n = a.nrows();
        if n == 0 || a.ncols() != n {
            return Err(Error::InvalidInput("biorthogonal system needs a non-empty square matrix".into()));
        }
        if a.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix"));
        }
        let (eigenvalues, right) = eigenpairs(a)?;
        let svd = right.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if !(condition < MAX_CONDITION) {
            return Err(Error::ExceptionalPoint { condition });
        }

        // Left vectors from an independent decomposition of A†, matched by
        // conjugate eigenvalue.
        let (mu, w) = eigenpairs(&a.adjoint())?;
        let mut used = vec![false; n];
        let mut raw_left = DMatrix::zeros(n, n);
        for (i, lambda) in eigenvalues.iter().enumerate() {
            let (best, _) = mu
                .iter()
                .enumerate()
                .filter(|(k, _)| !used[*k])
                .map(|(k, m)| (k, (m.conj() - lambda).norm()))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .expect("same dimension");
            used[best] = true;
            raw_left.set_row(i, &w.column(best).adjoint());
        }

        let scale = eigenvalues.iter().fold(1.0f64, |m, v| m.max(v.norm()));
        let mut left = DMatrix::zeros(n, n);
        for group in clusters(&eigenvalues, CLUSTER_TOLERANCE * scale) {
            let k = group.len();
            let mut gram = DMatrix::zeros(k, k);
            for (a_i, &r) in group.iter().enumerate() {
                for (b_i, &c) in group.iter().enumerate() {
                    gram[(a_i, b_i)] = (raw_left.row(r) * right.column(c))[(0, 0)];
                }
            }
            let inv = gram.try_inverse().ok_or(Error::ExceptionalPoint {
                condition: f64::INFINITY,
            })?;
            for (a_i, &r) in group.iter().enumerate() {
                let mut row = nalgebra::RowDVector::zeros(n);
                for (b_i, &c) in group.iter().enumerate() {
                    row += raw_left.row(c) * inv[(a_i, b_i)];
                }
                left.set_row(r, &row);
            }
        }
        Ok(Self {
            eigenvalues,
            right,
            left,
            condition,
        })
    }

    /// `max |φ_m · ψ_n - δ_mn|`.
    pub fn biorthogonality_residual(&self) -> f64 {
        let g = &self.left * &self.right;
        let n = g.nrows();
        let mut worst = 0.0f64;
        for r in 0..n {
            for c in 0..n {
                let target = if r == c { 1.0 } else { 0.0 };
                worst = worst.max((g[(r, c)] - target).norm());
            }
        }
        worst
    }

    /// `max |(Σ_n ψ_n φ_n - 1)_{ij}|`.
    pub fn completeness_residual(&self) -> f64 {
        let p = &self.right * &self.left;
        let n = p.nrows();
        (p - DMatrix::<Complex64>::identity(n, n)).iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn coefficients(&self, f: &DVector<Complex64>) -> Result<DVector<Complex64>> {
        if f.len() != self.right.nrows() {
            return Err(Error::InvalidInput(format!(
                "vector of length {} for a {}-dimensional system",
                f.len(),
                self.right.nrows()
            )));
        }
        Ok(&self.left * f)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BiorthogonalExpansion {
    pub eigenvalues: Vec<Complex64>,
    /// `f_n = φ_n · f`.
    pub coefficients: Vec<Complex64>,
    /// `Σ |f_n|²`.
    pub coefficient_probability: f64,
    /// `‖f‖²`.
    pub square_modulus: f64,
    /// `‖Σ f_n ψ_n - f‖`.
    pub reconstruction_residual: f64,
}

pub fn biorthogonal_expand(a: &DMatrix<Complex64>, f: &DVector<Complex64>) -> Result<BiorthogonalExpansion> {
    let sys = BiorthogonalSystem::new(a)?;
    let coeffs = sys.coefficients(f)?;
    let rebuilt = &sys.right * &coeffs;
    Ok(BiorthogonalExpansion {
        eigenvalues: sys.eigenvalues.clone(),
        coefficient_probability: coeffs.iter().map(|c| c.norm_sqr()).sum(),
        square_modulus: f.norm_squared(),
        reconstruction_residual: (rebuilt - f).norm(),
        coefficients: coeffs.iter().copied().collect(),
    })
}
