use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Tight-binding chain: a finite system region between two semi-infinite
/// uniform leads.
///
/// Matrix elements follow the `-hopping` convention everywhere, so the lead
/// dispersion is `E(κ) = -2J cos κ` with band `[-2J, 2J]`. System site 1
/// couples to the left lead with `-g_L` and site `N` to the right lead
/// with `-g_R`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeModel {
    onsite: Vec<f64>,
    intra_hopping: Vec<f64>,
    lead_hopping: f64,
    coupling: (f64, f64),
}

impl LatticeModel {
    pub fn new(
        onsite: Vec<f64>,
        intra_hopping: Vec<f64>,
        lead_hopping: f64,
        coupling: (f64, f64),
    ) -> Result<Self> {
        if onsite.is_empty() {
            return Err(Error::InvalidModel("lattice needs at least one system site".into()));
        }
        if intra_hopping.len() + 1 != onsite.len() {
            return Err(Error::InvalidModel(format!(
                "{} system sites need {} intra hoppings, got {}",
                onsite.len(),
                onsite.len() - 1,
                intra_hopping.len()
            )));
        }
        let finite = onsite
            .iter()
            .chain(&intra_hopping)
            .chain([&lead_hopping, &coupling.0, &coupling.1])
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::NonFinite("lattice model"));
        }
        if lead_hopping <= 0.0 {
            return Err(Error::InvalidModel("lead hopping J must be positive".into()));
        }
        Ok(Self {
            onsite,
            intra_hopping,
            lead_hopping,
            coupling,
        })
    }

    /// Single potential site `v0` embedded in a uniform chain (`g = J`).
    pub fn single_impurity(v0: f64, lead_hopping: f64) -> Result<Self> {
        Self::new(vec![v0], Vec::new(), lead_hopping, (lead_hopping, lead_hopping))
    }

    /// Symmetric two-site dot weakly attached to both leads.
    ///
    /// Onsite 0, internal hopping `J`, contacts `0.3 J`. Its two resonances
    /// sit near `E = ±1.05 J` with `Im E ≈ -0.08 J`.
    pub fn double_dot() -> Self {
        Self::new(vec![0.0, 0.0], vec![1.0], 1.0, (0.3, 0.3)).expect("preset is valid")
    }

    /// Look up a named preset: `impurity` (V0 = 1, J = 1), `chain`
    /// (V0 = 0) or `double-dot`.
    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "impurity" => Self::single_impurity(1.0, 1.0).ok(),
            "chain" => Self::single_impurity(0.0, 1.0).ok(),
            "double-dot" => Some(Self::double_dot()),
            _ => None,
        }
    }

    pub fn system_sites(&self) -> usize {
        self.onsite.len()
    }

    pub fn onsite(&self) -> &[f64] {
        &self.onsite
    }

    pub fn intra_hopping(&self) -> &[f64] {
        &self.intra_hopping
    }

    pub fn lead_hopping(&self) -> f64 {
        self.lead_hopping
    }

    pub fn coupling(&self) -> (f64, f64) {
        self.coupling
    }

    pub fn is_decoupled(&self) -> bool {
        self.coupling.0 == 0.0 && self.coupling.1 == 0.0
    }

    /// The closed-system block PHP.
    pub fn system_hamiltonian(&self) -> DMatrix<f64> {
        let n = self.system_sites();
        let mut h = DMatrix::zeros(n, n);
        for (i, &e) in self.onsite.iter().enumerate() {
            h[(i, i)] = e;
        }
        for (i, &t) in self.intra_hopping.iter().enumerate() {
            h[(i, i + 1)] = -t;
            h[(i + 1, i)] = -t;
        }
        h
    }

    /// Finite Hermitian chain of `total_sites` sites with the system block
    /// centred in it. Returns the matrix and the index of system site 1.
    pub fn finite_chain(&self, total_sites: usize) -> Result<(DMatrix<f64>, usize)> {
        let n = self.system_sites();
        if total_sites < n + 2 {
            return Err(Error::InvalidInput(format!(
                "{total_sites} sites cannot hold a {n}-site system with leads"
            )));
        }
        let start = (total_sites - n) / 2;
        let j = self.lead_hopping;
        let mut h = DMatrix::zeros(total_sites, total_sites);
        for i in 0..total_sites - 1 {
            h[(i, i + 1)] = -j;
            h[(i + 1, i)] = -j;
        }
        let sys = self.system_hamiltonian();
        for a in 0..n {
            for b in 0..n {
                h[(start + a, start + b)] = sys[(a, b)];
            }
        }
        let (gl, gr) = self.coupling;
        h[(start - 1, start)] = -gl;
        h[(start, start - 1)] = -gl;
        h[(start + n - 1, start + n)] = -gr;
        h[(start + n, start + n - 1)] = -gr;
        Ok((h, start))
    }
}
