use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_EIGENSTATES: usize = 64;

/// Eigenphases in turns (U = exp(2 pi i H)) with their squared overlaps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSpec {
    pub eigenphases: Vec<f64>,
    pub overlaps_sq: Vec<f64>,
    #[serde(default)]
    pub ground_index: Option<usize>,
}

impl SpectrumSpec {
    pub fn new(eigenphases: Vec<f64>, overlaps_sq: Vec<f64>) -> Result<Self> {
        let mut s = Self {
            eigenphases,
            overlaps_sq,
            ground_index: None,
        };
        s.validate()?;
        Ok(s)
    }

    /// A single eigenstate at `theta`.
    pub fn eigenstate(theta: f64) -> Result<Self> {
        Self::new(vec![theta], vec![1.0])
    }

    /// Ground state at `theta0` with overlap `eta`, one contaminant at
    /// `theta0 + gap` carrying the rest.
    pub fn two_state(theta0: f64, eta: f64, gap: f64) -> Result<Self> {
        if eta >= 1.0 {
            return Self::eigenstate(theta0);
        }
        Self::new(vec![theta0, theta0 + gap], vec![eta, 1.0 - eta])
    }

    /// Checks shape and normalization, and fills `ground_index`.
    pub fn validate(&mut self) -> Result<()> {
        let n = self.eigenphases.len();
        if n == 0 || n != self.overlaps_sq.len() {
            return Err(Error::Invalid(format!(
                "need equally many eigenphases and overlaps, got {} and {}",
                n,
                self.overlaps_sq.len()
            )));
        }
        if n > MAX_EIGENSTATES {
            return Err(Error::Invalid(format!(
                "at most {MAX_EIGENSTATES} eigenstates, got {n}"
            )));
        }
        if let Some(t) = self.eigenphases.iter().find(|t| !(t.abs() < 0.5)) {
            return Err(Error::Invalid(format!("eigenphase {t} outside (-1/2, 1/2)")));
        }
        if let Some(w) = self.overlaps_sq.iter().find(|w| !(**w >= 0.0)) {
            return Err(Error::Invalid(format!("negative overlap {w}")));
        }
        let total: f64 = self.overlaps_sq.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("overlaps sum to {total}, expected 1")));
        }
        let g = (0..n)
            .min_by(|&a, &b| self.eigenphases[a].total_cmp(&self.eigenphases[b]))
            .expect("non-empty");
        if let Some(given) = self.ground_index {
            if given != g {
                return Err(Error::Invalid(format!(
                    "ground_index {given} is not the minimal eigenphase (index {g})"
                )));
            }
        }
        self.ground_index = Some(g);
        Ok(())
    }

    pub fn ground(&self) -> usize {
        self.ground_index.unwrap_or_else(|| {
            (0..self.eigenphases.len())
                .min_by(|&a, &b| self.eigenphases[a].total_cmp(&self.eigenphases[b]))
                .expect("non-empty")
        })
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenphases[self.ground()]
    }

    pub fn eta(&self) -> f64 {
        self.overlaps_sq[self.ground()]
    }

    pub fn len(&self) -> usize {
        self.eigenphases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenphases.is_empty()
    }

    /// Smallest distance from the ground phase to any other phase with
    /// nonzero overlap; infinite for an eigenstate input.
    pub fn gap(&self) -> f64 {
        let g = self.ground();
        let t0 = self.eigenphases[g];
        (0..self.len())
            .filter(|&j| j != g && self.overlaps_sq[j] > 0.0)
            .map(|j| self.eigenphases[j] - t0)
            .fold(f64::INFINITY, f64::min)
    }

    /// Gap and norm promises for a plan with working gap `gap`.
    pub fn check_against(&self, gap: f64) -> Result<()> {
        let d = self.gap();
        if d < gap * (1.0 - 1e-12) {
            return Err(Error::Mismatch(format!(
                "spectral gap {d} is below the planned gap {gap}"
            )));
        }
        let lim = 0.5 - gap / 2.0;
        if let Some(t) = self.eigenphases.iter().find(|t| t.abs() > lim + 1e-15) {
            return Err(Error::Mismatch(format!(
                "|theta| = {} exceeds 1/2 - Delta/2 = {lim}",
                t.abs()
            )));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let mut s: Self = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }
}

/// Dense Hermitian matrix plus initial state; complex entries are `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DenseHamiltonian {
    pub entries: Vec<Vec<[f64; 2]>>,
    pub initial_state: Vec<[f64; 2]>,
}

impl DenseHamiltonian {
    pub fn from_real(rows: &[Vec<f64>], state: &[f64]) -> Self {
        Self {
            entries: rows.iter().map(|r| r.iter().map(|&x| [x, 0.0]).collect()).collect(),
            initial_state: state.iter().map(|&x| [x, 0.0]).collect(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.entries.len()
    }

    pub fn matrix(&self) -> Result<DMatrix<Complex64>> {
        let n = self.dimension();
        if n == 0 || n > MAX_EIGENSTATES {
            return Err(Error::Invalid(format!(
                "dimension must be in 1..={MAX_EIGENSTATES}, got {n}"
            )));
        }
        if self.entries.iter().any(|r| r.len() != n) {
            return Err(Error::Invalid("matrix is not square".into()));
        }
        let a = DMatrix::from_fn(n, n, |i, j| {
            Complex64::new(self.entries[i][j][0], self.entries[i][j][1])
        });
        let herm = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (a[(i, j)] - a[(j, i)].conj()).norm())
            .fold(0.0, f64::max);
        if herm > 1e-12 {
            return Err(Error::Invalid(format!(
                "matrix is not Hermitian (max deviation {herm:e})"
            )));
        }
        Ok(a)
    }

    pub fn state(&self) -> Result<DVector<Complex64>> {
        let n = self.dimension();
        if self.initial_state.len() != n {
            return Err(Error::Invalid(format!(
                "initial state has length {}, expected {n}",
                self.initial_state.len()
            )));
        }
        let v = DVector::from_iterator(n, self.initial_state.iter().map(|p| Complex64::new(p[0], p[1])));
        let norm = v.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::Invalid(format!("initial state norm is {norm}, expected 1")));
        }
        Ok(v)
    }
}

/// Result of [`eigendecompose`], with the reconstruction residual.
#[derive(Clone, Debug)]
pub struct Eigensystem {
    pub spectrum: SpectrumSpec,
    pub vectors: DMatrix<Complex64>,
    pub residual: f64,
}

pub fn eigendecompose(h: &DenseHamiltonian) -> Result<Eigensystem> {
    let a = h.matrix()?;
    let psi = h.state()?;
    let n = a.nrows();
    let eig = a.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    let mut overlaps: Vec<f64> = (0..n).map(|c| vectors.column(c).dotc(&psi).norm_sqr()).collect();
    let total: f64 = overlaps.iter().sum();
    for w in &mut overlaps {
        *w /= total;
    }
    let lambda = DMatrix::from_diagonal(&DVector::from_iterator(
        n,
        values.iter().map(|&x| Complex64::new(x, 0.0)),
    ));
    let recon = &vectors * lambda * vectors.adjoint();
    let residual = (&a - recon).iter().map(|z| z.norm()).fold(0.0, f64::max);
    if residual > 1e-9 {
        return Err(Error::Domain(format!(
            "eigendecomposition residual {residual:e} above 1e-9"
        )));
    }
    let spectrum = SpectrumSpec::new(values, overlaps)?;
    Ok(Eigensystem {
        spectrum,
        vectors,
        residual,
    })
}
