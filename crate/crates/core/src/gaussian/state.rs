use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::symplectic::{symplectic_form, SymplecticTransform};
use crate::error::{param, Error, Result};

/// Symplectic eigenvalues below `1/2 - PHYSICAL_TOL` flag an unphysical CM.
pub const PHYSICAL_TOL: f64 = 1e-9;
const PAIRING_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quadrature {
    X,
    P,
}

/// Zero-or-nonzero-mean Gaussian state in `(x1, p1, x2, p2, …)` ordering.
/// Vacuum variance is `1/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GaussianStateJson", into = "GaussianStateJson")]
pub struct GaussianState {
    n_modes: usize,
    cm: DMatrix<f64>,
    mean: DVector<f64>,
}

/// Wire format: `{n_modes, cm: row-major flat array, mean: array}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaussianStateJson {
    pub n_modes: usize,
    pub cm: Vec<f64>,
    pub mean: Vec<f64>,
}

impl From<GaussianState> for GaussianStateJson {
    fn from(s: GaussianState) -> Self {
        let dim = 2 * s.n_modes;
        let mut cm = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                cm.push(s.cm[(i, j)]);
            }
        }
        Self { n_modes: s.n_modes, cm, mean: s.mean.iter().copied().collect() }
    }
}

impl TryFrom<GaussianStateJson> for GaussianState {
    type Error = Error;

    fn try_from(j: GaussianStateJson) -> Result<Self> {
        let dim = 2 * j.n_modes;
        if j.cm.len() != dim * dim {
            return Err(Error::Dimension { expected: dim * dim, got: j.cm.len() });
        }
        let cm = DMatrix::from_row_slice(dim, dim, &j.cm);
        let mean = if j.mean.is_empty() { DVector::zeros(dim) } else { DVector::from_vec(j.mean) };
        GaussianState::with_mean(cm, mean)
    }
}

/// Outcome of [`GaussianState::check_physical`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Physicality {
    pub physical: bool,
    pub least_symplectic_eigenvalue: f64,
}

impl GaussianState {
    /// Zero-mean state; `cm` is symmetrized.
    pub fn new(cm: DMatrix<f64>) -> Result<Self> {
        let dim = cm.nrows();
        Self::with_mean(cm, DVector::zeros(dim))
    }

    pub fn with_mean(cm: DMatrix<f64>, mean: DVector<f64>) -> Result<Self> {
        if cm.nrows() != cm.ncols() {
            return Err(Error::Dimension { expected: cm.nrows(), got: cm.ncols() });
        }
        if cm.nrows() == 0 || !cm.nrows().is_multiple_of(2) {
            return Err(param(format!("covariance matrix must be 2N x 2N, got {}", cm.nrows())));
        }
        if mean.len() != cm.nrows() {
            return Err(Error::Dimension { expected: cm.nrows(), got: mean.len() });
        }
        if cm.iter().chain(mean.iter()).any(|v| !v.is_finite()) {
            return Err(param("non-finite entry"));
        }
        let cm = (&cm + cm.transpose()) * 0.5;
        Ok(Self { n_modes: cm.nrows() / 2, cm, mean })
    }

    pub fn vacuum(n_modes: usize) -> Self {
        Self::thermal(&vec![0.0; n_modes])
    }

    /// Product of thermal states with mean photon numbers `nbar`.
    pub fn thermal(nbar: &[f64]) -> Self {
        let n = nbar.len();
        let mut cm = DMatrix::zeros(2 * n, 2 * n);
        for (k, &nb) in nbar.iter().enumerate() {
            cm[(2 * k, 2 * k)] = nb + 0.5;
            cm[(2 * k + 1, 2 * k + 1)] = nb + 0.5;
        }
        Self { n_modes: n, cm, mean: DVector::zeros(2 * n) }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn cm(&self) -> &DMatrix<f64> {
        &self.cm
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    /// 2×2 block between modes `i` and `j`.
    pub fn block(&self, i: usize, j: usize) -> DMatrix<f64> {
        self.cm.view((2 * i, 2 * j), (2, 2)).into_owned()
    }

    /// Direct sum `self ⊕ other`.
    pub fn tensor(&self, other: &GaussianState) -> GaussianState {
        let (d1, d2) = (2 * self.n_modes, 2 * other.n_modes);
        let mut cm = DMatrix::zeros(d1 + d2, d1 + d2);
        cm.view_mut((0, 0), (d1, d1)).copy_from(&self.cm);
        cm.view_mut((d1, d1), (d2, d2)).copy_from(&other.cm);
        let mut mean = DVector::zeros(d1 + d2);
        mean.rows_mut(0, d1).copy_from(&self.mean);
        mean.rows_mut(d1, d2).copy_from(&other.mean);
        GaussianState { n_modes: self.n_modes + other.n_modes, cm, mean }
    }

    pub fn apply_symplectic(&self, s: &SymplecticTransform) -> Result<GaussianState> {
        if s.n_modes() != self.n_modes {
            return Err(Error::Dimension { expected: self.n_modes, got: s.n_modes() });
        }
        let m = s.matrix();
        let cm = m * &self.cm * m.transpose();
        let mean = m * &self.mean;
        Ok(GaussianState { n_modes: self.n_modes, cm: (&cm + cm.transpose()) * 0.5, mean })
    }

    /// Ascending symplectic eigenvalues, one per mode.
    ///
    /// For a positive-definite CM these are the singular values of
    /// `σ^{1/2} Ω σ^{1/2}` (a real antisymmetric matrix similar to `iΩσ` up to
    /// a factor `i`), each appearing twice; pairs are checked and merged.
    pub fn symplectic_spectrum(&self) -> Result<Vec<f64>> {
        symplectic_spectrum_of(&self.cm)
    }

    pub fn check_physical(&self) -> Physicality {
        let least = match symplectic_spectrum_of(&self.cm) {
            Ok(nu) => nu[0],
            Err(_) => f64::NAN,
        };
        let min_eig = SymmetricEigen::new(self.cm.clone()).eigenvalues.min();
        Physicality { physical: min_eig > 0.0 && least >= 0.5 - PHYSICAL_TOL, least_symplectic_eigenvalue: least }
    }

    /// Reduced state on `keep` (in the given order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<GaussianState> {
        self.validate_subset(keep, false)?;
        let idx: Vec<usize> = keep.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect();
        let cm = DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.cm[(idx[i], idx[j])]);
        let mean = DVector::from_fn(idx.len(), |i, _| self.mean[idx[i]]);
        Ok(GaussianState { n_modes: keep.len(), cm, mean })
    }

    /// CM after `p -> -p` on the modes in `partition`.
    pub fn partial_transpose(&self, partition: &[usize]) -> Result<GaussianState> {
        self.validate_subset(partition, true)?;
        let mut flip = DVector::from_element(2 * self.n_modes, 1.0);
        for &k in partition {
            flip[2 * k + 1] = -1.0;
        }
        let cm = DMatrix::from_fn(self.cm.nrows(), self.cm.ncols(), |i, j| self.cm[(i, j)] * flip[i] * flip[j]);
        let mean = self.mean.component_mul(&flip);
        Ok(GaussianState { n_modes: self.n_modes, cm, mean })
    }

    /// Least symplectic eigenvalue of the partially transposed CM; values
    /// below `1/2` certify entanglement across `partition | rest`.
    pub fn pt_least_eigenvalue(&self, partition: &[usize]) -> Result<f64> {
        Ok(self.partial_transpose(partition)?.symplectic_spectrum()?[0])
    }

    /// Ideal homodyne detection of `quadrature` on `mode`, conditioned on
    /// reading the quadrature's current mean. The conditional CM does not
    /// depend on the outcome; use [`Self::homodyne_condition_at`] to shift the
    /// mean for another reading.
    pub fn homodyne_condition(&self, mode: usize, quadrature: Quadrature) -> Result<GaussianState> {
        let q = 2 * mode + quad_offset(quadrature);
        let outcome = if mode < self.n_modes { self.mean[q] } else { 0.0 };
        self.homodyne_condition_at(mode, quadrature, outcome)
    }

    /// Conditional state for measured value `outcome`. The measured mode is
    /// removed. Uses the pseudo-inverse of the projected 2×2 block, so
    /// `σ_A - C Π (Π B Π)^+ Π Cᵀ`.
    pub fn homodyne_condition_at(&self, mode: usize, quadrature: Quadrature, outcome: f64) -> Result<GaussianState> {
        if self.n_modes < 2 {
            return Err(param("homodyne conditioning needs at least two modes"));
        }
        if mode >= self.n_modes {
            return Err(Error::Index(format!("mode {mode} out of range for {} modes", self.n_modes)));
        }
        let q = 2 * mode + quad_offset(quadrature);
        let variance = self.cm[(q, q)];
        if variance <= 0.0 {
            return Err(Error::Unphysical(format!("measured variance {variance}")));
        }
        let rest: Vec<usize> = (0..self.n_modes).filter(|&k| k != mode).collect();
        let reduced = self.partial_trace(&rest)?;
        let idx: Vec<usize> = rest.iter().flat_map(|&k| [2 * k, 2 * k + 1]).collect();
        let c = DVector::from_fn(idx.len(), |i, _| self.cm[(idx[i], q)]);
        let cm = reduced.cm - &c * c.transpose() / variance;
        let mean = reduced.mean + &c * ((outcome - self.mean[q]) / variance);
        GaussianState::with_mean(cm, mean)
    }

    /// Phase-insensitive channel on `mode`: loss/amplification-free
    /// attenuator with transmissivity `eta` into a thermal bath of `n_th`
    /// photons. `σ -> X σ Xᵀ + (1 - η)(n_th + 1/2) I_mode` with `X = √η` on the mode.
    pub fn phase_insensitive_channel(&self, mode: usize, eta: f64, n_th: f64) -> Result<GaussianState> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(param(format!("transmissivity {eta} not in [0, 1]")));
        }
        if !(n_th >= 0.0) {
            return Err(param(format!("thermal photon number {n_th} < 0")));
        }
        if mode >= self.n_modes {
            return Err(Error::Index(format!("mode {mode} out of range for {} modes", self.n_modes)));
        }
        let scale = eta.sqrt();
        let mut cm = self.cm.clone();
        let mut mean = self.mean.clone();
        for a in [2 * mode, 2 * mode + 1] {
            for j in 0..cm.ncols() {
                cm[(a, j)] *= scale;
                cm[(j, a)] *= scale;
            }
            cm[(a, a)] += (1.0 - eta) * (n_th + 0.5);
            mean[a] *= scale;
        }
        Ok(GaussianState { n_modes: self.n_modes, cm, mean })
    }

    fn validate_subset(&self, modes: &[usize], proper: bool) -> Result<()> {
        if modes.is_empty() {
            return Err(Error::Index("empty mode list".into()));
        }
        let mut seen = vec![false; self.n_modes];
        for &m in modes {
            if m >= self.n_modes {
                return Err(Error::Index(format!("mode {m} out of range for {} modes", self.n_modes)));
            }
            if seen[m] {
                return Err(Error::Index(format!("duplicate mode {m}")));
            }
            seen[m] = true;
        }
        if proper && modes.len() == self.n_modes {
            return Err(Error::Index("partition must be a proper subset".into()));
        }
        Ok(())
    }
}

fn quad_offset(q: Quadrature) -> usize {
    match q {
        Quadrature::X => 0,
        Quadrature::P => 1,
    }
}

pub(crate) fn symplectic_spectrum_of(cm: &DMatrix<f64>) -> Result<Vec<f64>> {
    if cm.nrows() != cm.ncols() || !cm.nrows().is_multiple_of(2) {
        return Err(Error::Dimension { expected: cm.nrows(), got: cm.ncols() });
    }
    let n = cm.nrows() / 2;
    let omega = symplectic_form(n);
    let eig = SymmetricEigen::new(cm.clone());
    let mut nu_sq: Vec<f64> = if eig.eigenvalues.min() > 0.0 {
        let sqrt_d = DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt));
        let root = &eig.eigenvectors * sqrt_d * eig.eigenvectors.transpose();
        let k = &root * &omega * &root;
        let ktk = k.transpose() * &k;
        let ktk = (&ktk + ktk.transpose()) * 0.5;
        SymmetricEigen::new(ktk).eigenvalues.iter().map(|v| v.max(0.0)).collect()
    } else {
        // Indefinite input: fall back to the general eigenvalues ±iν of Ωσ.
        let schur = Schur::try_new(&omega * cm, 1e-14, 100_000)
            .ok_or_else(|| Error::Convergence { context: "Schur decomposition of Ωσ".into(), residual: f64::NAN })?;
        schur.complex_eigenvalues().iter().map(|z| z.norm_sqr()).collect()
    };
    nu_sq.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut nu = Vec::with_capacity(n);
    for pair in nu_sq.chunks(2) {
        let (a, b) = (pair[0].sqrt(), pair[1].sqrt());
        if (a - b).abs() > PAIRING_TOL * a.max(1.0) {
            return Err(Error::Convergence {
                context: "symplectic eigenvalues did not pair".into(),
                residual: (a - b).abs(),
            });
        }
        nu.push(0.5 * (a + b));
    }
    Ok(nu)
}
