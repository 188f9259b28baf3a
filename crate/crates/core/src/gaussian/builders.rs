use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::state::GaussianState;
use super::symplectic::{build_symplectic, GaussianGate, SymplecticTransform};
use crate::error::{param, Error, Result};

/// Two-mode squeezed vacuum: `A = B = cosh(2r)/2 I`, `C = sinh(2r)/2 Z`.
pub fn tmsv_cm(r: f64) -> Result<GaussianState> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(param(format!("squeezing r = {r} must be finite and >= 0")));
    }
    let (c, s) = ((2.0 * r).cosh() / 2.0, (2.0 * r).sinh() / 2.0);
    let cm = DMatrix::from_row_slice(
        4,
        4,
        &[
            c, 0.0, s, 0.0, //
            0.0, c, 0.0, -s, //
            s, 0.0, c, 0.0, //
            0.0, -s, 0.0, c,
        ],
    );
    GaussianState::new(cm)
}

/// Pure three-mode Gaussian state in standard form: local blocks `a_i I`,
/// correlation blocks `diag(e_ij+, e_ij-)`, no x-p cross terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThreeModeStandardForm {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub e12p: f64,
    pub e12m: f64,
    pub e13p: f64,
    pub e13m: f64,
    pub e23p: f64,
    pub e23m: f64,
}

impl ThreeModeStandardForm {
    pub fn cm(&self) -> DMatrix<f64> {
        let a = [self.a1, self.a2, self.a3];
        let mut cm = DMatrix::zeros(6, 6);
        for (i, ai) in a.iter().enumerate() {
            cm[(2 * i, 2 * i)] = *ai;
            cm[(2 * i + 1, 2 * i + 1)] = *ai;
        }
        for (i, j, ep, em) in [(0, 1, self.e12p, self.e12m), (0, 2, self.e13p, self.e13m), (1, 2, self.e23p, self.e23m)]
        {
            cm[(2 * i, 2 * j)] = ep;
            cm[(2 * j, 2 * i)] = ep;
            cm[(2 * i + 1, 2 * j + 1)] = em;
            cm[(2 * j + 1, 2 * i + 1)] = em;
        }
        cm
    }

    pub fn state(&self) -> GaussianState {
        GaussianState::new(self.cm()).expect("standard-form CM is well formed")
    }

    /// `c_j = (a_j - 1/2) / (a_1 - 1/2)` for `j = 2, 3`.
    pub fn c_ratios(&self) -> (f64, f64) {
        let d = self.a1 - 0.5;
        ((self.a2 - 0.5) / d, (self.a3 - 0.5) / d)
    }
}

/// Inverts `c_j = (a_j - 1/2)/(a_1 - 1/2)`.
pub fn standard_form_from_ratios(a1: f64, c2: f64, c3: f64) -> Result<ThreeModeStandardForm> {
    three_mode_standard_cm(a1, 0.5 + c2 * (a1 - 0.5), 0.5 + c3 * (a1 - 0.5))
}

/// `|c2 - c3| <= 1 <= c2 + c3`, written without dividing by `a1 - 1/2`.
pub fn triangle_feasible(a1: f64, a2: f64, a3: f64) -> bool {
    let tol = 1e-12 * (1.0 + a1.abs() + a2.abs() + a3.abs());
    let (d1, d2, d3) = (a1 - 0.5, a2 - 0.5, a3 - 0.5);
    d1 >= -tol && d2 >= -tol && d3 >= -tol && (d2 - d3).abs() <= d1 + tol && d1 <= d2 + d3 + tol
}

/// Builds the pure standard-form state with local diagonals `(a1, a2, a3)`.
///
/// Purity forces the reduced state of any pair `(j, k)` to have symplectic
/// spectrum `{a_i, 1/2}`, `i` the remaining mode. With local blocks `a I` and
/// correlations `diag(e+, e-)` the two symplectic invariants give
/// `e+ e- = (a_i² + 1/4 - a_j² - a_k²)/2` and
/// `e+² + e-² = (P² + S² - a_i²/4)/P` with `P = a_j a_k`, so each pair has a
/// closed form up to signs and the exchange `e+ <-> e-`. The sign pattern is
/// picked by requiring global purity, then fixed so that `e12+ >= 0`,
/// `e13+ >= 0` and `e12+ >= e12-`.
pub fn three_mode_standard_cm(a1: f64, a2: f64, a3: f64) -> Result<ThreeModeStandardForm> {
    let a = [a1, a2, a3];
    if a.iter().any(|v| !v.is_finite()) {
        return Err(param("local variances must be finite"));
    }
    if a.iter().any(|&v| v < 0.5 - 1e-12) {
        return Err(Error::UnphysicalParameters(format!("local variances {a:?} below vacuum 1/2")));
    }
    if !triangle_feasible(a1, a2, a3) {
        return Err(Error::UnphysicalParameters(format!(
            "triangle inequality |a2 - a3| <= a1 - 1/2 <= a2 + a3 - 1 fails for {a:?}"
        )));
    }

    // pair order (1,2), (1,3), (2,3); complement mode 3, 2, 1
    let pairs = [(0usize, 1usize, 2usize), (0, 2, 1), (1, 2, 0)];
    let mut candidates: Vec<Vec<(f64, f64)>> = Vec::with_capacity(3);
    for &(j, k, i) in &pairs {
        let s = (a[i] * a[i] + 0.25 - a[j] * a[j] - a[k] * a[k]) / 2.0;
        let p = a[j] * a[k];
        let q = ((p * p + s * s - a[i] * a[i] / 4.0) / p).max(0.0);
        let disc = (q * q - 4.0 * s * s).max(0.0).sqrt();
        let (u, v) = ((q + disc) / 2.0, ((q - disc) / 2.0).max(0.0));
        let mut list = Vec::with_capacity(4);
        for root in [u.sqrt(), v.sqrt()] {
            let partner = if root > 0.0 { s / root } else { 0.0 };
            for sign in [1.0, -1.0] {
                let cand = (sign * root, sign * partner);
                if !list.iter().any(|&(x, y): &(f64, f64)| (x - cand.0).abs() < 1e-14 && (y - cand.1).abs() < 1e-14) {
                    list.push(cand);
                }
            }
        }
        candidates.push(list);
    }

    let mut best: Option<(ThreeModeStandardForm, (bool, bool, bool), f64)> = None;
    let mut least_residual = f64::INFINITY;
    for &e12 in &candidates[0] {
        for &e13 in &candidates[1] {
            for &e23 in &candidates[2] {
                let form = ThreeModeStandardForm {
                    a1,
                    a2,
                    a3,
                    e12p: e12.0,
                    e12m: e12.1,
                    e13p: e13.0,
                    e13m: e13.1,
                    e23p: e23.0,
                    e23m: e23.1,
                };
                let cm = form.cm();
                if nalgebra::SymmetricEigen::new(cm.clone()).eigenvalues.min() <= 0.0 {
                    continue;
                }
                let nu = match super::state::symplectic_spectrum_of(&cm) {
                    Ok(nu) => nu,
                    Err(_) => continue,
                };
                let residual = nu.iter().map(|v| (v - 0.5).abs()).fold(0.0, f64::max);
                least_residual = least_residual.min(residual);
                if residual > 1e-8 {
                    continue;
                }
                let key = (e12.0 >= 0.0, e13.0 >= 0.0, e12.0 >= e12.1);
                let better = match &best {
                    None => true,
                    Some((_, k, r)) => key > *k || (key == *k && residual < r - 1e-13),
                };
                if better {
                    best = Some((form, key, residual));
                }
            }
        }
    }
    best.map(|(f, _, _)| f).ok_or(Error::Convergence {
        context: "no sign pattern of the pairwise correlations gives a pure state".into(),
        residual: least_residual,
    })
}

/// `(N+1)`-mode state from one momentum-squeezed mode (index 0) and `N`
/// position-squeezed modes mixed by a balanced beam-splitter chain.
///
/// Mode 0 has `<x²> = e^{2 r1} n1/2`, `<p²> = e^{-2 r1} n1/2`; modes `1..=N`
/// have `<x²> = e^{-2 r2} n2/2`, `<p²> = e^{2 r2} n2/2`. The chain applies
/// `BS(T = 1/(N+1-k))` on `(k, k+1)` followed by a π phase on `k+1`, which
/// makes the output symmetric under permutations of modes `1..=N`.
pub fn network_symmetric_cm(n: usize, r1: f64, r2: f64, n1: f64, n2: f64) -> Result<GaussianState> {
    if n < 1 {
        return Err(param("network needs at least one receiver"));
    }
    if !(n1 >= 1.0) || !(n2 >= 1.0) {
        return Err(param(format!("thermal parameters must be >= 1, got n1 = {n1}, n2 = {n2}")));
    }
    if !r1.is_finite() || !r2.is_finite() {
        return Err(param("squeezing must be finite"));
    }
    let modes = n + 1;
    let mut cm = DMatrix::zeros(2 * modes, 2 * modes);
    cm[(0, 0)] = (2.0 * r1).exp() * n1 / 2.0;
    cm[(1, 1)] = (-2.0 * r1).exp() * n1 / 2.0;
    for j in 1..modes {
        cm[(2 * j, 2 * j)] = (-2.0 * r2).exp() * n2 / 2.0;
        cm[(2 * j + 1, 2 * j + 1)] = (2.0 * r2).exp() * n2 / 2.0;
    }
    let state = GaussianState::new(cm)?;
    state.apply_symplectic(&network_mixer(n)?)
}

/// The beam-splitter chain used by [`network_symmetric_cm`].
pub fn network_mixer(n: usize) -> Result<SymplecticTransform> {
    let modes = n + 1;
    let mut s = SymplecticTransform::identity(modes);
    for k in 0..n {
        let t = 1.0 / (modes - k) as f64;
        s = s.then(&build_symplectic(GaussianGate::BeamSplitter { transmittance: t }, &[k, k + 1], modes)?)?;
        s = s.then(&build_symplectic(GaussianGate::Rotation { theta: std::f64::consts::PI }, &[k + 1], modes)?)?;
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi3_standard_form_values() {
        let f = three_mode_standard_cm(1.5, 1.0, 1.0).unwrap();
        assert!((f.e12p - 1.0).abs() < 1e-12 && (f.e12m + 1.0).abs() < 1e-12);
        assert!((f.e13p - 1.0).abs() < 1e-12 && (f.e13m + 1.0).abs() < 1e-12);
        assert!((f.e23p - 0.5).abs() < 1e-12 && (f.e23m - 0.5).abs() < 1e-12);
    }

    #[test]
    fn triple_vacuum() {
        let f = three_mode_standard_cm(0.5, 0.5, 0.5).unwrap();
        for e in [f.e12p, f.e12m, f.e13p, f.e13m, f.e23p, f.e23m] {
            assert!(e.abs() < 1e-12);
        }
    }

    #[test]
    fn tmsv_pattern_with_vacuum_third_mode() {
        let a = 2f64.cosh() / 2.0;
        let f = three_mode_standard_cm(a, a, 0.5).unwrap();
        let s = 2f64.sinh() / 2.0;
        assert!((f.e12p - s).abs() < 1e-10 && (f.e12m + s).abs() < 1e-10);
        for e in [f.e13p, f.e13m, f.e23p, f.e23m] {
            assert!(e.abs() < 1e-10);
        }
    }

    #[test]
    fn infeasible_triangle_rejected() {
        assert!(matches!(three_mode_standard_cm(1.5, 3.0, 0.6), Err(Error::UnphysicalParameters(_))));
        assert!(matches!(three_mode_standard_cm(0.4, 1.0, 1.0), Err(Error::UnphysicalParameters(_))));
    }

    #[test]
    fn mixer_is_symplectic() {
        for n in [1, 2, 5, 10] {
            assert!(network_mixer(n).unwrap().symplectic_defect() < 1e-12);
        }
    }

    #[test]
    fn network_is_permutation_symmetric() {
        let st = network_symmetric_cm(4, 0.3, 0.7, 1.4, 1.1).unwrap();
        let cm = st.cm();
        for j in 1..5 {
            for k in 1..5 {
                let expected = if j == k { st.block(1, 1) } else { st.block(1, 2) };
                assert!((st.block(j, k) - expected).amax() < 1e-12, "({j},{k})");
            }
            assert!((st.block(0, j) - st.block(0, 1)).amax() < 1e-12);
        }
        assert!(cm.iter().all(|v| v.is_finite()));
    }
}
