use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Block-diagonal symplectic form `⊕ [[0, 1], [-1, 0]]` in `(x1, p1, x2, p2, …)` ordering.
pub fn symplectic_form(n_modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * n_modes, 2 * n_modes);
    for k in 0..n_modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SqueezeAxis {
    /// `x -> e^{-s} x`, `p -> e^{s} p`.
    X,
    /// `x -> e^{s} x`, `p -> e^{-s} p`.
    P,
}

/// Elementary Gaussian unitaries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GaussianGate {
    /// `a -> √T a + √(1-T) b`, `b -> -√(1-T) a + √T b`.
    BeamSplitter {
        transmittance: f64,
    },
    /// Non-degenerate parametric amplifier with intensity gain `G`:
    /// `a -> √G a + √(G-1) b†`, `b -> √G b + √(G-1) a†`.
    TwoModeSqueezer {
        gain: f64,
    },
    Squeezer {
        s: f64,
        axis: SqueezeAxis,
    },
    /// `x -> x cosθ + p sinθ`, `p -> p cosθ - x sinθ`.
    Rotation {
        theta: f64,
    },
}

impl GaussianGate {
    fn arity(&self) -> usize {
        match self {
            GaussianGate::BeamSplitter { .. } | GaussianGate::TwoModeSqueezer { .. } => 2,
            GaussianGate::Squeezer { .. } | GaussianGate::Rotation { .. } => 1,
        }
    }

    fn local_matrix(&self) -> Result<DMatrix<f64>> {
        Ok(match *self {
            GaussianGate::BeamSplitter { transmittance } => {
                if !(0.0..=1.0).contains(&transmittance) {
                    return Err(param(format!("transmittance {transmittance} not in [0, 1]")));
                }
                let t = transmittance.sqrt();
                let r = (1.0 - transmittance).sqrt();
                DMatrix::from_row_slice(
                    4,
                    4,
                    &[
                        t, 0.0, r, 0.0, //
                        0.0, t, 0.0, r, //
                        -r, 0.0, t, 0.0, //
                        0.0, -r, 0.0, t,
                    ],
                )
            }
            GaussianGate::TwoModeSqueezer { gain } => {
                if !(gain >= 1.0) {
                    return Err(param(format!("two-mode squeezer gain {gain} < 1")));
                }
                let g = gain.sqrt();
                let h = (gain - 1.0).sqrt();
                DMatrix::from_row_slice(
                    4,
                    4,
                    &[
                        g, 0.0, h, 0.0, //
                        0.0, g, 0.0, -h, //
                        h, 0.0, g, 0.0, //
                        0.0, -h, 0.0, g,
                    ],
                )
            }
            GaussianGate::Squeezer { s, axis } => {
                if !s.is_finite() {
                    return Err(param("squeezing must be finite"));
                }
                let sx = match axis {
                    SqueezeAxis::X => (-s).exp(),
                    SqueezeAxis::P => s.exp(),
                };
                DMatrix::from_row_slice(2, 2, &[sx, 0.0, 0.0, 1.0 / sx])
            }
            GaussianGate::Rotation { theta } => {
                let (s, c) = theta.sin_cos();
                DMatrix::from_row_slice(2, 2, &[c, s, -s, c])
            }
        })
    }
}

/// A real `2N × 2N` matrix preserving the symplectic form, acting on the
/// quadrature vector as `R -> S R`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticTransform {
    n_modes: usize,
    matrix: DMatrix<f64>,
}

impl SymplecticTransform {
    pub fn identity(n_modes: usize) -> Self {
        Self { n_modes, matrix: DMatrix::identity(2 * n_modes, 2 * n_modes) }
    }

    /// Wraps a matrix after checking `S Ω Sᵀ = Ω` to `1e-10`.
    pub fn from_matrix(matrix: DMatrix<f64>) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() || !matrix.nrows().is_multiple_of(2) {
            return Err(Error::Dimension { expected: matrix.nrows() + matrix.nrows() % 2, got: matrix.ncols() });
        }
        let s = Self { n_modes: matrix.nrows() / 2, matrix };
        let defect = s.symplectic_defect();
        if defect > 1e-10 {
            return Err(param(format!("matrix is not symplectic (defect {defect:.3e})")));
        }
        Ok(s)
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// `max |S Ω Sᵀ - Ω|`.
    pub fn symplectic_defect(&self) -> f64 {
        let omega = symplectic_form(self.n_modes);
        (&self.matrix * &omega * self.matrix.transpose() - omega).amax()
    }

    /// Composite transform: `self` first, then `next`.
    pub fn then(&self, next: &SymplecticTransform) -> Result<SymplecticTransform> {
        if next.n_modes != self.n_modes {
            return Err(Error::Dimension { expected: self.n_modes, got: next.n_modes });
        }
        Ok(Self { n_modes: self.n_modes, matrix: &next.matrix * &self.matrix })
    }

    /// Heisenberg-picture coefficients on mode operators:
    /// `a'_j = Σ_k alpha[j][k] a_k + beta[j][k] a_k†`.
    pub fn bogoliubov_coefficients(&self) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
        let n = self.n_modes;
        let mut alpha = DMatrix::zeros(n, n);
        let mut beta = DMatrix::zeros(n, n);
        let m = &self.matrix;
        for j in 0..n {
            for k in 0..n {
                let sxx = m[(2 * j, 2 * k)];
                let sxp = m[(2 * j, 2 * k + 1)];
                let spx = m[(2 * j + 1, 2 * k)];
                let spp = m[(2 * j + 1, 2 * k + 1)];
                alpha[(j, k)] = Complex64::new(0.5 * (sxx + spp), 0.5 * (spx - sxp));
                beta[(j, k)] = Complex64::new(0.5 * (sxx - spp), 0.5 * (spx + sxp));
            }
        }
        (alpha, beta)
    }
}

/// Embeds an elementary gate acting on `modes` into an `n_modes` transform.
pub fn build_symplectic(gate: GaussianGate, modes: &[usize], n_modes: usize) -> Result<SymplecticTransform> {
    if modes.len() != gate.arity() {
        return Err(Error::Index(format!("{:?} acts on {} modes, got {:?}", gate, gate.arity(), modes)));
    }
    if let Some(&m) = modes.iter().find(|&&m| m >= n_modes) {
        return Err(Error::Index(format!("mode {m} out of range for {n_modes} modes")));
    }
    if modes.len() == 2 && modes[0] == modes[1] {
        return Err(Error::Index(format!("duplicate mode index {}", modes[0])));
    }
    let local = gate.local_matrix()?;
    let mut matrix = DMatrix::identity(2 * n_modes, 2 * n_modes);
    for (li, &mi) in modes.iter().enumerate() {
        for (lj, &mj) in modes.iter().enumerate() {
            for a in 0..2 {
                for b in 0..2 {
                    matrix[(2 * mi + a, 2 * mj + b)] = local[(2 * li + a, 2 * lj + b)];
                }
            }
        }
    }
    Ok(SymplecticTransform { n_modes, matrix })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_transmission_is_identity() {
        let s = build_symplectic(GaussianGate::BeamSplitter { transmittance: 1.0 }, &[0, 1], 2).unwrap();
        assert_eq!(s.matrix(), &DMatrix::<f64>::identity(4, 4));
    }

    #[test]
    fn quarter_rotation_swaps_quadratures() {
        let s = build_symplectic(GaussianGate::Rotation { theta: std::f64::consts::FRAC_PI_2 }, &[0], 1).unwrap();
        let m = s.matrix();
        assert!((m[(0, 0)]).abs() < 1e-15 && (m[(0, 1)] - 1.0).abs() < 1e-15);
        assert!((m[(1, 0)] + 1.0).abs() < 1e-15 && (m[(1, 1)]).abs() < 1e-15);
    }

    #[test]
    fn all_gates_are_symplectic() {
        let gates = [
            (GaussianGate::BeamSplitter { transmittance: 0.3 }, vec![2, 0]),
            (GaussianGate::TwoModeSqueezer { gain: 2.7 }, vec![1, 2]),
            (GaussianGate::Squeezer { s: -0.8, axis: SqueezeAxis::P }, vec![1]),
            (GaussianGate::Rotation { theta: 1.1 }, vec![2]),
        ];
        for (g, modes) in gates {
            let s = build_symplectic(g, &modes, 3).unwrap();
            assert!(s.symplectic_defect() < 1e-12, "{g:?}");
        }
    }

    #[test]
    fn ndpa_gain_two_coefficients() {
        // a -> √2 a + 1·b†: magnitudes (√2, 1)
        let s = build_symplectic(GaussianGate::TwoModeSqueezer { gain: 2.0 }, &[0, 1], 2).unwrap();
        let (alpha, beta) = s.bogoliubov_coefficients();
        assert!((alpha[(0, 0)].re - 2f64.sqrt()).abs() < 1e-14 && alpha[(0, 0)].im.abs() < 1e-14);
        assert!((beta[(0, 1)].re - 1.0).abs() < 1e-14);
        assert!(alpha[(0, 1)].norm() < 1e-14 && beta[(0, 0)].norm() < 1e-14);
    }

    #[test]
    fn parameter_and_index_errors() {
        assert!(matches!(
            build_symplectic(GaussianGate::BeamSplitter { transmittance: 1.2 }, &[0, 1], 2),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            build_symplectic(GaussianGate::TwoModeSqueezer { gain: 0.5 }, &[0, 1], 2),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            build_symplectic(GaussianGate::BeamSplitter { transmittance: 0.5 }, &[1, 1], 2),
            Err(Error::Index(_))
        ));
        assert!(matches!(build_symplectic(GaussianGate::Rotation { theta: 0.1 }, &[3], 2), Err(Error::Index(_))));
    }
}
