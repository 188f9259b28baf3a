//! Gauss–Hermite quadrature against the weight `exp(-x^2)`.
//!
//! Nodes come from the Golub–Welsch eigenproblem of the Jacobi matrix and are
//! then polished by Newton steps on the orthonormal Hermite recurrence.
//! Weights use the Christoffel form `1 / sum_n p_n(x)^2`, which keeps the
//! tiny outer weights relatively accurate.

use nalgebra::{DMatrix, SymmetricEigen};

/// Orthonormal Hermite polynomials `p_0..p_{len-1}` at `x`, normalized so that
/// `∫ p_m p_n exp(-x^2) dx = δ_mn`. Multiplying by `exp(-x^2/2)` gives the
/// oscillator eigenfunctions in the `[x, p] = i` convention.
pub fn hermite_orthonormal(x: f64, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    if len == 0 {
        return out;
    }
    out.push(std::f64::consts::PI.powf(-0.25));
    if len == 1 {
        return out;
    }
    out.push(std::f64::consts::SQRT_2 * x * out[0]);
    for n in 2..len {
        let nf = n as f64;
        let next = (2.0 / nf).sqrt() * x * out[n - 1] - ((nf - 1.0) / nf).sqrt() * out[n - 2];
        out.push(next);
    }
    out
}

#[derive(Debug, Clone)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussHermite {
    /// `order`-point rule; exact for polynomials of degree `2 * order - 1`.
    pub fn new(order: usize) -> Self {
        assert!(order >= 1, "Gauss-Hermite order must be positive");
        let mut jacobi = DMatrix::<f64>::zeros(order, order);
        for i in 1..order {
            let b = (i as f64 / 2.0).sqrt();
            jacobi[(i, i - 1)] = b;
            jacobi[(i - 1, i)] = b;
        }
        let eig = SymmetricEigen::new(jacobi);
        let mut nodes: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let scale = (2.0 * order as f64).sqrt();
        let mut weights = Vec::with_capacity(order);
        for x in nodes.iter_mut() {
            for _ in 0..4 {
                let p = hermite_orthonormal(*x, order + 1);
                let deriv = scale * p[order - 1];
                if deriv == 0.0 {
                    break;
                }
                let step = p[order] / deriv;
                *x -= step;
                if step.abs() < 1e-15 * x.abs().max(1.0) {
                    break;
                }
            }
            let p = hermite_orthonormal(*x, order);
            let christoffel: f64 = p.iter().map(|v| v * v).sum();
            weights.push(1.0 / christoffel);
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Integrates `f(x) exp(-x^2)` over the real line.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}
