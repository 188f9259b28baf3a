//! Single- and two-mode operator matrices in the number basis.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::FockOperator;
use crate::error::{param, Error, Result};
use crate::gaussian::Quadrature;
use crate::quadrature::{hermite_orthonormal, GaussHermite};

type C64 = Complex64;

/// Leakage limit for truncated Gaussian unitaries (vacuum-column norm deficit).
pub const UNITARY_LEAKAGE_LIMIT: f64 = 1e-6;
/// Leakage limit for [`displacement_matrix`].
pub const DISPLACEMENT_LEAKAGE_LIMIT: f64 = 1e-8;

pub(crate) fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

fn check_cutoff(cutoff: usize) -> Result<()> {
    if cutoff < 2 {
        return Err(param(format!("cutoff {cutoff} too small; need at least 2 levels")));
    }
    Ok(())
}

/// Annihilation and creation operators on `cutoff` levels (photon numbers `0..cutoff`).
pub fn ladder(cutoff: usize) -> Result<(FockOperator, FockOperator)> {
    check_cutoff(cutoff)?;
    let a = annihilation(cutoff);
    let ad = a.adjoint();
    Ok((FockOperator::single(a), FockOperator::single(ad)))
}

pub(crate) fn annihilation(dim: usize) -> DMatrix<C64> {
    let mut a = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// `x = (a + a†)/√2` or `p = -i(a - a†)/√2`.
pub fn quadrature(cutoff: usize, q: Quadrature) -> Result<FockOperator> {
    check_cutoff(cutoff)?;
    Ok(FockOperator::single(quadrature_matrix(cutoff, q)))
}

pub(crate) fn quadrature_matrix(dim: usize, q: Quadrature) -> DMatrix<C64> {
    let a = annihilation(dim);
    let ad = a.adjoint();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    match q {
        Quadrature::X => (a + ad) * C64::new(s, 0.0),
        Quadrature::P => (a - ad) * C64::new(0.0, -s),
    }
}

/// `⟨m| exp(-c x²) |n⟩` on `cutoff` levels, by Gauss–Hermite quadrature of
/// the oscillator wavefunctions. After rescaling the integrand is a
/// polynomial of degree `2 cutoff - 2`, so `cutoff + 8` nodes are exact.
pub fn expquad_single(c: f64, cutoff: usize) -> Result<FockOperator> {
    Ok(FockOperator::single(expquad_matrix(c, cutoff)?.map(|v| C64::new(v, 0.0))))
}

pub(crate) fn expquad_matrix(c: f64, dim: usize) -> Result<DMatrix<f64>> {
    if !(c >= 0.0) || !c.is_finite() {
        return Err(param(format!("exponent coefficient {c} must be finite and >= 0")));
    }
    if dim == 0 {
        return Err(param("cutoff must be positive"));
    }
    let gh = GaussHermite::new(dim + 8);
    let scale = 1.0 / (1.0 + c).sqrt();
    let mut out = DMatrix::zeros(dim, dim);
    for (&y, &w) in gh.nodes.iter().zip(&gh.weights) {
        let p = hermite_orthonormal(y * scale, dim);
        for m in 0..dim {
            if p[m] == 0.0 {
                continue;
            }
            let wm = w * scale * p[m];
            for n in (m % 2..=m).step_by(2) {
                out[(m, n)] += wm * p[n];
            }
        }
    }
    for m in 0..dim {
        for n in m + 1..dim {
            out[(m, n)] = out[(n, m)];
        }
    }
    Ok(out)
}

/// `exp(-c p²)`: the same elements as `exp(-c x²)` times `(-1)^{(m-n)/2}`.
pub(crate) fn expquad_p_matrix(c: f64, dim: usize) -> Result<DMatrix<f64>> {
    let mut e = expquad_matrix(c, dim)?;
    for m in 0..dim {
        for n in 0..dim {
            if (m + n) % 2 == 0 && ((m as i64 - n as i64) / 2) % 2 != 0 {
                e[(m, n)] = -e[(m, n)];
            }
        }
    }
    Ok(e)
}

/// `D(α) = exp(α a† - α* a)` on `cutoff` levels; fails when the vacuum
/// column loses more than `1e-8` of its norm to truncation.
pub fn displacement_matrix(alpha: C64, cutoff: usize) -> Result<FockOperator> {
    check_cutoff(cutoff)?;
    let scaled = displacement_scaled(alpha, cutoff, cutoff);
    let norm = (-alpha.norm_sqr()).exp();
    let kept: f64 = (0..cutoff).map(|m| scaled[(m, 0)].norm_sqr()).sum::<f64>() * norm;
    let leakage = (1.0 - kept).max(0.0);
    if leakage > DISPLACEMENT_LEAKAGE_LIMIT {
        return Err(Error::CutoffTooSmall { leakage, limit: DISPLACEMENT_LEAKAGE_LIMIT, cutoff });
    }
    Ok(FockOperator::single(scaled * C64::new((-alpha.norm_sqr() / 2.0).exp(), 0.0)))
}

/// `e^{|α|²/2} ⟨m|D(α)|n⟩` for `m < rows`, `n < cols`, from
/// `D_{0,n} ∝ (-α*)^n/√n!` and `√(m+1) D_{m+1,n} = √n D_{m,n-1} + α D_{m,n}`.
/// Every entry is a polynomial in `α, α*`, so it stays finite where the
/// Gaussian prefactor would underflow.
pub(crate) fn displacement_scaled(alpha: C64, rows: usize, cols: usize) -> DMatrix<C64> {
    let mut d = DMatrix::zeros(rows, cols);
    let mac = -alpha.conj();
    let mut v = C64::new(1.0, 0.0);
    for n in 0..cols {
        if n > 0 {
            v = v * mac / (n as f64).sqrt();
        }
        d[(0, n)] = v;
    }
    for m in 0..rows.saturating_sub(1) {
        let inv = 1.0 / ((m + 1) as f64).sqrt();
        for n in 0..cols {
            let mut next = alpha * d[(m, n)];
            if n > 0 {
                next += d[(m, n - 1)] * (n as f64).sqrt();
            }
            d[(m + 1, n)] = next * inv;
        }
    }
    d
}

/// Phase rotation `exp(-iθ n)`, so that `a -> a e^{-iθ}` in the Heisenberg picture.
pub(crate) fn rotation_matrix(theta: f64, dim: usize) -> DMatrix<C64> {
    DMatrix::from_diagonal(&nalgebra::DVector::from_fn(dim, |n, _| C64::from_polar(1.0, -theta * n as f64)))
}

/// `S(s) = exp(s (a² - a†²)/2)`, which maps `x -> e^{-s} x`. Elements come
/// from `S = exp(-t a†²/2) (cosh s)^{-(n + 1/2)} exp(t a²/2)`, `t = tanh s`,
/// and are exact for the untruncated operator.
pub(crate) fn squeezer_matrix(s: f64, dim: usize) -> DMatrix<C64> {
    let t = s.tanh();
    let ln_cosh = s.cosh().ln();
    let lf: Vec<f64> = (0..dim).map(ln_factorial).collect();
    let mut out = DMatrix::zeros(dim, dim);
    if t == 0.0 {
        return DMatrix::identity(dim, dim);
    }
    let ln_half_t = (t.abs() / 2.0).ln();
    for m in 0..dim {
        for n in (m % 2..dim).step_by(2) {
            let mut acc = 0.0;
            for k in (m % 2..=m.min(n)).step_by(2) {
                let i = (m - k) / 2;
                let j = (n - k) / 2;
                let ln_mag = (i + j) as f64 * ln_half_t - lf[i] - lf[j] + 0.5 * (lf[m] + lf[n])
                    - lf[k]
                    - (k as f64 + 0.5) * ln_cosh;
                // (-t/2)^i (t/2)^j
                let neg = i % 2 == 1;
                let sign_t = if t < 0.0 && (i + j) % 2 == 1 { -1.0 } else { 1.0 };
                let sign = if neg { -sign_t } else { sign_t };
                acc += sign * ln_mag.exp();
            }
            out[(m, n)] = C64::new(acc, 0.0);
        }
    }
    out
}

/// `S2(r) = exp(r (a†b† - ab))` on `dim × dim` levels, mode `a` most
/// significant. Uses `exp(T a†b†) (cosh r)^{-(n_a + n_b + 1)} exp(-T ab)`.
pub(crate) fn two_mode_squeezer_matrix(r: f64, dim: usize) -> DMatrix<C64> {
    let t = r.tanh();
    let size = dim * dim;
    if t == 0.0 {
        return DMatrix::identity(size, size);
    }
    let ln_cosh = r.cosh().ln();
    let ln_t = t.abs().ln();
    let lf: Vec<f64> = (0..dim).map(ln_factorial).collect();
    let mut out = DMatrix::zeros(size, size);
    for m1 in 0..dim {
        for m2 in 0..dim {
            for n1 in 0..dim {
                let diff = m1 as i64 - m2 as i64;
                let n2 = n1 as i64 - diff;
                if n2 < 0 || n2 >= dim as i64 {
                    continue;
                }
                let n2 = n2 as usize;
                let mut acc = 0.0;
                for k1 in 0..=m1.min(n1) {
                    let k2 = k1 as i64 - diff;
                    if k2 < 0 || k2 as usize > m2.min(n2) {
                        continue;
                    }
                    let k2 = k2 as usize;
                    let i = m1 - k1;
                    let j = n1 - k1;
                    let ln_mag = (i + j) as f64 * ln_t - lf[i] - lf[j] + 0.5 * (lf[m1] + lf[m2] + lf[n1] + lf[n2])
                        - lf[k1]
                        - lf[k2]
                        - (k1 + k2 + 1) as f64 * ln_cosh;
                    // T^i (-T)^j
                    let mut sign = if j % 2 == 1 { -1.0 } else { 1.0 };
                    if t < 0.0 && (i + j) % 2 == 1 {
                        sign = -sign;
                    }
                    acc += sign * ln_mag.exp();
                }
                out[(m1 * dim + m2, n1 * dim + n2)] = C64::new(acc, 0.0);
            }
        }
    }
    out
}

/// Number-conserving blocks of the real passive two-mode unitary with
/// Schrödinger action `a† -> cos θ a† - sin θ b†`, `b† -> sin θ a† + cos θ b†`.
/// `blocks[N][(k, n)]` is `⟨k, N-k| U |n, N-n⟩`.
///
/// `U = exp(θ (a†b - b†a))`; on each `N`-photon block the generator is a real
/// antisymmetric tridiagonal matrix. A diagonal phase similarity turns
/// `-i` times it into a real symmetric tridiagonal matrix, whose
/// eigendecomposition gives the block without the cancellation that a
/// binomial expansion suffers at large `N`.
#[derive(Debug, Clone)]
pub struct PassiveBlocks {
    blocks: Vec<DMatrix<C64>>,
}

impl PassiveBlocks {
    pub fn rotation(theta: f64, max_total: usize) -> Self {
        let blocks = (0..=max_total).map(|total| rotation_block(theta, total)).collect();
        Self { blocks }
    }

    /// Beam splitter with Heisenberg map `a -> √T a + √(1-T) b`,
    /// `b -> -√(1-T) a + √T b`.
    pub fn beam_splitter(transmittance: f64, max_total: usize) -> Self {
        Self::rotation((1.0 - transmittance).sqrt().atan2(transmittance.sqrt()), max_total)
    }

    pub fn max_total(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn block(&self, total: usize) -> &DMatrix<C64> {
        &self.blocks[total]
    }
}

fn rotation_block(theta: f64, total: usize) -> DMatrix<C64> {
    let size = total + 1;
    if total == 0 {
        return DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    }
    // G_{k+1,k} = ⟨k+1, N-k-1| a†b |k, N-k⟩ = √((k+1)(N-k)), G antisymmetric.
    // With S = diag(i^k): G = i S T S†, T symmetric with T_{k,k+1} = -G_{k+1,k}.
    let mut t = DMatrix::<f64>::zeros(size, size);
    for k in 0..total {
        let g = (((k + 1) * (total - k)) as f64).sqrt();
        t[(k, k + 1)] = -g;
        t[(k + 1, k)] = -g;
    }
    let eig = nalgebra::SymmetricEigen::new(t);
    let v = eig.eigenvectors.map(|x| C64::new(x, 0.0));
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| C64::from_polar(1.0, theta * l)));
    let inner = &v * phases * v.transpose();
    let ipow = |k: usize| match k % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, 1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, -1.0),
    };
    DMatrix::from_fn(size, size, |k, n| {
        // S_kk inner_kn conj(S_nn); the result is real for a real rotation
        let z = ipow(k) * inner[(k, n)] * ipow(n).conj();
        C64::new(z.re, 0.0)
    })
}

pub(crate) fn beam_splitter_matrix(transmittance: f64, dim: usize) -> DMatrix<C64> {
    let blocks = PassiveBlocks::beam_splitter(transmittance, 2 * dim - 2);
    let size = dim * dim;
    let mut out = DMatrix::zeros(size, size);
    for n1 in 0..dim {
        for n2 in 0..dim {
            let total = n1 + n2;
            let b = blocks.block(total);
            for k in total.saturating_sub(dim - 1)..=total.min(dim - 1) {
                out[(k * dim + total - k, n1 * dim + n2)] = b[(k, n1)];
            }
        }
    }
    out
}

/// Gaussian unitaries in the number basis. Conventions match
/// [`crate::gaussian::GaussianGate`]; the two-mode squeezer is parameterized
/// by `r` (intensity gain `cosh² r`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FockGate {
    BeamSplitter {
        transmittance: f64,
    },
    TwoModeSqueezer {
        r: f64,
    },
    /// Squeezes x by `e^{-s}`.
    Squeezer {
        s: f64,
    },
    Rotation {
        theta: f64,
    },
}

/// Truncated matrix of `gate` with `cutoff` levels per mode. Fails with
/// [`Error::CutoffTooSmall`] when the image of the vacuum loses more than
/// `1e-6` of its norm.
pub fn gaussian_unitary_fock(gate: FockGate, cutoff: usize) -> Result<FockOperator> {
    check_cutoff(cutoff)?;
    let (matrix, dims) = match gate {
        FockGate::BeamSplitter { transmittance } => {
            if !(0.0..=1.0).contains(&transmittance) {
                return Err(param(format!("transmittance {transmittance} not in [0, 1]")));
            }
            (beam_splitter_matrix(transmittance, cutoff), vec![cutoff, cutoff])
        }
        FockGate::TwoModeSqueezer { r } => {
            if !r.is_finite() {
                return Err(param("squeezing must be finite"));
            }
            (two_mode_squeezer_matrix(r, cutoff), vec![cutoff, cutoff])
        }
        FockGate::Squeezer { s } => {
            if !s.is_finite() {
                return Err(param("squeezing must be finite"));
            }
            (squeezer_matrix(s, cutoff), vec![cutoff])
        }
        FockGate::Rotation { theta } => (rotation_matrix(theta, cutoff), vec![cutoff]),
    };
    let kept: f64 = matrix.column(0).iter().map(|z| z.norm_sqr()).sum();
    let leakage = (1.0 - kept).abs();
    if leakage > UNITARY_LEAKAGE_LIMIT {
        return Err(Error::CutoffTooSmall { leakage, limit: UNITARY_LEAKAGE_LIMIT, cutoff });
    }
    FockOperator::new(dims, matrix)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_and_commutator() {
        let (a, ad) = ladder(6).unwrap();
        let n = ad.matrix() * a.matrix();
        for k in 0..6 {
            assert!((n[(k, k)].re - k as f64).abs() < 1e-14);
        }
        let x = quadrature_matrix(6, Quadrature::X);
        let p = quadrature_matrix(6, Quadrature::P);
        assert!(((&x * &x)[(0, 0)] - C64::new(0.5, 0.0)).norm() < 1e-15);
        let comm = &x * &p - &p * &x;
        for i in 0..6 {
            for j in 0..6 {
                let expected = if i == j && i < 5 { C64::new(0.0, 1.0) } else { C64::new(0.0, 0.0) };
                if i < 5 && j < 5 {
                    assert!((comm[(i, j)] - expected).norm() < 1e-14, "({i},{j})");
                }
            }
        }
        assert!((comm[(5, 5)] - C64::new(0.0, 1.0)).norm() > 1.0);
    }

    #[test]
    fn expquad_vacuum_element() {
        let e = expquad_matrix(0.5, 10).unwrap();
        assert!((e[(0, 0)] - (2.0f64 / 3.0).sqrt()).abs() < 1e-14);
        assert_eq!(e[(0, 1)], 0.0);
        let id = expquad_matrix(0.0, 10).unwrap();
        assert!((id - DMatrix::<f64>::identity(10, 10)).amax() < 1e-12);
    }

    #[test]
    fn displacement_identities() {
        let alpha = C64::new(0.4, -0.3);
        let d = displacement_matrix(alpha, 40).unwrap();
        assert!((d.matrix()[(0, 0)].re - (-alpha.norm_sqr() / 2.0).exp()).abs() < 1e-15);
        let dm = displacement_matrix(-alpha, 40).unwrap();
        let prod = d.matrix() * dm.matrix();
        for i in 0..20 {
            for j in 0..20 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - C64::new(expected, 0.0)).norm() < 1e-8);
            }
        }
        assert!(displacement_matrix(C64::new(3.0, 0.0), 10).is_err());
    }

    #[test]
    fn beam_splitter_single_photon() {
        let u = gaussian_unitary_fock(FockGate::BeamSplitter { transmittance: 0.5 }, 4).unwrap();
        let m = u.matrix();
        // |1,0> is column 4; Schrödinger a† -> (a† - b†)/√2
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((m[(4, 4)].re - s).abs() < 1e-15);
        assert!((m[(1, 4)].re + s).abs() < 1e-15);
    }

    #[test]
    fn passive_blocks_are_unitary() {
        let blocks = PassiveBlocks::beam_splitter(0.3, 120);
        for total in [1, 17, 120] {
            let b = blocks.block(total);
            let defect = (b.adjoint() * b - DMatrix::<C64>::identity(total + 1, total + 1))
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(defect < 1e-10, "N={total} defect {defect}");
        }
    }

    #[test]
    fn squeezer_zero_is_identity_and_vacuum_column() {
        let id = squeezer_matrix(0.0, 8);
        assert_eq!(id, DMatrix::<C64>::identity(8, 8));
        let s = 0.3f64;
        let m = squeezer_matrix(s, 30);
        // ⟨2|S|0⟩ = -tanh(s)/√2 / √cosh(s)
        let expected = -s.tanh() / 2f64.sqrt() / s.cosh().sqrt();
        assert!((m[(2, 0)].re - expected).abs() < 1e-14);
        assert!(gaussian_unitary_fock(FockGate::Squeezer { s: 2.0 }, 10).is_err());
    }
}
