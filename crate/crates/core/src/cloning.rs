//! Optimal 1→N cloning of coherent states: the fidelity operator and its top
//! eigenvalue, the Heisenberg-picture cloner and teleportation-based cloner
//! as linear maps on mode operators, and the Gaussian resource state.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::fock::{displacement_scaled, expquad_matrix, expquad_p_matrix, FockOperator, FockVector};
use crate::gaussian::{GaussianState, SymplecticTransform};
use crate::quadrature::GaussHermite;
use crate::teleport::F_NO_CLONING;

type C64 = Complex64;

const I: C64 = C64::new(0.0, 1.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Linear combination `Σ_k alpha[k] m_k + beta[k] m_k†` of basis mode operators.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearForm {
    pub alpha: Vec<C64>,
    pub beta: Vec<C64>,
}

impl LinearForm {
    pub fn zero(n: usize) -> Self {
        Self { alpha: vec![C64::default(); n], beta: vec![C64::default(); n] }
    }

    /// The annihilation operator of basis mode `k`.
    pub fn mode(n: usize, k: usize) -> Self {
        let mut f = Self::zero(n);
        f.alpha[k] = ONE;
        f
    }

    pub fn dagger(&self) -> Self {
        Self {
            alpha: self.beta.iter().map(|z| z.conj()).collect(),
            beta: self.alpha.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { alpha: self.alpha.iter().map(|z| z * c).collect(), beta: self.beta.iter().map(|z| z * c).collect() }
    }

    pub fn add(&self, other: &LinearForm) -> Self {
        Self {
            alpha: self.alpha.iter().zip(&other.alpha).map(|(a, b)| a + b).collect(),
            beta: self.beta.iter().zip(&other.beta).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &LinearForm) -> Self {
        self.add(&other.scale(-ONE))
    }

    /// `(m + m†)/√2`.
    pub fn x(&self) -> Self {
        self.add(&self.dagger()).scale(C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0))
    }

    /// `-i (m - m†)/√2`.
    pub fn p(&self) -> Self {
        self.sub(&self.dagger()).scale(C64::new(0.0, -std::f64::consts::FRAC_1_SQRT_2))
    }

    /// `[self, other†]`.
    pub fn commutator_with_dagger(&self, other: &LinearForm) -> C64 {
        self.alpha.iter().zip(&other.alpha).map(|(a, b)| a * b.conj()).sum::<C64>()
            - self.beta.iter().zip(&other.beta).map(|(a, b)| a * b.conj()).sum::<C64>()
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &LinearForm) -> C64 {
        self.alpha.iter().zip(&other.beta).map(|(a, b)| a * b).sum::<C64>()
            - self.beta.iter().zip(&other.alpha).map(|(a, b)| a * b).sum::<C64>()
    }

    pub fn max_abs_diff(&self, other: &LinearForm) -> f64 {
        self.alpha
            .iter()
            .zip(&other.alpha)
            .chain(self.beta.iter().zip(&other.beta))
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn inner(&self, other: &LinearForm) -> C64 {
        self.alpha.iter().zip(&other.alpha).chain(self.beta.iter().zip(&other.beta)).map(|(a, b)| a.conj() * b).sum()
    }

    /// For a Hermitian form, the real coefficients `(u_k, v_k)` of `Σ u_k x_k + v_k p_k`.
    pub fn quadrature_coefficients(&self) -> Vec<(f64, f64)> {
        // m = (x + ip)/√2: α m + β m† = ((α+β) x + i(α-β) p)/√2
        let s = std::f64::consts::FRAC_1_SQRT_2;
        self.alpha.iter().zip(&self.beta).map(|(a, b)| (((a + b) * s).re, ((a - b) * I * s).re)).collect()
    }
}

/// Output mode operators as linear forms over labeled basis modes.
#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovMap {
    pub basis: Vec<String>,
    pub outputs: Vec<LinearForm>,
}

impl BogoliubovMap {
    /// Largest deviation from `[o_i, o_j†] = δ_ij`, `[o_i, o_j] = 0`.
    pub fn commutator_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, a) in self.outputs.iter().enumerate() {
            for (j, b) in self.outputs.iter().enumerate() {
                let target = if i == j { ONE } else { C64::default() };
                worst = worst.max((a.commutator_with_dagger(b) - target).norm());
                worst = worst.max(a.commutator(b).norm());
            }
        }
        worst
    }

    /// Largest coefficient difference between two maps on the same basis.
    pub fn distance(&self, other: &BogoliubovMap) -> Result<f64> {
        if self.basis != other.basis || self.outputs.len() != other.outputs.len() {
            return Err(param("maps have different bases or output counts"));
        }
        Ok(self.outputs.iter().zip(&other.outputs).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max))
    }

    pub fn basis_index(&self, label: &str) -> Option<usize> {
        self.basis.iter().position(|b| b == label)
    }
}

fn cloning_basis(n: usize) -> Vec<String> {
    let mut basis = vec!["in".to_string(), "a0".to_string()];
    basis.extend((1..=n).map(|k| format!("b{k}")));
    basis
}

fn real(v: f64) -> C64 {
    C64::new(v, 0.0)
}

/// Modes `a_1..a_N` of the intermediate state, written in terms of the
/// `b_k` modes of `ρ_T`. Index `k` of the returned vector is `a_{k+1}`.
fn psi_modes(n: usize) -> Vec<LinearForm> {
    let dim = n + 2;
    let nf = n as f64;
    let b = |k: usize| LinearForm::mode(dim, k + 1);
    let mut modes = Vec::with_capacity(n);
    let mut a1 = LinearForm::zero(dim);
    let (c1, c2) = (nf / (2.0 * (nf - 1.0).sqrt()), (nf - 2.0) / (2.0 * (nf - 1.0).sqrt()));
    for k in 1..=n {
        a1 = a1.add(&b(k).scale(real(c1 / nf.sqrt()))).add(&b(k).dagger().scale(real(c2 / nf.sqrt())));
    }
    modes.push(a1);
    for j in 2..=n {
        let m = (n - j) as f64;
        let mut aj = b(j - 1).scale(real(((m + 1.0) / (m + 2.0)).sqrt()));
        let w = 1.0 / ((m + 1.0) * (m + 2.0)).sqrt();
        for k in j..=n {
            aj = aj.sub(&b(k).scale(real(w)));
        }
        modes.push(aj);
    }
    modes
}

/// `-√((N-j)/(N-j+1)) a_{j+1} + Σ_{k=2}^{j} a_k/√((N-k+2)(N-k+1))`, shared by
/// the cloner outputs and the teleportation resource.
fn receiver_mix(a: &[LinearForm], n: usize, j: usize) -> LinearForm {
    let dim = a[0].alpha.len();
    let mut out = LinearForm::zero(dim);
    if j < n {
        out = out.sub(&a[j].scale(real((((n - j) as f64) / ((n - j + 1) as f64)).sqrt())));
    }
    for k in 2..=j {
        out = out.add(&a[k - 1].scale(real(1.0 / (((n - k + 2) * (n - k + 1)) as f64).sqrt())));
    }
    out
}

fn check_n(n: usize) -> Result<()> {
    if n < 2 {
        return Err(param(format!("number of clones N = {n} must be at least 2")));
    }
    Ok(())
}

/// Cloner outputs `a_in + √((N-1)/N) a_1† + (receiver mix)` over the basis
/// `{in, a0, b1..bN}` (the ancilla `a0` does not appear).
pub fn bogoliubov_cloner(n: usize) -> Result<BogoliubovMap> {
    check_n(n)?;
    let basis = cloning_basis(n);
    let a = psi_modes(n);
    let input = LinearForm::mode(n + 2, 0);
    let lead = a[0].dagger().scale(real(((n - 1) as f64 / n as f64).sqrt()));
    let outputs = (1..=n).map(|j| input.add(&lead).add(&receiver_mix(&a, n, j))).collect();
    Ok(BogoliubovMap { basis, outputs })
}

/// Resource modes `c_0..c_N` built from the ancilla `a0` and the modes `a_j`.
pub fn resource_modes(n: usize) -> Result<Vec<LinearForm>> {
    check_n(n)?;
    let nf = n as f64;
    let a = psi_modes(n);
    let a0 = LinearForm::mode(n + 2, 1);
    let mut c = Vec::with_capacity(n + 1);
    c.push(a0.dagger().scale(real((1.0 / (nf - 1.0)).sqrt())).sub(&a[0].scale(real((nf / (nf - 1.0)).sqrt()))));
    for j in 1..=n {
        let cj = a0
            .scale(real((1.0 / (nf - 1.0)).sqrt()))
            .sub(&a[0].dagger().scale(real((1.0 / (nf * (nf - 1.0))).sqrt())))
            .add(&receiver_mix(&a, n, j));
        c.push(cj);
    }
    Ok(c)
}

/// Teleportation outputs: each receiver mode displaced by the measured
/// `(x_in - x_c0)/√2` and `(p_in + p_c0)/√2`.
pub fn bogoliubov_teleporter(n: usize) -> Result<BogoliubovMap> {
    let c = resource_modes(n)?;
    let input = LinearForm::mode(n + 2, 0);
    let s = real(std::f64::consts::FRAC_1_SQRT_2);
    let shift = input.x().sub(&c[0].x()).scale(s).add(&input.p().add(&c[0].p()).scale(I * s));
    let outputs = c[1..].iter().map(|cj| cj.add(&shift)).collect();
    Ok(BogoliubovMap { basis: cloning_basis(n), outputs })
}

/// Fit of the cloner noise term `a_out,j - a_in` to
/// `phase · (p_sign P_j/√2 + (i/√2) Σ_{k≠j} Q_k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseFormFit {
    pub phase: C64,
    pub p_sign: f64,
    /// Largest coefficient residual of the fitted form over all outputs.
    pub residual: f64,
    /// Residual of the form taken with `phase = 1`, `p_sign = -1`.
    pub literal_residual: f64,
}

fn noise_target(n: usize, j: usize, p_sign: f64) -> LinearForm {
    let dim = n + 2;
    let s = real(std::f64::consts::FRAC_1_SQRT_2);
    let b = |k: usize| LinearForm::mode(dim, k + 1);
    let mut t = b(j).p().scale(real(p_sign) * s);
    for k in (1..=n).filter(|&k| k != j) {
        t = t.add(&b(k).x().scale(I * s));
    }
    t
}

pub fn cloner_noise_fit(n: usize) -> Result<NoiseFormFit> {
    let map = bogoliubov_cloner(n)?;
    let input = LinearForm::mode(n + 2, 0);
    let deltas: Vec<LinearForm> = map.outputs.iter().map(|o| o.sub(&input)).collect();
    let mut best: Option<NoiseFormFit> = None;
    let mut literal_residual: f64 = 0.0;
    for j in 1..=n {
        literal_residual = literal_residual.max(deltas[j - 1].max_abs_diff(&noise_target(n, j, -1.0)));
    }
    for p_sign in [1.0, -1.0] {
        let t1 = noise_target(n, 1, p_sign);
        let phase = t1.inner(&deltas[0]) / t1.inner(&t1);
        let residual =
            (1..=n).map(|j| deltas[j - 1].max_abs_diff(&noise_target(n, j, p_sign).scale(phase))).fold(0.0, f64::max);
        if best.is_none_or(|b| residual < b.residual) {
            best = Some(NoiseFormFit { phase, p_sign, residual, literal_residual });
        }
    }
    Ok(best.expect("two candidates evaluated"))
}

/// Symplectic matrix of real-coefficient mode forms: rows `(x_out, p_out)`
/// per form, columns `(x_k, p_k)` for the basis modes in `columns`.
fn forms_to_symplectic(forms: &[LinearForm], columns: &[usize]) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(2 * forms.len(), 2 * columns.len());
    for (r, f) in forms.iter().enumerate() {
        for (c, &k) in columns.iter().enumerate() {
            let (a, b) = (f.alpha[k], f.beta[k]);
            s[(2 * r, 2 * c)] = (a + b).re;
            s[(2 * r, 2 * c + 1)] = -(a - b).im;
            s[(2 * r + 1, 2 * c)] = (a + b).im;
            s[(2 * r + 1, 2 * c + 1)] = (a - b).re;
        }
    }
    s
}

/// `(N+1)`-mode resource `|Φ_{N+1}⟩` for vacuum `ρ_T` and vacuum ancilla;
/// mode 0 is the sender.
pub fn phi_resource_gaussian(n: usize) -> Result<GaussianState> {
    let c = resource_modes(n)?;
    let columns: Vec<usize> = (1..n + 2).collect();
    let s = SymplecticTransform::from_matrix(forms_to_symplectic(&c, &columns))?;
    GaussianState::vacuum(n + 1).apply_symplectic(&s)
}

/// `exp(-Σ_l L_l² / 2)` on `dim^M` levels for mutually commuting Hermitian
/// forms `L_l = Σ_k u_lk x_k + v_lk p_k` over `M` modes.
///
/// Written as `(2π)^{-l/2} ∫ d^l s e^{-|s|²/2} exp(i Σ_l s_l L_l)` with the
/// exponential a product of displacements. Without their Gaussian prefactor
/// the displacement elements are polynomials in `s`, so a tensor
/// Gauss–Hermite rule in the principal axes of the total Gaussian weight is
/// exact and yields the exact elements of the untruncated operator.
#[allow(clippy::needless_range_loop)]
pub fn exp_commuting_forms(forms: &[Vec<(f64, f64)>], dim: usize) -> Result<DMatrix<C64>> {
    let l = forms.len();
    if l == 0 || l > 3 {
        return Err(param("between one and three forms supported"));
    }
    let m = forms[0].len();
    if m == 0 || forms.iter().any(|f| f.len() != m) {
        return Err(param("forms must cover the same nonzero number of modes"));
    }
    for a in 0..l {
        for b in a + 1..l {
            let comm: f64 = (0..m).map(|k| forms[a][k].0 * forms[b][k].1 - forms[a][k].1 * forms[b][k].0).sum();
            if comm.abs() > 1e-12 {
                return Err(param(format!("forms {a} and {b} do not commute ({comm:.3e})")));
            }
        }
    }
    // weight e^{-sᵀ K s}: K = I/2 + Σ_k (u_k u_kᵀ + v_k v_kᵀ)/4
    let mut kmat = DMatrix::<f64>::identity(l, l) * 0.5;
    for k in 0..m {
        for a in 0..l {
            for b in 0..l {
                kmat[(a, b)] += 0.25 * (forms[a][k].0 * forms[b][k].0 + forms[a][k].1 * forms[b][k].1);
            }
        }
    }
    let eig = SymmetricEigen::new(kmat);
    let order = m * (dim - 1) + 8;
    let gh = GaussHermite::new(order);
    let size = dim.pow(m as u32);
    let mut out = DMatrix::<C64>::zeros(size, size);
    let mut idx = vec![0usize; l];
    let norm = (2.0 * std::f64::consts::PI).powf(-(l as f64) / 2.0);
    loop {
        // node z in principal axes, s = W z
        let mut weight = norm;
        let mut z = vec![0.0; l];
        for a in 0..l {
            let lam = eig.eigenvalues[a];
            z[a] = gh.nodes[idx[a]] / lam.sqrt();
            weight *= gh.weights[idx[a]] / lam.sqrt();
        }
        let s: Vec<f64> = (0..l).map(|a| (0..l).map(|b| eig.eigenvectors[(a, b)] * z[b]).sum()).collect();
        let mut prod = DMatrix::<C64>::from_element(1, 1, C64::new(weight, 0.0));
        for k in 0..m {
            // exp(i s (u x + v p)) = D(α), α = s (-v + i u)/√2
            let (mut u, mut v) = (0.0, 0.0);
            for a in 0..l {
                u += s[a] * forms[a][k].0;
                v += s[a] * forms[a][k].1;
            }
            let alpha = C64::new(-v, u) * std::f64::consts::FRAC_1_SQRT_2;
            prod = prod.kronecker(&displacement_scaled(alpha, dim, dim));
        }
        out += prod;
        let mut a = 0;
        loop {
            idx[a] += 1;
            if idx[a] < order {
                break;
            }
            idx[a] = 0;
            a += 1;
            if a == l {
                return Ok(out);
            }
        }
    }
}

/// Reorders the modes of a uniform-dimension operator: mode `k` of `op`
/// becomes mode `order[k]` of the result.
fn place_modes(op: &DMatrix<f64>, dim: usize, order: &[usize]) -> DMatrix<f64> {
    let n = order.len();
    let size = op.nrows();
    let map = |idx: usize| -> usize {
        let mut rem = idx;
        let mut out = 0;
        for k in (0..n).rev() {
            let digit = rem % dim;
            rem /= dim;
            out += digit * dim.pow((n - 1 - order[k]) as u32);
        }
        out
    };
    let targets: Vec<usize> = (0..size).map(map).collect();
    let mut out = DMatrix::zeros(size, size);
    for i in 0..size {
        for j in 0..size {
            out[(targets[i], targets[j])] = op[(i, j)];
        }
    }
    out
}

/// Term `exp(-(P_j² + (Σ_{k≠j} Q_k)²)/2)` (mode `j` zero-based).
fn objective_term(n: usize, cutoff: usize, j: usize) -> Result<DMatrix<f64>> {
    let ep = expquad_p_matrix(0.5, cutoff)?;
    let rest = if n == 2 {
        expquad_matrix(0.5, cutoff)?
    } else {
        let sum_q = vec![(1.0, 0.0); n - 1];
        let z = exp_commuting_forms(&[sum_q], cutoff)?;
        z.map(|v| v.re)
    };
    let local = ep.kronecker(&rest);
    let mut order = vec![j];
    order.extend((0..n).filter(|&k| k != j));
    // place_modes wants the destination of each source mode
    Ok(place_modes(&local, cutoff, &order))
}

/// `O = (1/N) Σ_j exp(-(P_j² + (Σ_{k≠j} Q_k)²)/2)` on `cutoff^N` levels. Each
/// matrix element is exact for the untruncated operator, so enlarging the
/// cutoff can only raise the top eigenvalue.
#[derive(Debug, Clone)]
pub struct CloneObjective {
    n: usize,
    cutoff: usize,
    matrix: DMatrix<f64>,
}

impl CloneObjective {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// The real symmetric matrix of `O`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn operator(&self) -> FockOperator {
        FockOperator::new(vec![self.cutoff; self.n], self.matrix.map(|v| C64::new(v, 0.0))).expect("consistent dims")
    }

    pub fn expectation(&self, state: &FockVector) -> Result<f64> {
        check_state_dims(state.dims(), self.n, self.cutoff)?;
        let v = state.amps();
        let re = v.map(|z| z.re);
        let im = v.map(|z| z.im);
        let num = re.dot(&(&self.matrix * &re)) + im.dot(&(&self.matrix * &im));
        Ok(num / v.norm_squared())
    }
}

fn check_state_dims(dims: &[usize], n: usize, cutoff: usize) -> Result<()> {
    if dims.len() != n || dims.iter().any(|&d| d != cutoff) {
        return Err(Error::Dimension { expected: cutoff.pow(n as u32), got: dims.iter().product() });
    }
    Ok(())
}

pub fn clone_objective(n: usize, cutoff: usize) -> Result<CloneObjective> {
    check_n(n)?;
    if cutoff < 2 {
        return Err(param(format!("cutoff {cutoff} too small")));
    }
    let size = cutoff
        .checked_pow(n as u32)
        .filter(|&s| s <= 4096)
        .ok_or_else(|| param(format!("objective dimension {cutoff}^{n} exceeds the dense limit 4096")))?;
    let mut matrix = DMatrix::zeros(size, size);
    for j in 0..n {
        matrix += objective_term(n, cutoff, j)?;
    }
    matrix /= n as f64;
    let matrix = (&matrix + matrix.transpose()) * 0.5;
    Ok(CloneObjective { n, cutoff, matrix })
}

/// Per-output fidelities `F_j = Tr[exp(-(P_j² + (Σ_{k≠j} Q_k)²)/2) ρ_T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloneFidelities {
    pub per_output: Vec<f64>,
    pub mean: f64,
}

/// Fidelities for a density matrix `ρ_T` on `N` modes of equal cutoff.
pub fn clone_fidelity_for(rho: &FockOperator, n: usize) -> Result<CloneFidelities> {
    check_n(n)?;
    let cutoff = rho.dims().first().copied().unwrap_or(0);
    check_state_dims(rho.dims(), n, cutoff)?;
    let mut per_output = Vec::with_capacity(n);
    for j in 0..n {
        let term = objective_term(n, cutoff, j)?;
        let tr: f64 = (0..term.nrows())
            .map(|a| (0..term.ncols()).map(|b| term[(a, b)] * rho.matrix()[(b, a)].re).sum::<f64>())
            .sum();
        per_output.push(tr / rho.trace().re);
    }
    let mean = per_output.iter().sum::<f64>() / n as f64;
    Ok(CloneFidelities { per_output, mean })
}

/// `F_j` evaluated from the cloner map: the output vacuum probability with
/// vacuum input is `⟨exp(-(X² + Y²)/2)⟩` where `a_out,j - a_in = (X + iY)/√2`.
pub fn clone_fidelity_from_map(map: &BogoliubovMap, rho: &FockOperator) -> Result<CloneFidelities> {
    let n = map.outputs.len();
    let cutoff = rho.dims().first().copied().unwrap_or(0);
    check_state_dims(rho.dims(), n, cutoff)?;
    let input = map.basis_index("in").ok_or_else(|| param("map has no input mode"))?;
    let modes: Vec<usize> = (0..map.basis.len()).filter(|k| map.basis[*k].starts_with('b')).collect();
    let mut per_output = Vec::with_capacity(n);
    for out in &map.outputs {
        let delta = out.sub(&LinearForm::mode(map.basis.len(), input));
        let s = real(std::f64::consts::FRAC_1_SQRT_2);
        let x = delta.add(&delta.dagger()).scale(s);
        let y = delta.sub(&delta.dagger()).scale(-I * s);
        let pick = |f: &LinearForm| -> Vec<(f64, f64)> {
            let q = f.quadrature_coefficients();
            modes.iter().map(|&k| q[k]).collect()
        };
        let op = exp_commuting_forms(&[pick(&x), pick(&y)], cutoff)?;
        let tr: C64 = (op * rho.matrix()).trace();
        per_output.push(tr.re / rho.trace().re);
    }
    let mean = per_output.iter().sum::<f64>() / n as f64;
    Ok(CloneFidelities { per_output, mean })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EigenMethod {
    Dense,
    PowerIteration,
}

/// Dense Hermitian eigensolve up to this cutoff, power iteration above.
pub const DENSE_CUTOFF_LIMIT: usize = 32;

#[derive(Debug, Clone)]
pub struct CloneOptimum {
    pub fidelity: f64,
    pub state: FockVector,
    pub method: EigenMethod,
    /// `‖O v - F v‖` for the returned eigenvector.
    pub residual: f64,
}

pub fn optimal_clone_fidelity(n: usize, cutoff: usize) -> Result<CloneOptimum> {
    let obj = clone_objective(n, cutoff)?;
    let (fidelity, vec, method) = if cutoff <= DENSE_CUTOFF_LIMIT {
        let eig = SymmetricEigen::new(obj.matrix.clone());
        let (imax, _) =
            eig.eigenvalues.iter().enumerate().fold(
                (0, f64::NEG_INFINITY),
                |best, (i, &v)| {
                    if v > best.1 {
                        (i, v)
                    } else {
                        best
                    }
                },
            );
        (eig.eigenvalues[imax], eig.eigenvectors.column(imax).into_owned(), EigenMethod::Dense)
    } else {
        let (v, vec) = power_iteration(&obj.matrix, 1e-13, 20_000)?;
        (v, vec, EigenMethod::PowerIteration)
    };
    let residual = (&obj.matrix * &vec - &vec * fidelity).norm();
    let state = FockVector::new(vec![cutoff; n], vec.map(|v| C64::new(v, 0.0)))?;
    Ok(CloneOptimum { fidelity, state, method, residual })
}

/// Top eigenpair of a symmetric matrix with positive spectrum.
fn power_iteration(m: &DMatrix<f64>, tol: f64, max_iter: usize) -> Result<(f64, DVector<f64>)> {
    let n = m.nrows();
    let mut v = DVector::from_element(n, 1e-3);
    v[0] = 1.0;
    v /= v.norm();
    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let w = m * &v;
        lambda = v.dot(&w);
        residual = (&w - &v * lambda).norm();
        let norm = w.norm();
        if !(norm > 0.0) {
            return Err(Error::ZeroNorm("power iteration collapsed".into()));
        }
        v = w / norm;
        if residual < tol {
            return Ok((lambda, v));
        }
    }
    Err(Error::Convergence { context: format!("power iteration stalled at eigenvalue {lambda}"), residual })
}

/// Cutoffs reported by [`clone_convergence_report`] by default.
pub const REPORT_CUTOFFS: [usize; 4] = [16, 24, 32, 40];

/// Convergence of the optimal cloning fidelity with the cutoff.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CloneReport {
    pub schema: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub cutoffs: Vec<usize>,
    pub fidelities: Vec<f64>,
    /// Fidelity of the vacuum `ρ_T`, `2/√(3(N+1))` (the Gaussian optimum 2/3 at N = 2).
    pub gaussian_value: f64,
    pub reference: f64,
}

impl CloneReport {
    pub fn monotone(&self) -> bool {
        self.fidelities.windows(2).all(|w| w[1] >= w[0] - 1e-12)
    }
}

pub fn clone_convergence_report(n: usize, cutoffs: &[usize]) -> Result<CloneReport> {
    if cutoffs.is_empty() {
        return Err(param("at least one cutoff required"));
    }
    let mut fidelities = Vec::with_capacity(cutoffs.len());
    for &c in cutoffs {
        fidelities.push(optimal_clone_fidelity(n, c)?.fidelity);
    }
    Ok(CloneReport {
        schema: "1".into(),
        n,
        cutoffs: cutoffs.to_vec(),
        fidelities,
        gaussian_value: vacuum_clone_fidelity(n),
        reference: F_NO_CLONING,
    })
}

/// `⟨0|O|0⟩ = √(2/3) · √(2/(N+1))`.
pub fn vacuum_clone_fidelity(n: usize) -> f64 {
    2.0 / (3.0 * (n as f64 + 1.0)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::GaussianGate;
    use crate::teleport::fidelity_cm;

    #[test]
    fn n2_cloner_matches_table() {
        let map = bogoliubov_cloner(2).unwrap();
        assert!(map.commutator_defect() < 1e-12);
        // a_out,1 = a_in + a_1†/√2 - a_2/√2 with a_j written over b
        let a = psi_modes(2);
        let expected = LinearForm::mode(4, 0)
            .add(&a[0].dagger().scale(real(std::f64::consts::FRAC_1_SQRT_2)))
            .sub(&a[1].scale(real(std::f64::consts::FRAC_1_SQRT_2)));
        assert!(map.outputs[0].max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn teleporter_equals_cloner() {
        for n in 2..=5 {
            let c = bogoliubov_cloner(n).unwrap();
            let t = bogoliubov_teleporter(n).unwrap();
            assert!(c.distance(&t).unwrap() < 1e-12, "N={n}");
            let a0 = t.basis_index("a0").unwrap();
            for o in &t.outputs {
                assert!(o.alpha[a0].norm() < 1e-15 && o.beta[a0].norm() < 1e-15);
            }
            assert!(t.commutator_defect() < 1e-12);
        }
    }

    #[test]
    fn noise_form_matches_up_to_phase() {
        for n in 2..=5 {
            let fit = cloner_noise_fit(n).unwrap();
            assert!(fit.residual < 1e-12, "N={n}: {fit:?}");
            assert!((fit.phase - C64::new(0.0, -1.0)).norm() < 1e-12);
            assert_eq!(fit.p_sign, 1.0);
            assert!(fit.literal_residual > 0.1);
        }
    }

    #[test]
    fn ndpa_gain_reproduces_sender_mode() {
        for n in 2..=5 {
            let g = n as f64 / (n as f64 - 1.0);
            let s = crate::build_symplectic(GaussianGate::TwoModeSqueezer { gain: g }, &[0, 1], 2).unwrap();
            let (alpha, beta) = s.bogoliubov_coefficients();
            let c0 = &resource_modes(n).unwrap()[0];
            // c_0 = √(G-1) a_0† - √G a_1 ; NDPA: a -> √G a + √(G-1) b†
            let a = psi_modes(n);
            let a1_norm: f64 = a[0].commutator_with_dagger(&a[0]).re;
            assert!((a1_norm - 1.0).abs() < 1e-12);
            assert!((alpha[(0, 0)].norm() - (n as f64 / (n as f64 - 1.0)).sqrt()).abs() < 1e-12);
            assert!((beta[(0, 1)].norm() - c0.beta[1].norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn resource_gives_gaussian_cloning_value() {
        for n in 2..=4 {
            let st = phi_resource_gaussian(n).unwrap();
            let nu = st.symplectic_spectrum().unwrap();
            assert!(nu.iter().all(|v| (v - 0.5).abs() < 1e-10));
            for j in 1..=n {
                let f = fidelity_cm(&st.partial_trace(&[0, j]).unwrap()).unwrap();
                assert!((f - vacuum_clone_fidelity(n)).abs() < 1e-12, "N={n}, j={j}: {f}");
            }
        }
    }

    #[test]
    fn vacuum_objective_element() {
        let obj = clone_objective(2, 8).unwrap();
        assert!((obj.matrix()[(0, 0)] - 2.0 / 3.0).abs() < 1e-14);
        let obj3 = clone_objective(3, 5).unwrap();
        assert!((obj3.matrix()[(0, 0)] - vacuum_clone_fidelity(3)).abs() < 1e-13);
    }

    #[test]
    fn sum_form_matches_single_mode_expquad() {
        // exp(-(x)^2/2) through the displacement integral equals the direct quadrature
        let direct = expquad_matrix(0.5, 12).unwrap();
        let integral = exp_commuting_forms(&[vec![(1.0, 0.0)]], 12).unwrap();
        assert!((integral.map(|z| z.re) - direct).amax() < 1e-12);
        assert!(integral.iter().all(|z| z.im.abs() < 1e-12));
    }

    #[test]
    fn permutation_covariance_n3() {
        let obj = clone_objective(3, 4).unwrap();
        // swapping modes 0 and 1 leaves O invariant
        let swapped = place_modes(obj.matrix(), 4, &[1, 0, 2]);
        assert!((swapped - obj.matrix()).amax() < 1e-13);
    }
}
