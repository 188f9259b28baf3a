//! Truncated number-basis states and operators.
//!
//! Multi-mode objects carry one dimension per mode (levels `0..dim`), with
//! mode 0 the most significant index in the flattened basis.

mod operators;

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub(crate) use operators::{
    annihilation, displacement_scaled, expquad_matrix, expquad_p_matrix, ln_factorial, quadrature_matrix,
};
pub use operators::{
    displacement_matrix, expquad_single, gaussian_unitary_fock, ladder, quadrature, FockGate, PassiveBlocks,
    DISPLACEMENT_LEAKAGE_LIMIT, UNITARY_LEAKAGE_LIMIT,
};

use crate::error::{param, Error, Result};
use crate::gaussian::{GaussianState, Quadrature};

type C64 = Complex64;

const ZERO: C64 = C64::new(0.0, 0.0);
const BINARY_MAGIC: &[u8; 8] = b"CVFOCK01";

fn total_dim(dims: &[usize]) -> usize {
    dims.iter().product()
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * dims[k + 1];
    }
    s
}

/// Flat offsets of every multi-index over `modes`, in row-major order of
/// those modes, using the given strides.
fn offsets(modes: &[usize], dims: &[usize], strides: &[usize]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &m in modes {
        let mut next = Vec::with_capacity(out.len() * dims[m]);
        for &o in &out {
            for k in 0..dims[m] {
                next.push(o + k * strides[m]);
            }
        }
        out = next;
    }
    out
}

fn validate_modes(modes: &[usize], n_modes: usize) -> Result<()> {
    let mut seen = vec![false; n_modes];
    for &m in modes {
        if m >= n_modes {
            return Err(Error::Index(format!("mode {m} out of range for {n_modes} modes")));
        }
        if seen[m] {
            return Err(Error::Index(format!("duplicate mode {m}")));
        }
        seen[m] = true;
    }
    Ok(())
}

/// Dense complex operator on a truncated multi-mode number basis.
#[derive(Debug, Clone, PartialEq)]
pub struct FockOperator {
    dims: Vec<usize>,
    matrix: DMatrix<C64>,
}

impl FockOperator {
    pub fn new(dims: Vec<usize>, matrix: DMatrix<C64>) -> Result<Self> {
        let n = total_dim(&dims);
        if dims.is_empty() || matrix.nrows() != n || matrix.ncols() != n {
            return Err(Error::Dimension { expected: n, got: matrix.nrows().max(matrix.ncols()) });
        }
        Ok(Self { dims, matrix })
    }

    pub(crate) fn single(matrix: DMatrix<C64>) -> Self {
        Self { dims: vec![matrix.nrows()], matrix }
    }

    pub fn identity(dims: Vec<usize>) -> Self {
        let n = total_dim(&dims);
        Self { dims, matrix: DMatrix::identity(n, n) }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_modes(&self) -> usize {
        self.dims.len()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    /// `max |M - M†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() < 1e-12
    }

    pub fn adjoint(&self) -> Self {
        Self { dims: self.dims.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn kron(&self, other: &FockOperator) -> Self {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        Self { dims, matrix: self.matrix.kronecker(&other.matrix) }
    }

    pub fn compose(&self, other: &FockOperator) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::Dimension { expected: self.matrix.nrows(), got: other.matrix.nrows() });
        }
        Ok(Self { dims: self.dims.clone(), matrix: &self.matrix * &other.matrix })
    }

    pub fn apply(&self, v: &FockVector) -> Result<FockVector> {
        if self.dims != v.dims {
            return Err(Error::Dimension { expected: self.matrix.ncols(), got: v.amps.len() });
        }
        Ok(FockVector { dims: v.dims.clone(), amps: &self.matrix * &v.amps, leakage: v.leakage })
    }

    /// Partial trace keeping `keep` (in the given order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<FockOperator> {
        if keep.is_empty() {
            return Err(Error::Index("empty mode list".into()));
        }
        validate_modes(keep, self.n_modes())?;
        let st = strides(&self.dims);
        let traced: Vec<usize> = (0..self.n_modes()).filter(|m| !keep.contains(m)).collect();
        let keep_off = offsets(keep, &self.dims, &st);
        let trace_off = offsets(&traced, &self.dims, &st);
        let k = keep_off.len();
        let mut out = DMatrix::zeros(k, k);
        for (i, &oi) in keep_off.iter().enumerate() {
            for (j, &oj) in keep_off.iter().enumerate() {
                out[(i, j)] = trace_off.iter().map(|&t| self.matrix[(oi + t, oj + t)]).sum();
            }
        }
        Ok(Self { dims: keep.iter().map(|&m| self.dims[m]).collect(), matrix: out })
    }

    /// Raw dump: magic `CVFOCK01`, `u32` mode count, one `u32` dimension per
    /// mode, then the matrix row-major as little-endian `(re, im)` `f64` pairs.
    pub fn write_binary<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(BINARY_MAGIC)?;
        w.write_all(&(self.dims.len() as u32).to_le_bytes())?;
        for &d in &self.dims {
            w.write_all(&(d as u32).to_le_bytes())?;
        }
        for i in 0..self.matrix.nrows() {
            for j in 0..self.matrix.ncols() {
                let z = self.matrix[(i, j)];
                w.write_all(&z.re.to_le_bytes())?;
                w.write_all(&z.im.to_le_bytes())?;
            }
        }
        Ok(())
    }

    pub fn read_binary<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != BINARY_MAGIC {
            return Err(Error::Io("not a Fock operator dump".into()));
        }
        let mut word = [0u8; 4];
        r.read_exact(&mut word)?;
        let n_modes = u32::from_le_bytes(word) as usize;
        let mut dims = Vec::with_capacity(n_modes);
        for _ in 0..n_modes {
            r.read_exact(&mut word)?;
            dims.push(u32::from_le_bytes(word) as usize);
        }
        let n = total_dim(&dims);
        let mut matrix = DMatrix::zeros(n, n);
        let mut buf = [0u8; 8];
        for i in 0..n {
            for j in 0..n {
                r.read_exact(&mut buf)?;
                let re = f64::from_le_bytes(buf);
                r.read_exact(&mut buf)?;
                matrix[(i, j)] = C64::new(re, f64::from_le_bytes(buf));
            }
        }
        Self::new(dims, matrix)
    }
}

/// Tensor `op` (acting on one mode) into a multi-mode space with `dims`.
pub fn embed(op: &FockOperator, mode: usize, dims: &[usize]) -> Result<FockOperator> {
    if op.n_modes() != 1 {
        return Err(param("embed expects a single-mode operator"));
    }
    validate_modes(&[mode], dims.len())?;
    if dims[mode] != op.dims[0] {
        return Err(Error::Dimension { expected: dims[mode], got: op.dims[0] });
    }
    let left = total_dim(&dims[..mode]);
    let right = total_dim(&dims[mode + 1..]);
    let matrix =
        DMatrix::<C64>::identity(left, left).kronecker(&op.matrix).kronecker(&DMatrix::<C64>::identity(right, right));
    FockOperator::new(dims.to_vec(), matrix)
}

/// Pure state on a truncated multi-mode number basis. `leakage` records the
/// norm lost to truncation when the state was built from an untruncated one.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    dims: Vec<usize>,
    amps: DVector<C64>,
    leakage: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhotonJump {
    Subtract,
    Add,
}

impl FockVector {
    pub fn new(dims: Vec<usize>, amps: DVector<C64>) -> Result<Self> {
        Self::with_leakage(dims, amps, 0.0)
    }

    pub fn with_leakage(dims: Vec<usize>, amps: DVector<C64>, leakage: f64) -> Result<Self> {
        let n = total_dim(&dims);
        if dims.is_empty() || dims.contains(&0) || amps.len() != n {
            return Err(Error::Dimension { expected: n, got: amps.len() });
        }
        Ok(Self { dims, amps, leakage })
    }

    /// Number state `|occupation⟩`.
    pub fn basis(dims: Vec<usize>, occupation: &[usize]) -> Result<Self> {
        if occupation.len() != dims.len() {
            return Err(Error::Dimension { expected: dims.len(), got: occupation.len() });
        }
        if let Some((m, _)) = occupation.iter().zip(&dims).enumerate().find(|(_, (o, d))| o >= d) {
            return Err(Error::Index(format!("occupation of mode {m} exceeds its cutoff")));
        }
        let st = strides(&dims);
        let mut amps = DVector::zeros(total_dim(&dims));
        amps[occupation.iter().zip(&st).map(|(o, s)| o * s).sum::<usize>()] = C64::new(1.0, 0.0);
        Self::new(dims, amps)
    }

    pub fn vacuum(dims: Vec<usize>) -> Self {
        let zeros = vec![0; dims.len()];
        Self::basis(dims, &zeros).expect("vacuum fits any cutoff")
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_modes(&self) -> usize {
        self.dims.len()
    }

    pub fn amps(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn leakage(&self) -> f64 {
        self.leakage
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn amplitude(&self, occupation: &[usize]) -> C64 {
        let st = strides(&self.dims);
        self.amps[occupation.iter().zip(&st).map(|(o, s)| o * s).sum::<usize>()]
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if !(n > 1e-300) {
            return Err(Error::ZeroNorm("cannot normalize a zero vector".into()));
        }
        Ok(Self { dims: self.dims.clone(), amps: &self.amps / C64::new(n, 0.0), leakage: self.leakage })
    }

    pub fn inner(&self, other: &FockVector) -> Result<C64> {
        if self.dims != other.dims {
            return Err(Error::Dimension { expected: self.amps.len(), got: other.amps.len() });
        }
        Ok(self.amps.dotc(&other.amps))
    }

    pub fn density(&self) -> FockOperator {
        FockOperator { dims: self.dims.clone(), matrix: &self.amps * self.amps.adjoint() }
    }

    /// Applies `op` (rows: product of `out_dims`, cols: product of the input
    /// dimensions of `modes`) to the listed modes; those modes take the
    /// dimensions `out_dims` in the result.
    pub fn apply_local(&self, op: &DMatrix<C64>, modes: &[usize], out_dims: &[usize]) -> Result<FockVector> {
        validate_modes(modes, self.n_modes())?;
        if modes.is_empty() || out_dims.len() != modes.len() {
            return Err(param("apply_local needs one output dimension per target mode"));
        }
        let in_size: usize = modes.iter().map(|&m| self.dims[m]).product();
        if op.ncols() != in_size || op.nrows() != total_dim(out_dims) {
            return Err(Error::Dimension { expected: in_size, got: op.ncols() });
        }
        let mut new_dims = self.dims.clone();
        for (&m, &d) in modes.iter().zip(out_dims) {
            new_dims[m] = d;
        }
        let rest: Vec<usize> = (0..self.n_modes()).filter(|m| !modes.contains(m)).collect();
        let (st_in, st_out) = (strides(&self.dims), strides(&new_dims));
        let (tin, tout) = (offsets(modes, &self.dims, &st_in), offsets(modes, &new_dims, &st_out));
        let (rin, rout) = (offsets(&rest, &self.dims, &st_in), offsets(&rest, &new_dims, &st_out));
        let mut amps = DVector::zeros(total_dim(&new_dims));
        let mut slice = DVector::zeros(tin.len());
        for (&bi, &bo) in rin.iter().zip(&rout) {
            for (k, &o) in tin.iter().enumerate() {
                slice[k] = self.amps[bi + o];
            }
            if slice.iter().all(|z| *z == ZERO) {
                continue;
            }
            let res = op * &slice;
            for (k, &o) in tout.iter().enumerate() {
                amps[bo + o] = res[k];
            }
        }
        Ok(FockVector { dims: new_dims, amps, leakage: self.leakage })
    }

    /// Applies a passive two-mode unitary to `modes = [i, j]`. Output
    /// dimensions `d_i + d_j - 1` hold every component exactly.
    pub fn apply_passive(&self, blocks: &PassiveBlocks, modes: [usize; 2]) -> Result<FockVector> {
        validate_modes(&modes, self.n_modes())?;
        let (da, db) = (self.dims[modes[0]], self.dims[modes[1]]);
        let out = da + db - 1;
        if blocks.max_total() < out - 1 {
            return Err(param(format!("passive blocks cover {} photons, need {}", blocks.max_total(), out - 1)));
        }
        let mut new_dims = self.dims.clone();
        new_dims[modes[0]] = out;
        new_dims[modes[1]] = out;
        let rest: Vec<usize> = (0..self.n_modes()).filter(|m| !modes.contains(m)).collect();
        let (st_in, st_out) = (strides(&self.dims), strides(&new_dims));
        let (rin, rout) = (offsets(&rest, &self.dims, &st_in), offsets(&rest, &new_dims, &st_out));
        let mut amps = DVector::zeros(total_dim(&new_dims));
        let mut input = Vec::new();
        for (&bi, &bo) in rin.iter().zip(&rout) {
            for total in 0..out {
                let lo = total.saturating_sub(db - 1);
                let hi = total.min(da - 1);
                if lo > hi {
                    continue;
                }
                input.clear();
                input.extend(
                    (lo..=hi).map(|n| (n, self.amps[bi + n * st_in[modes[0]] + (total - n) * st_in[modes[1]]])),
                );
                if input.iter().all(|(_, z)| *z == ZERO) {
                    continue;
                }
                let b = blocks.block(total);
                for k in 0..=total {
                    let v: C64 = input.iter().map(|&(n, z)| b[(k, n)] * z).sum();
                    amps[bo + k * st_out[modes[0]] + (total - k) * st_out[modes[1]]] = v;
                }
            }
        }
        Ok(FockVector { dims: new_dims, amps, leakage: self.leakage })
    }

    /// Keeps the first `dims[k]` levels of each mode. Returns the cropped
    /// (unnormalized) vector and the discarded squared norm, which is added
    /// to the leakage.
    pub fn truncated(&self, dims: &[usize]) -> Result<(FockVector, f64)> {
        if dims.len() != self.n_modes() || dims.iter().zip(&self.dims).any(|(&d, &o)| d == 0 || d > o) {
            return Err(param(format!("cannot crop dims {:?} to {dims:?}", self.dims)));
        }
        let all: Vec<usize> = (0..self.n_modes()).collect();
        let src = offsets(&all, dims, &strides(&self.dims));
        let amps = DVector::from_iterator(src.len(), src.iter().map(|&i| self.amps[i]));
        let discarded = (self.amps.norm_squared() - amps.norm_squared()).max(0.0);
        Ok((FockVector { dims: dims.to_vec(), amps, leakage: self.leakage + discarded }, discarded))
    }

    /// Exchanges two modes.
    pub fn swap_modes(&self, i: usize, j: usize) -> Result<FockVector> {
        if i >= self.n_modes() || j >= self.n_modes() {
            return Err(Error::Index(format!("modes ({i}, {j}) out of range for {} modes", self.n_modes())));
        }
        let mut new_dims = self.dims.clone();
        new_dims.swap(i, j);
        let all: Vec<usize> = (0..self.n_modes()).collect();
        let src = offsets(&all, &self.dims, &strides(&self.dims));
        // old mode k lands in slot k with i and j exchanged
        let mut dst_strides = strides(&new_dims);
        dst_strides.swap(i, j);
        let dst = offsets(&all, &self.dims, &dst_strides);
        let mut amps = DVector::zeros(self.amps.len());
        for (&s, &d) in src.iter().zip(&dst) {
            amps[d] = self.amps[s];
        }
        Ok(FockVector { dims: new_dims, amps, leakage: self.leakage })
    }

    /// Reduced density matrix on `keep`.
    pub fn reduced_density(&self, keep: &[usize]) -> Result<FockOperator> {
        if keep.is_empty() {
            return Err(Error::Index("empty mode list".into()));
        }
        validate_modes(keep, self.n_modes())?;
        let st = strides(&self.dims);
        let traced: Vec<usize> = (0..self.n_modes()).filter(|m| !keep.contains(m)).collect();
        let keep_off = offsets(keep, &self.dims, &st);
        let trace_off = offsets(&traced, &self.dims, &st);
        // ρ = Ψ Ψ† with Ψ[kept, traced]
        let psi = DMatrix::from_fn(keep_off.len(), trace_off.len(), |i, j| self.amps[keep_off[i] + trace_off[j]]);
        let matrix = &psi * psi.adjoint();
        FockOperator::new(keep.iter().map(|&m| self.dims[m]).collect(), matrix)
    }

    pub fn expectation(&self, op: &FockOperator) -> Result<C64> {
        let v = op.apply(self)?;
        Ok(self.amps.dotc(&v.amps))
    }

    /// First and second moments of the quadratures, normalized by the norm.
    pub fn moments(&self) -> Result<GaussianState> {
        let norm2 = self.amps.norm_squared();
        if !(norm2 > 0.0) {
            return Err(Error::ZeroNorm("moments of a zero vector".into()));
        }
        let n = self.n_modes();
        let mut images = Vec::with_capacity(2 * n);
        for m in 0..n {
            for q in [Quadrature::X, Quadrature::P] {
                let op = quadrature_matrix(self.dims[m], q);
                images.push(self.apply_local(&op, &[m], &[self.dims[m]])?.amps);
            }
        }
        let mean = DVector::from_fn(2 * n, |i, _| self.amps.dotc(&images[i]).re / norm2);
        let cm = DMatrix::from_fn(2 * n, 2 * n, |i, j| images[i].dotc(&images[j]).re / norm2 - mean[i] * mean[j]);
        GaussianState::with_mean(cm, mean)
    }
}

/// Heralded `a` or `a†` on `mode`. Returns the renormalized state and the
/// success weight `‖a ψ‖² / ‖ψ‖²`. Addition enlarges the mode by one level
/// so that nothing is truncated.
pub fn photon_jump(state: &FockVector, mode: usize, jump: PhotonJump) -> Result<(FockVector, f64)> {
    validate_modes(&[mode], state.n_modes())?;
    let norm2 = state.amps.norm_squared();
    if !(norm2 > 0.0) {
        return Err(Error::ZeroNorm("photon jump on a zero vector".into()));
    }
    let d = state.dims[mode];
    let (op, out) = match jump {
        PhotonJump::Subtract => (annihilation(d), d),
        PhotonJump::Add => {
            let mut ad = DMatrix::zeros(d + 1, d);
            for n in 0..d {
                ad[(n + 1, n)] = C64::new(((n + 1) as f64).sqrt(), 0.0);
            }
            (ad, d + 1)
        }
    };
    let raw = state.apply_local(&op, &[mode], &[out])?;
    let weight = raw.amps.norm_squared() / norm2;
    if !(weight > 1e-24) {
        return Err(Error::ZeroNorm(format!("{jump:?} on mode {mode} annihilates the state")));
    }
    Ok((raw.normalized()?, weight))
}

/// Reduced density matrix of a pure state on `keep`.
pub fn partial_trace_fock(state: &FockVector, keep: &[usize]) -> Result<FockOperator> {
    state.reduced_density(keep)
}

/// `Tr[ρ σ]` (real part; both arguments Hermitian).
pub fn overlap(rho: &FockOperator, sigma: &FockOperator) -> Result<f64> {
    if rho.dims != sigma.dims {
        return Err(Error::Dimension { expected: rho.matrix.nrows(), got: sigma.matrix.nrows() });
    }
    Ok(rho.matrix.transpose().component_mul(&sigma.matrix).iter().map(|z| z.re).sum())
}

/// `|⟨ψ|φ⟩|²`.
pub fn overlap_pure(psi: &FockVector, phi: &FockVector) -> Result<f64> {
    Ok(psi.inner(phi)?.norm_sqr())
}

/// `tanh^n r / cosh r` on `|n, n⟩`, `n < cutoff`; leakage `tanh^{2 cutoff} r`.
pub fn tmsv_fock(r: f64, cutoff: usize) -> Result<FockVector> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(param(format!("squeezing r = {r} must be finite and >= 0")));
    }
    if cutoff < 1 {
        return Err(param("cutoff must be positive"));
    }
    let t = r.tanh();
    let mut amps = DVector::zeros(cutoff * cutoff);
    let mut amp = 1.0 / r.cosh();
    for n in 0..cutoff {
        amps[n * cutoff + n] = C64::new(amp, 0.0);
        amp *= t;
    }
    FockVector::with_leakage(vec![cutoff, cutoff], amps, t.powi(2 * cutoff as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn jumps_on_number_states() {
        let one = FockVector::basis(vec![4], &[1]).unwrap();
        let (out, w) = photon_jump(&one, 0, PhotonJump::Subtract).unwrap();
        assert_eq!(out.amplitude(&[0]), c(1.0));
        assert!((w - 1.0).abs() < 1e-15);
        let vac = FockVector::vacuum(vec![3]);
        let (up, w) = photon_jump(&vac, 0, PhotonJump::Add).unwrap();
        assert_eq!(up.amplitude(&[1]), c(1.0));
        assert!((w - 1.0).abs() < 1e-15);
        assert!(matches!(photon_jump(&vac, 0, PhotonJump::Subtract), Err(Error::ZeroNorm(_))));
    }

    #[test]
    fn subtract_add_do_not_commute() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = FockVector::new(vec![4], DVector::from_vec(vec![c(s), c(s), c(0.0), c(0.0)])).unwrap();
        let (a_then_ad, _) =
            photon_jump(&photon_jump(&psi, 0, PhotonJump::Subtract).unwrap().0, 0, PhotonJump::Add).unwrap();
        let (ad_then_a, _) =
            photon_jump(&photon_jump(&psi, 0, PhotonJump::Add).unwrap().0, 0, PhotonJump::Subtract).unwrap();
        assert_eq!(a_then_ad.dims(), &[5]);
        assert_eq!(ad_then_a.dims(), &[5]);
        assert!(overlap_pure(&a_then_ad, &ad_then_a).unwrap() < 0.99);
    }

    #[test]
    fn tmsv_reduced_state_is_thermal() {
        let r = 0.6f64;
        let st = tmsv_fock(r, 40).unwrap();
        let rho = st.reduced_density(&[0]).unwrap();
        let nbar = r.sinh().powi(2);
        for n in 0..10 {
            let thermal = nbar.powi(n) / (1.0 + nbar).powi(n + 1);
            assert!((rho.matrix()[(n as usize, n as usize)].re - thermal).abs() < 1e-12);
        }
        let (_, w) = photon_jump(&st, 0, PhotonJump::Subtract).unwrap();
        assert!((w - nbar).abs() < 1e-10);
    }

    #[test]
    fn embed_and_trace() {
        let (a, _) = ladder(3).unwrap();
        let e0 = embed(&a, 0, &[3, 2]).unwrap();
        let e1 = embed(&FockOperator::single(annihilation(2)), 1, &[3, 2]).unwrap();
        let comm = e0.matrix() * e1.matrix() - e1.matrix() * e0.matrix();
        assert!(comm.iter().all(|z| z.norm() < 1e-15));
        let id = embed(&FockOperator::identity(vec![3]), 0, &[3, 4]).unwrap();
        assert_eq!(id.matrix(), &DMatrix::<C64>::identity(12, 12));
        let x = FockOperator::single(quadrature_matrix(3, Quadrature::X));
        let n = FockOperator::single(annihilation(2).adjoint() * annihilation(2));
        let prod = x.kron(&n);
        assert!((prod.trace() - x.trace() * n.trace()).norm() < 1e-14);
    }

    #[test]
    fn overlaps() {
        let v0 = FockVector::vacuum(vec![3]);
        let v1 = FockVector::basis(vec![3], &[1]).unwrap();
        assert!((overlap(&v0.density(), &v0.density()).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(overlap_pure(&v0, &v1).unwrap(), 0.0);
    }

    #[test]
    fn binary_roundtrip() {
        let op = FockOperator::single(quadrature_matrix(5, Quadrature::P));
        let mut buf = Vec::new();
        op.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 4 + 4 + 25 * 16);
        assert_eq!(FockOperator::read_binary(buf.as_slice()).unwrap(), op);
    }

    #[test]
    fn swap_and_passive_roundtrip() {
        let st = tmsv_fock(0.3, 6).unwrap();
        let st3 =
            FockVector::new(vec![6, 6, 2], st.amps().kronecker(&DVector::from_vec(vec![c(1.0), c(0.0)]))).unwrap();
        let swapped = st3.swap_modes(0, 2).unwrap();
        assert_eq!(swapped.dims(), &[2, 6, 6]);
        assert_eq!(swapped.amplitude(&[0, 2, 2]), st3.amplitude(&[2, 2, 0]));
        let bs = PassiveBlocks::beam_splitter(0.5, 20);
        let out = st3.apply_passive(&bs, [1, 2]).unwrap();
        assert_eq!(out.dims(), &[6, 7, 7]);
        assert!((out.norm() - st3.norm()).abs() < 1e-12);
    }

    #[test]
    fn tmsv_moments_match_cm() {
        let r = 0.5;
        let st = tmsv_fock(r, 40).unwrap();
        let cm = crate::gaussian::tmsv_cm(r).unwrap();
        assert!((st.moments().unwrap().cm() - cm.cm()).amax() < 1e-9);
    }
}
