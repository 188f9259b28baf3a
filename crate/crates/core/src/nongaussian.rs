//! Photon subtraction and addition on the three-mode split-TMSV resource and
//! the teleportation fidelity of the resulting non-Gaussian states.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::fock::{
    displacement_scaled, expquad_matrix, expquad_p_matrix, ln_factorial, photon_jump, FockOperator, FockVector,
    PassiveBlocks, PhotonJump,
};
use crate::gaussian::{build_symplectic, tmsv_cm, GaussianGate, GaussianState};
use crate::io::{sig9, write_csv};
use crate::quadrature::GaussHermite;

type C64 = Complex64;

/// Largest truncation leakage accepted by [`build_three_mode_fock`].
pub const RESOURCE_LEAKAGE_LIMIT: f64 = 1e-6;
/// Leakage aimed for by [`adaptive_cutoff`].
pub const ADAPTIVE_LEAKAGE_TARGET: f64 = 1e-7;
pub const MIN_CUTOFF: usize = 24;
pub const MAX_CUTOFF: usize = 160;

/// Local action of one party.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    None,
    Subtract,
    Add,
}

/// Actions of the sender A and of both receivers B, C (always the same).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OperationPattern {
    pub a: Action,
    pub bc: Action,
}

impl OperationPattern {
    pub const NONE: Self = Self::new(Action::None, Action::None);
    pub const SUB_A: Self = Self::new(Action::Subtract, Action::None);
    pub const SUB_BC: Self = Self::new(Action::None, Action::Subtract);
    pub const SUB_ABC: Self = Self::new(Action::Subtract, Action::Subtract);
    pub const ADD_A: Self = Self::new(Action::Add, Action::None);
    pub const ADD_BC: Self = Self::new(Action::None, Action::Add);
    pub const ADD_ABC: Self = Self::new(Action::Add, Action::Add);
    pub const SUB_A_ADD_BC: Self = Self::new(Action::Subtract, Action::Add);
    pub const ADD_A_SUB_BC: Self = Self::new(Action::Add, Action::Subtract);

    /// Every pattern that applies at least one photon jump.
    pub const NON_GAUSSIAN: [Self; 8] = [
        Self::SUB_A,
        Self::SUB_BC,
        Self::SUB_ABC,
        Self::ADD_A,
        Self::ADD_BC,
        Self::ADD_ABC,
        Self::SUB_A_ADD_BC,
        Self::ADD_A_SUB_BC,
    ];

    pub const fn new(a: Action, bc: Action) -> Self {
        Self { a, bc }
    }

    /// [`Self::NON_GAUSSIAN`] preceded by the Gaussian reference.
    pub fn all() -> Vec<Self> {
        std::iter::once(Self::NONE).chain(Self::NON_GAUSSIAN).collect()
    }

    fn jumps(&self) -> [(usize, Action); 3] {
        [(0, self.a), (1, self.bc), (2, self.bc)]
    }
}

impl fmt::Display for OperationPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match (self.a, self.bc) {
            (Action::None, Action::None) => "none",
            (Action::Subtract, Action::None) => "subA",
            (Action::None, Action::Subtract) => "subBC",
            (Action::Subtract, Action::Subtract) => "subABC",
            (Action::Add, Action::None) => "addA",
            (Action::None, Action::Add) => "addBC",
            (Action::Add, Action::Add) => "addABC",
            (Action::Subtract, Action::Add) => "subA_addBC",
            (Action::Add, Action::Subtract) => "addA_subBC",
        };
        f.write_str(name)
    }
}

impl FromStr for OperationPattern {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::all().into_iter().find(|p| p.to_string() == s).ok_or_else(|| param(format!("unknown pattern {s:?}")))
    }
}

/// Smallest cutoff (at least [`MIN_CUTOFF`]) with `tanh^{2D} r` below `target`.
pub fn adaptive_cutoff(r: f64, target: f64) -> Result<usize> {
    if !(r >= 0.0) || !r.is_finite() || !(target > 0.0 && target < 1.0) {
        return Err(param(format!("need r >= 0 and 0 < target < 1, got r = {r}, target = {target}")));
    }
    let t = r.tanh();
    if t == 0.0 {
        return Ok(MIN_CUTOFF);
    }
    let d = (target.ln() / (2.0 * t.ln())).ceil();
    if !(d <= MAX_CUTOFF as f64) {
        return Err(Error::CutoffTooSmall {
            leakage: t.powi(2 * MAX_CUTOFF as i32),
            limit: target,
            cutoff: MAX_CUTOFF,
        });
    }
    Ok((d as usize).max(MIN_CUTOFF))
}

/// TMSV(r) on (A, aux) with aux split evenly onto (B, C):
/// `Σ_n tanh^n r / cosh r · Σ_k √C(n,k) 2^{-n/2} |n, k, n-k⟩`, `n < cutoff`.
///
/// The split is `a† -> (b† + c†)/√2`, i.e. a 50:50 beam splitter followed by
/// a π phase on C, which makes B and C interchangeable.
pub fn build_three_mode_fock(r: f64, cutoff: usize) -> Result<FockVector> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(param(format!("squeezing r = {r} must be finite and >= 0")));
    }
    if cutoff < 1 {
        return Err(param("cutoff must be positive"));
    }
    let t = r.tanh();
    let leakage = t.powi(2 * cutoff as i32);
    if leakage > RESOURCE_LEAKAGE_LIMIT {
        return Err(Error::CutoffTooSmall { leakage, limit: RESOURCE_LEAKAGE_LIMIT, cutoff });
    }
    let d = cutoff;
    let mut amps = nalgebra::DVector::zeros(d * d * d);
    let lt = t.ln();
    for n in 0..d {
        let base = if n == 0 { 1.0 } else { (n as f64 * lt).exp() } / r.cosh();
        for k in 0..=n {
            let lo = k.min(n - k);
            let lbin = ln_factorial(n) - ln_factorial(lo) - ln_factorial(n - lo);
            let amp = base * (0.5 * lbin - 0.5 * n as f64 * std::f64::consts::LN_2).exp();
            amps[n * d * d + k * d + (n - k)] = C64::new(amp, 0.0);
        }
    }
    FockVector::with_leakage(vec![d, d, d], amps, leakage)
}

/// Covariance matrix of the same resource.
pub fn three_mode_split_cm(r: f64) -> Result<GaussianState> {
    let st = tmsv_cm(r)?.tensor(&GaussianState::vacuum(1));
    let bs = build_symplectic(GaussianGate::BeamSplitter { transmittance: 0.5 }, &[1, 2], 3)?;
    let flip = build_symplectic(GaussianGate::Rotation { theta: std::f64::consts::PI }, &[2], 3)?;
    st.apply_symplectic(&bs.then(&flip)?)
}

/// Applies the pattern's jumps on A, B, C in turn. Returns the normalized
/// state and the product of the heralding weights.
pub fn apply_pattern(state: &FockVector, pattern: OperationPattern) -> Result<(FockVector, f64)> {
    if state.n_modes() != 3 {
        return Err(Error::Dimension { expected: 3, got: state.n_modes() });
    }
    let mut cur = state.normalized()?;
    let mut weight = 1.0;
    for (mode, action) in pattern.jumps() {
        let jump = match action {
            Action::None => continue,
            Action::Subtract => PhotonJump::Subtract,
            Action::Add => PhotonJump::Add,
        };
        let (next, w) = photon_jump(&cur, mode, jump)?;
        cur = next;
        weight *= w;
    }
    Ok((cur, weight))
}

/// Unit-gain teleportation fidelity for a coherent input with a pure
/// resource, pair `(sender, receiver)`, other modes traced out:
/// `⟨exp(-x_-²) exp(-p_+²)⟩` with `x_- = (x_s - x_r)/√2`, `p_+ = (p_s + p_r)/√2`.
///
/// A −π/4 mode rotation turns `x_-` and `p_+` into the `x` of the sender and
/// the `p` of the receiver; the enlarged output dimensions hold the rotated
/// state exactly.
pub fn teleport_fidelity_pure(state: &FockVector, sender: usize, receiver: usize) -> Result<f64> {
    if sender == receiver {
        return Err(param("sender and receiver must differ"));
    }
    let (ds, dr) = (state.dims()[sender], state.dims()[receiver]);
    let blocks = PassiveBlocks::rotation(-std::f64::consts::FRAC_PI_4, ds + dr - 2);
    let rotated = state.apply_passive(&blocks, [sender, receiver])?;
    let d = ds + dr - 1;
    let ex = expquad_matrix(1.0, d)?.map(|v| C64::new(v, 0.0));
    let ep = expquad_p_matrix(1.0, d)?.map(|v| C64::new(v, 0.0));
    let image = rotated.apply_local(&ex, &[sender], &[d])?.apply_local(&ep, &[receiver], &[d])?;
    let f = rotated.amps().dotc(image.amps()) / rotated.amps().norm_squared();
    Ok(f.re.clamp(0.0, 1.0))
}

/// Outcome of the characteristic-function integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiFidelity {
    pub fidelity: f64,
    /// Gauss–Hermite nodes per axis of the accepted grid.
    pub nodes: usize,
    /// Change against the grid with half as many nodes.
    pub refinement_delta: f64,
}

/// `(1/π) ∫ d²α e^{-|α|²} Tr[ρ D_A(α) D_B(α*)]`, with the trace taken over
/// the eigenvectors of `ρ` so each node costs `O(rank · d³)`.
fn chi_integral(rho: &FockOperator, nodes: usize) -> Result<C64> {
    let (da, db) = (rho.dims()[0], rho.dims()[1]);
    let herm = (rho.matrix() + rho.matrix().adjoint()) * C64::new(0.5, 0.0);
    let eig = nalgebra::SymmetricEigen::new(herm);
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    // Ψ_c[a, b] = ψ_c[(a, b)]
    let comps: Vec<(f64, DMatrix<C64>)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, &l)| l.abs() > 1e-15 * top)
        .map(|(c, &l)| (l, DMatrix::from_fn(da, db, |a, b| eig.eigenvectors[(a * db + b, c)])))
        .collect();
    // D(α) = e^{-|α|²/2} D̃(α); the two prefactors make the weight e^{-2|α|²}
    let gh = GaussHermite::new(nodes);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut total = C64::default();
    for iu in 0..nodes {
        for iv in 0..nodes {
            let alpha = C64::new(gh.nodes[iu] * s, gh.nodes[iv] * s);
            let w = gh.weights[iu] * gh.weights[iv] * 0.5;
            let dam = displacement_scaled(alpha, da, da);
            let dbt = displacement_scaled(alpha.conj(), db, db).transpose();
            let mut node = C64::default();
            for (l, psi) in &comps {
                let img = &dam * psi * &dbt;
                node += psi.iter().zip(img.iter()).map(|(p, q)| p.conj() * q).sum::<C64>() * *l;
            }
            total += node * w;
        }
    }
    Ok(total / std::f64::consts::PI / rho.trace())
}

/// Teleportation fidelity of a two-mode density matrix (sender first) from
/// its characteristic function. The Gauss–Hermite grid starts at
/// `max(48, d_A + d_B)` nodes per axis and is doubled until two successive
/// grids agree to `1e-6`.
pub fn teleport_fidelity_fock(rho: &FockOperator) -> Result<ChiFidelity> {
    if rho.n_modes() != 2 {
        return Err(Error::Dimension { expected: 2, got: rho.n_modes() });
    }
    if !(rho.trace().norm() > 0.0) {
        return Err(Error::ZeroNorm("density matrix has zero trace".into()));
    }
    let base = 48.max(rho.dims()[0] + rho.dims()[1]);
    let mut prev = chi_integral(rho, base)?;
    let mut nodes = base;
    for _ in 0..3 {
        nodes *= 2;
        let next = chi_integral(rho, nodes)?;
        let delta = (next - prev).norm();
        if delta < 1e-6 {
            if next.im.abs() > 1e-9 {
                return Err(Error::Convergence {
                    context: "characteristic-function fidelity is not real".into(),
                    residual: next.im.abs(),
                });
            }
            return Ok(ChiFidelity { fidelity: next.re.clamp(0.0, 1.0), nodes, refinement_delta: delta });
        }
        prev = next;
    }
    Err(Error::Convergence { context: format!("characteristic-function grid at {nodes} nodes"), residual: f64::NAN })
}

/// One `(pattern, r)` point of the pattern scan; fidelity for pair (A, B).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PatternRow {
    pub pattern: OperationPattern,
    pub r: f64,
    /// Heralded fidelity; NaN when the pattern annihilates the state.
    pub fidelity: f64,
    pub herald_weight: f64,
    pub cutoff: usize,
    pub leakage: f64,
}

/// Evaluates a pattern at one squeezing with cutoff `max(cutoff, adaptive)`.
pub fn pattern_point(pattern: OperationPattern, r: f64, cutoff: usize) -> Result<PatternRow> {
    let cutoff = cutoff.max(adaptive_cutoff(r, ADAPTIVE_LEAKAGE_TARGET)?);
    let resource = build_three_mode_fock(r, cutoff)?;
    let leakage = resource.leakage();
    match apply_pattern(&resource, pattern) {
        Ok((state, herald_weight)) => {
            let fidelity = teleport_fidelity_pure(&state, 0, 1)?;
            Ok(PatternRow { pattern, r, fidelity, herald_weight, cutoff, leakage })
        }
        Err(Error::ZeroNorm(_)) => {
            Ok(PatternRow { pattern, r, fidelity: f64::NAN, herald_weight: 0.0, cutoff, leakage })
        }
        Err(e) => Err(e),
    }
}

/// Grid `start, start + step, …` up to `stop` inclusive (with rounding slack).
pub fn r_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !(stop >= start) || !(start >= 0.0) {
        return Err(param("r grid needs 0 <= start <= stop and step > 0"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

/// All `(pattern, r)` points, pattern-major, evaluated in parallel.
pub fn pattern_scan(patterns: &[OperationPattern], rs: &[f64], cutoff: usize) -> Result<Vec<PatternRow>> {
    let points: Vec<(OperationPattern, f64)> = patterns.iter().flat_map(|&p| rs.iter().map(move |&r| (p, r))).collect();
    points.into_par_iter().map(|(p, r)| pattern_point(p, r, cutoff)).collect()
}

pub const PATTERN_HEADER: [&str; 6] = ["pattern", "r", "F", "herald_weight", "cutoff", "leakage"];

pub fn write_pattern_csv<W: std::io::Write>(out: W, rows: &[PatternRow]) -> Result<()> {
    write_csv(
        out,
        &PATTERN_HEADER,
        rows.iter().map(|row| {
            vec![
                row.pattern.to_string(),
                sig9(row.r),
                sig9(row.fidelity),
                sig9(row.herald_weight),
                row.cutoff.to_string(),
                sig9(row.leakage),
            ]
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::tmsv_fock;
    use crate::teleport::fidelity_cm;

    fn r_star() -> f64 {
        0.5 * 3f64.acosh()
    }

    #[test]
    fn pattern_names_roundtrip() {
        for p in OperationPattern::all() {
            assert_eq!(p.to_string().parse::<OperationPattern>().unwrap(), p);
        }
        assert!("subB".parse::<OperationPattern>().is_err());
    }

    #[test]
    fn resource_matches_cm_and_passive_route() {
        let r = 0.6;
        let psi = build_three_mode_fock(r, 24).unwrap();
        assert!((psi.norm() - 1.0).abs() < 1e-6);
        let cm = three_mode_split_cm(r).unwrap();
        assert!((psi.moments().unwrap().cm() - cm.cm()).amax() < 1e-5);
        // TMSV ⊗ |0⟩ through the passive split
        let tmsv = tmsv_fock(r, 24).unwrap();
        let mut amps = nalgebra::DVector::zeros(24 * 24);
        amps.copy_from(tmsv.amps());
        let with_c = FockVector::new(vec![24, 24, 1], amps).unwrap();
        let split = with_c.apply_passive(&PassiveBlocks::rotation(-std::f64::consts::FRAC_PI_4, 23), [1, 2]).unwrap();
        assert!((split.amps() - psi.amps()).norm() < 1e-13);
    }

    #[test]
    fn b_c_symmetry() {
        let psi = build_three_mode_fock(0.7, 24).unwrap();
        assert_eq!(psi.swap_modes(1, 2).unwrap().amps(), psi.amps());
    }

    #[test]
    fn r_zero_is_vacuum_and_subtraction_fails() {
        let psi = build_three_mode_fock(0.0, 4).unwrap();
        assert!((psi.amplitude(&[0, 0, 0]).re - 1.0).abs() < 1e-15);
        assert!(matches!(apply_pattern(&psi, OperationPattern::SUB_A), Err(Error::ZeroNorm(_))));
        let (same, w) = apply_pattern(&psi, OperationPattern::NONE).unwrap();
        assert_eq!(same.amps(), psi.amps());
        assert_eq!(w, 1.0);
    }

    #[test]
    fn subtraction_weight_is_mean_photon_number() {
        let r = 0.8;
        let psi = build_three_mode_fock(r, 40).unwrap();
        let (_, w) = apply_pattern(&psi, OperationPattern::SUB_A).unwrap();
        assert!((w - r.sinh().powi(2)).abs() < 1e-8);
    }

    #[test]
    fn operator_route_matches_gaussian_oracle() {
        for r in [0.0, 0.4, r_star(), 1.2] {
            let c = adaptive_cutoff(r, 1e-9).unwrap();
            let psi = build_three_mode_fock(r, c).unwrap();
            let cm = three_mode_split_cm(r).unwrap();
            let f_cm = fidelity_cm(&cm.partial_trace(&[0, 1]).unwrap()).unwrap();
            let f_op = teleport_fidelity_pure(&psi, 0, 1).unwrap();
            assert!((f_op - f_cm).abs() < 1e-6, "r={r}: {f_op} vs {f_cm}");
        }
    }

    #[test]
    fn chi_route_matches_oracles() {
        let vac = FockVector::vacuum(vec![3, 3]).density();
        assert!((teleport_fidelity_fock(&vac).unwrap().fidelity - 0.5).abs() < 1e-12);
        let r = 0.5;
        let tmsv = tmsv_fock(r, 16).unwrap();
        let f_chi = teleport_fidelity_fock(&tmsv.density()).unwrap().fidelity;
        let f_cm = fidelity_cm(&tmsv_cm(r).unwrap()).unwrap();
        assert!((f_chi - f_cm).abs() < 1e-6, "{f_chi} vs {f_cm}");
        let f_op = teleport_fidelity_pure(&tmsv, 0, 1).unwrap();
        assert!((f_chi - f_op).abs() < 1e-10);
    }

    #[test]
    fn chi_and_operator_agree_after_jumps() {
        let psi = build_three_mode_fock(0.5, 12).unwrap();
        for p in [OperationPattern::SUB_A, OperationPattern::ADD_BC] {
            let (st, _) = apply_pattern(&psi, p).unwrap();
            let f_op = teleport_fidelity_pure(&st, 0, 1).unwrap();
            let f_chi = teleport_fidelity_fock(&st.reduced_density(&[0, 1]).unwrap()).unwrap().fidelity;
            assert!((f_op - f_chi).abs() < 1e-9, "{p}: {f_op} vs {f_chi}");
        }
    }

    #[test]
    fn subtract_a_touches_gaussian_limit() {
        let row = pattern_point(OperationPattern::SUB_A, r_star(), 24).unwrap();
        assert!((row.fidelity - 2.0 / 3.0).abs() < 5e-3, "{row:?}");
        let gauss = pattern_point(OperationPattern::NONE, r_star(), 24).unwrap();
        assert!((gauss.fidelity - 2.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn steps_shrink_with_grid_spacing() {
        let max_step = |step: f64| {
            let rs = r_grid(0.2, 0.6, step).unwrap();
            let rows = pattern_scan(&[OperationPattern::SUB_A_ADD_BC], &rs, 24).unwrap();
            rows.windows(2).map(|w| (w[1].fidelity - w[0].fidelity).abs()).fold(0.0, f64::max)
        };
        let coarse = max_step(0.05);
        let fine = max_step(0.025);
        assert!(coarse < 0.04, "{coarse}");
        assert!((fine / coarse - 0.5).abs() < 0.1, "{fine} vs {coarse}");
    }

    #[test]
    fn csv_rows() {
        let rows = pattern_scan(&[OperationPattern::SUB_A], &[0.0, 0.5], 24).unwrap();
        assert!(rows[0].fidelity.is_nan());
        let mut buf = Vec::new();
        write_pattern_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("pattern,r,F,herald_weight,cutoff,leakage\nsubA,0,nan,0,24,"));
    }
}
