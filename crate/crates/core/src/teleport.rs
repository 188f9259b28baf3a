//! Coherent-state teleportation fidelity for two-mode Gaussian resources,
//! threshold tests, counter-rotation, local-squeezing optimization and the
//! strict-monogamy region scan.

use nalgebra::{DMatrix, Matrix2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};
use crate::gaussian::{build_symplectic, standard_form_from_ratios, triangle_feasible, GaussianGate, GaussianState};
use crate::io::{sig9, write_csv};
use crate::optimize::coordinate_ascent;

pub const F_CLASSICAL: f64 = 0.5;
pub const F_NO_CLONING_GAUSSIAN: f64 = 2.0 / 3.0;
pub const F_NO_CLONING: f64 = 0.6826;

/// Squeezing search box `|s| <= SQUEEZE_BOUND` used by the optimizer.
pub const SQUEEZE_BOUND: f64 = 3.0;
const RESTARTS: usize = 8;
const OPT_SEED: u64 = 0x5eed_f1de;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FidelityThresholds {
    pub f_cl: f64,
    pub f_nc_gaussian: f64,
    pub f_nc: f64,
}

impl Default for FidelityThresholds {
    fn default() -> Self {
        Self { f_cl: F_CLASSICAL, f_nc_gaussian: F_NO_CLONING_GAUSSIAN, f_nc: F_NO_CLONING }
    }
}

/// Second moments of `x_- = (x1 - x2)/√2` and `p_+ = (p1 + p2)/√2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EprMoments {
    pub vxm: f64,
    pub vpp: f64,
    pub cxp: f64,
}

fn require_two_modes(state: &GaussianState) -> Result<()> {
    if state.n_modes() != 2 {
        return Err(Error::Dimension { expected: 2, got: state.n_modes() });
    }
    Ok(())
}

pub fn epr_moments(state: &GaussianState) -> Result<EprMoments> {
    require_two_modes(state)?;
    Ok(moments_from_cm(state.cm()))
}

fn moments_from_cm(s: &DMatrix<f64>) -> EprMoments {
    EprMoments {
        vxm: 0.5 * (s[(0, 0)] - 2.0 * s[(0, 2)] + s[(2, 2)]),
        vpp: 0.5 * (s[(1, 1)] + 2.0 * s[(1, 3)] + s[(3, 3)]),
        cxp: 0.5 * (s[(0, 1)] + s[(0, 3)] - s[(2, 1)] - s[(2, 3)]),
    }
}

/// `F = 1/√((1 + 2 vxm)(1 + 2 vpp) - 4 cxp²)`.
pub fn fidelity_from_moments(m: &EprMoments) -> f64 {
    1.0 / ((1.0 + 2.0 * m.vxm) * (1.0 + 2.0 * m.vpp) - 4.0 * m.cxp * m.cxp).sqrt()
}

/// Unit-gain coherent-state teleportation fidelity `1/√det Γ` with
/// `Γ = I + Z A Z + B - Z C - Cᵀ Z`, mode 0 the sender and mode 1 the receiver.
pub fn fidelity_cm(state: &GaussianState) -> Result<f64> {
    require_two_modes(state)?;
    let phys = state.check_physical();
    if !phys.physical {
        return Err(Error::Unphysical(format!(
            "least symplectic eigenvalue {:.6e} < 1/2",
            phys.least_symplectic_eigenvalue
        )));
    }
    Ok(gamma_fidelity(state.cm()))
}

fn gamma_fidelity(s: &DMatrix<f64>) -> f64 {
    let a = Matrix2::new(s[(0, 0)], s[(0, 1)], s[(1, 0)], s[(1, 1)]);
    let b = Matrix2::new(s[(2, 2)], s[(2, 3)], s[(3, 2)], s[(3, 3)]);
    let c = Matrix2::new(s[(0, 2)], s[(0, 3)], s[(1, 2)], s[(1, 3)]);
    let z = Matrix2::new(1.0, 0.0, 0.0, -1.0);
    let gamma = Matrix2::identity() + z * a * z + b - z * c - c.transpose() * z;
    1.0 / gamma.determinant().sqrt()
}

/// Necessary condition for `F > f`: `vxm·vpp < ((1 - f)/(2f))²`. Requires a
/// vanishing cross term; rotate with [`counter_rotation`] first.
pub fn beats_threshold(m: &EprMoments, f: f64) -> Result<bool> {
    if !(f > 0.0 && f < 1.0) {
        return Err(param(format!("threshold fidelity {f} not in (0, 1)")));
    }
    if m.cxp.abs() > 1e-12 {
        return Err(Error::CrossTerm { cross: m.cxp });
    }
    let bound = ((1.0 - f) / (2.0 * f)).powi(2);
    Ok(m.vxm * m.vpp < bound)
}

/// Angle `θ` such that rotating mode 0 by `θ` and mode 1 by `-θ` removes the
/// `x_- p_+` cross term: `tan 2θ = 2 cxp / (vxm - vpp)`. Equal variances with
/// a nonzero cross term give `θ = π/4`.
pub fn counter_rotation_angle(m: &EprMoments) -> f64 {
    let scale = m.vxm.abs().max(m.vpp.abs()).max(1.0);
    if m.cxp.abs() <= 1e-15 * scale {
        return 0.0;
    }
    let diff = m.vxm - m.vpp;
    if diff.abs() <= 1e-15 * scale {
        return std::f64::consts::FRAC_PI_4.copysign(m.cxp);
    }
    0.5 * (2.0 * m.cxp / diff).atan()
}

/// Applies the counter-rotation `(θ, -θ)` that zeroes the cross term; the
/// sum `vxm + vpp` and `vxm·vpp - cxp²` (hence the fidelity) are unchanged.
pub fn counter_rotation(state: &GaussianState) -> Result<(f64, GaussianState)> {
    let theta = counter_rotation_angle(&epr_moments(state)?);
    Ok((theta, rotate_pair(state, theta)?))
}

/// Rotates mode 0 by `theta` and mode 1 by `-theta`.
pub fn rotate_pair(state: &GaussianState, theta: f64) -> Result<GaussianState> {
    require_two_modes(state)?;
    let s = build_symplectic(GaussianGate::Rotation { theta }, &[0], 2)?.then(&build_symplectic(
        GaussianGate::Rotation { theta: -theta },
        &[1],
        2,
    )?)?;
    state.apply_symplectic(&s)
}

/// Counter-rotation angles for the pairs `(sender, r)` of a multi-mode state.
/// Both pairs share the sender's rotation, so the cross terms can be removed
/// simultaneously only when the angles agree.
#[derive(Debug, Clone, PartialEq)]
pub struct CommonRotation {
    pub angles: Vec<f64>,
    pub common: bool,
}

pub fn common_counter_rotation(state: &GaussianState, sender: usize, receivers: &[usize]) -> Result<CommonRotation> {
    let mut angles = Vec::with_capacity(receivers.len());
    for &r in receivers {
        let pair = state.partial_trace(&[sender, r])?;
        angles.push(counter_rotation_angle(&epr_moments(&pair)?));
    }
    let common = angles.windows(2).all(|w| (w[0] - w[1]).abs() < 1e-9);
    Ok(CommonRotation { angles, common })
}

/// Best fidelity over independent x-axis squeezings `s_sender`, `s_receiver`
/// (negative values squeeze p).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalSqueezingResult {
    pub fidelity: f64,
    pub unoptimized: f64,
    pub s_sender: f64,
    pub s_receiver: f64,
    /// False when no restart met the convergence tolerance; the best point found is still returned.
    pub converged: bool,
}

/// Reduced pair CM after `x -> e^{-s} x`, `p -> e^{s} p` on each mode.
pub fn squeeze_pair_cm(pair: &DMatrix<f64>, s_sender: f64, s_receiver: f64) -> DMatrix<f64> {
    let d = [(-s_sender).exp(), s_sender.exp(), (-s_receiver).exp(), s_receiver.exp()];
    DMatrix::from_fn(4, 4, |i, j| pair[(i, j)] * d[i] * d[j])
}

pub fn optimize_local_squeezing(state: &GaussianState, sender: usize, receiver: usize) -> Result<LocalSqueezingResult> {
    if sender == receiver {
        return Err(Error::Index(format!("sender and receiver are both mode {sender}")));
    }
    let pair = state.partial_trace(&[sender, receiver])?;
    let unoptimized = fidelity_cm(&pair)?;
    Ok(optimize_pair_cm(pair.cm(), unoptimized))
}

fn optimize_pair_cm(pair: &DMatrix<f64>, unoptimized: f64) -> LocalSqueezingResult {
    let f = |v: &[f64]| gamma_fidelity(&squeeze_pair_cm(pair, v[0], v[1]));
    let bounds = [(-SQUEEZE_BOUND, SQUEEZE_BOUND); 2];
    let mut rng = ChaCha8Rng::seed_from_u64(OPT_SEED);
    let mut best =
        LocalSqueezingResult { fidelity: unoptimized, unoptimized, s_sender: 0.0, s_receiver: 0.0, converged: false };
    for restart in 0..RESTARTS {
        let start = if restart == 0 {
            [0.0, 0.0]
        } else {
            [rng.random_range(-SQUEEZE_BOUND..SQUEEZE_BOUND), rng.random_range(-SQUEEZE_BOUND..SQUEEZE_BOUND)]
        };
        let res = coordinate_ascent(&f, &start, &bounds, 1e-8, 200);
        best.converged |= res.converged;
        if res.value > best.fidelity {
            best.fidelity = res.value;
            best.s_sender = res.x[0];
            best.s_receiver = res.x[1];
        }
    }
    best
}

/// `vxm·vpp` for the pair AB times the same for AC.
pub fn monogamy_product(ab: &EprMoments, ac: &EprMoments) -> f64 {
    ab.vxm * ab.vpp * ac.vxm * ac.vpp
}

/// Uniform grid `c_min..=c_max` with `points` samples on both ratio axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioGrid {
    pub c_min: f64,
    pub c_max: f64,
    pub points: usize,
}

impl Default for RatioGrid {
    fn default() -> Self {
        Self { c_min: 0.0, c_max: 2.5, points: 201 }
    }
}

impl RatioGrid {
    pub fn value(&self, i: usize) -> f64 {
        if self.points == 1 {
            return self.c_min;
        }
        self.c_min + i as f64 * (self.c_max - self.c_min) / (self.points - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionCell {
    pub c2: f64,
    pub c3: f64,
    pub feasible: bool,
    /// NaN for infeasible cells.
    pub f_ab: f64,
    pub f_ac: f64,
}

impl RegionCell {
    /// Both pairs strictly above `2/3 + margin`.
    pub fn both_beat(&self, margin: f64) -> bool {
        self.f_ab > F_NO_CLONING_GAUSSIAN + margin && self.f_ac > F_NO_CLONING_GAUSSIAN + margin
    }
}

/// Pair fidelities on a `(c2, c3)` grid at fixed `a1`, row-major in `c2`.
/// With `optimize` each pair is optimized over local squeezing separately.
pub fn region_scan(a1: f64, grid: &RatioGrid, optimize: bool) -> Result<Vec<RegionCell>> {
    if !(a1 > 0.5) || !a1.is_finite() {
        return Err(param(format!("a1 = {a1} must exceed 1/2")));
    }
    if grid.points == 0 || !(grid.c_max >= grid.c_min) || grid.c_min < 0.0 {
        return Err(param("ratio grid must be nonempty with 0 <= c_min <= c_max"));
    }
    let n = grid.points;
    let cells = (0..n * n)
        .into_par_iter()
        .map(|idx| scan_cell(a1, grid.value(idx / n), grid.value(idx % n), optimize))
        .collect();
    Ok(cells)
}

fn scan_cell(a1: f64, c2: f64, c3: f64, optimize: bool) -> RegionCell {
    let d = a1 - 0.5;
    let infeasible = RegionCell { c2, c3, feasible: false, f_ab: f64::NAN, f_ac: f64::NAN };
    if !triangle_feasible(a1, 0.5 + c2 * d, 0.5 + c3 * d) {
        return infeasible;
    }
    let Ok(form) = standard_form_from_ratios(a1, c2, c3) else {
        return infeasible;
    };
    let state = form.state();
    let pair_f = |r: usize| -> f64 {
        let pair = state.partial_trace(&[0, r]).expect("valid modes");
        let raw = gamma_fidelity(pair.cm());
        if optimize {
            optimize_pair_cm(pair.cm(), raw).fidelity
        } else {
            raw
        }
    };
    RegionCell { c2, c3, feasible: true, f_ab: pair_f(1), f_ac: pair_f(2) }
}

pub const REGION_HEADER: [&str; 5] = ["c2", "c3", "F_AB", "F_AC", "feasible"];

pub fn write_region_csv<W: std::io::Write>(out: W, cells: &[RegionCell]) -> Result<()> {
    write_csv(
        out,
        &REGION_HEADER,
        cells.iter().map(|c| vec![sig9(c.c2), sig9(c.c3), sig9(c.f_ab), sig9(c.f_ac), (c.feasible as u8).to_string()]),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::{three_mode_standard_cm, tmsv_cm};

    #[test]
    fn tmsv_fidelity_closed_form() {
        for r in [0.0, 0.3, 1.0, 2.5] {
            let f = fidelity_cm(&tmsv_cm(r).unwrap()).unwrap();
            assert!((f - 1.0 / (1.0 + (-2.0 * r).exp())).abs() < 1e-13);
        }
        let r_star = 0.5 * 3f64.acosh();
        let f = fidelity_cm(&tmsv_cm(r_star).unwrap()).unwrap();
        assert!((f - 1.0 / (4.0 - 2.0 * 2f64.sqrt())).abs() < 1e-13);
    }

    #[test]
    fn thresholds() {
        let vac = EprMoments { vxm: 0.5, vpp: 0.5, cxp: 0.0 };
        assert!(!beats_threshold(&vac, 0.5).unwrap());
        let m = EprMoments { vxm: 0.3, vpp: 0.3, cxp: 0.0 };
        assert!(beats_threshold(&m, 0.5).unwrap());
        assert!(!beats_threshold(&m, 2.0 / 3.0).unwrap());
        let crossed = EprMoments { cxp: 0.1, ..m };
        assert!(matches!(beats_threshold(&crossed, 0.5), Err(Error::CrossTerm { .. })));
    }

    #[test]
    fn counter_rotation_zeroes_cross_term() {
        let tm = tmsv_cm(0.7).unwrap();
        // break the symmetry so that vxm != vpp, then rotate off-axis
        let sq = build_symplectic(GaussianGate::Squeezer { s: 0.4, axis: crate::SqueezeAxis::X }, &[1], 2).unwrap();
        let st = rotate_pair(&tm.apply_symplectic(&sq).unwrap(), 0.37).unwrap();
        let before = epr_moments(&st).unwrap();
        assert!(before.cxp.abs() > 1e-3);
        let (_, out) = counter_rotation(&st).unwrap();
        let after = epr_moments(&out).unwrap();
        assert!(after.cxp.abs() < 1e-10);
        assert!((fidelity_cm(&st).unwrap() - fidelity_cm(&out).unwrap()).abs() < 1e-10);
    }

    #[test]
    fn phi3_tight_bound() {
        let st = three_mode_standard_cm(1.5, 1.0, 1.0).unwrap().state();
        for r in [1, 2] {
            let res = optimize_local_squeezing(&st, 0, r).unwrap();
            assert!((res.fidelity - 2.0 / 3.0).abs() < 1e-6, "{res:?}");
        }
    }

    #[test]
    fn small_region_scan_marks_infeasible() {
        let grid = RatioGrid { c_min: 0.0, c_max: 2.0, points: 5 };
        let cells = region_scan(1.5, &grid, false).unwrap();
        assert_eq!(cells.len(), 25);
        let origin = cells[0];
        assert!(!origin.feasible && origin.f_ab.is_nan());
        let mut buf = Vec::new();
        write_region_csv(&mut buf, &cells).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("c2,c3,F_AB,F_AC,feasible\n0,0,nan,nan,0\n"));
    }
}
