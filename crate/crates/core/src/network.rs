//! Teleportation networks on symmetric `(N+1)`-mode states: assisted and
//! pairwise optimal fidelities, teleportation capability and the behavior of
//! its would-be monogamy inequality.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::gaussian::{network_symmetric_cm, GaussianState, Quadrature};
use crate::io::{sig9, write_csv};
use crate::optimize::golden_section_max;

/// Thermal and squeezing parameters of the network resource. `n1`, `n2`
/// scale the vacuum variance (`⟨x²⟩ = n/2` before squeezing).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    pub n: usize,
    pub n1: f64,
    pub n2: f64,
    pub r1: f64,
    pub r2: f64,
}

impl NetworkParams {
    /// Parameters from the mean squeezing `r̄ = (r1 + r2)/2` and the
    /// asymmetry `d = (r2 - r1)/2`.
    pub fn from_mean(n: usize, n1: f64, n2: f64, rbar: f64, d: f64) -> Self {
        Self { n, n1, n2, r1: rbar - d, r2: rbar + d }
    }

    pub fn rbar(&self) -> f64 {
        0.5 * (self.r1 + self.r2)
    }

    pub fn d(&self) -> f64 {
        0.5 * (self.r2 - self.r1)
    }

    pub fn state(&self) -> Result<GaussianState> {
        network_symmetric_cm(self.n, self.r1, self.r2, self.n1, self.n2)
    }
}

fn check(n: usize, n1: f64, n2: f64, rbar: f64) -> Result<()> {
    if n < 1 || !(n1 >= 1.0) || !(n2 >= 1.0) || !rbar.is_finite() {
        return Err(param(format!(
            "need N >= 1, n1, n2 >= 1 and finite r̄ (N = {n}, n1 = {n1}, n2 = {n2}, r̄ = {rbar})"
        )));
    }
    Ok(())
}

/// `ν_N = ½ √((N+1) n1 n2 / (2 e^{4r̄} + (N-1) n1/n2))`, the least
/// PT symplectic eigenvalue across `sender | all receivers`.
pub fn nu_assisted(n: usize, n1: f64, n2: f64, rbar: f64) -> Result<f64> {
    check(n, n1, n2, rbar)?;
    let nf = n as f64;
    Ok(0.5 * ((nf + 1.0) * n1 * n2 / (2.0 * (4.0 * rbar).exp() + (nf - 1.0) * n1 / n2)).sqrt())
}

/// `ν_1 = ½ √(n2/(N+1) · (2 n1 e^{-4r̄} + (N-1) n2))`, the least PT
/// symplectic eigenvalue of a sender–receiver pair.
pub fn nu_pair(n: usize, n1: f64, n2: f64, rbar: f64) -> Result<f64> {
    check(n, n1, n2, rbar)?;
    let nf = n as f64;
    Ok(0.5 * (n2 / (nf + 1.0) * (2.0 * n1 * (-4.0 * rbar).exp() + (nf - 1.0) * n2)).sqrt())
}

/// Least PT symplectic eigenvalue of (sender, receiver 1) after the other
/// receivers measure `p`: the entanglement the assisted protocol localizes,
/// equal to `ν_N`. Across `sender | all receivers` the PT eigenvalue is
/// smaller for `N ≥ 2`.
pub fn localized_pt_eigenvalue(state: &GaussianState) -> Result<f64> {
    if state.n_modes() < 2 {
        return Err(param("need a sender and at least one receiver"));
    }
    let mut st = state.clone();
    while st.n_modes() > 2 {
        st = st.homodyne_condition(2, Quadrature::P)?;
    }
    st.pt_least_eigenvalue(&[0])
}

/// `1/(1 + 2ν)`.
pub fn fidelity_from_nu(nu: f64) -> f64 {
    1.0 / (1.0 + 2.0 * nu)
}

/// `max{0, 2F - 1}`.
pub fn capability(f: f64) -> f64 {
    (2.0 * f - 1.0).max(0.0)
}

/// Collective and pairwise capabilities with their monogamy gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapabilityReport {
    pub f_collective: f64,
    pub f_pair: f64,
    pub c_collective: f64,
    pub c_pair: f64,
    pub alpha: f64,
    /// `C_collective^α - N C_pair^α`.
    pub gap: f64,
    /// `C_pair / C_collective` (NaN when `C_collective = 0`).
    pub ratio: f64,
}

impl CapabilityReport {
    pub fn violated(&self) -> bool {
        self.gap < 0.0
    }
}

pub fn capability_report(n: usize, n1: f64, n2: f64, rbar: f64, alpha: f64) -> Result<CapabilityReport> {
    if !(alpha > 0.0) {
        return Err(param(format!("alpha = {alpha} must be positive")));
    }
    let f_collective = fidelity_from_nu(nu_assisted(n, n1, n2, rbar)?);
    let f_pair = fidelity_from_nu(nu_pair(n, n1, n2, rbar)?);
    let (c_collective, c_pair) = (capability(f_collective), capability(f_pair));
    let gap = c_collective.powf(alpha) - n as f64 * c_pair.powf(alpha);
    let ratio = if c_collective > 0.0 { c_pair / c_collective } else { f64::NAN };
    Ok(CapabilityReport { f_collective, f_pair, c_collective, c_pair, alpha, gap, ratio })
}

/// `(C_collective, C_pair)` for pure inputs `n1 = n2 = 1`, written directly:
/// `2/(1 + √((N+1)/(2e^{4r̄} + N - 1))) - 1` and
/// `2/(1 + √((2e^{-4r̄} + N - 1)/(N+1))) - 1`.
pub fn capabilities_pure(n: usize, rbar: f64) -> Result<(f64, f64)> {
    check(n, 1.0, 1.0, rbar)?;
    let nf = n as f64;
    let coll = 2.0 / (1.0 + ((nf + 1.0) / (2.0 * (4.0 * rbar).exp() + nf - 1.0)).sqrt()) - 1.0;
    let pair = 2.0 / (1.0 + ((2.0 * (-4.0 * rbar).exp() + nf - 1.0) / (nf + 1.0)).sqrt()) - 1.0;
    Ok((coll.max(0.0), pair.max(0.0)))
}

/// `C_collective^α - N C_pair^α` for pure inputs.
pub fn monogamy_gap(n: usize, rbar: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 0.0) {
        return Err(param(format!("alpha = {alpha} must be positive")));
    }
    let (c, p) = capabilities_pure(n, rbar)?;
    Ok(c.powf(alpha) - n as f64 * p.powf(alpha))
}

/// Smallest `r̄ > 0` where the pure-state gap turns from negative to
/// non-negative, located on a log grid over `[1e-4, 5]` and refined by
/// bisection. `None` when the gap never changes sign there.
pub fn violation_threshold(n: usize, alpha: f64) -> Result<Option<f64>> {
    let grid = log_grid(1e-4, 5.0, 400)?;
    let mut prev = (grid[0], monogamy_gap(n, grid[0], alpha)?);
    if prev.1 >= 0.0 {
        return Ok(None);
    }
    for &r in &grid[1..] {
        let g = monogamy_gap(n, r, alpha)?;
        if g >= 0.0 {
            let (mut lo, mut hi) = (prev.0, r);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if monogamy_gap(n, mid, alpha)? < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo < 1e-14 * hi {
                    break;
                }
            }
            return Ok(Some(0.5 * (lo + hi)));
        }
        prev = (r, g);
    }
    Ok(None)
}

/// Deviation of the pure-state capabilities from their second-order
/// expansion `2r̄/(N+1) ± 4(N-1)r̄²/(N+1)²` at one `r̄`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticPoint {
    pub rbar: f64,
    pub dev_collective: f64,
    pub dev_pair: f64,
    /// `max(dev) / r̄³`.
    pub scaled: f64,
}

pub fn asymptotic_check(n: usize, rbars: &[f64]) -> Result<Vec<AsymptoticPoint>> {
    let nf = n as f64;
    rbars
        .iter()
        .map(|&r| {
            if !(r > 0.0 && r <= 0.2) {
                return Err(param(format!("expansion check needs 0 < r̄ <= 0.2, got {r}")));
            }
            let (c, p) = capabilities_pure(n, r)?;
            let lin = 2.0 * r / (nf + 1.0);
            let quad = 4.0 * (nf - 1.0) * r * r / ((nf + 1.0) * (nf + 1.0));
            let dev_collective = (c - (lin + quad)).abs();
            let dev_pair = (p - (lin - quad)).abs();
            Ok(AsymptoticPoint { rbar: r, dev_collective, dev_pair, scaled: dev_collective.max(dev_pair) / r.powi(3) })
        })
        .collect()
}

/// Noise moments of the assisted protocol: the receiver's output carries
/// `x_1 - x_0` and `p_1 + p_0 + g Σ_{j≥2} p_j` on top of the input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProtocolNoise {
    pub vx: f64,
    pub vp: f64,
    pub cxp: f64,
}

impl ProtocolNoise {
    /// Coherent-state fidelity `1/√det(I + V)` for the noise CM `V`.
    pub fn fidelity(&self) -> f64 {
        1.0 / ((1.0 + self.vx) * (1.0 + self.vp) - self.cxp * self.cxp).sqrt()
    }
}

pub fn protocol_noise(state: &GaussianState, g: f64) -> Result<ProtocolNoise> {
    let modes = state.n_modes();
    if modes < 2 {
        return Err(param("protocol needs a sender and at least one receiver"));
    }
    let dim = 2 * modes;
    let mut ux = vec![0.0; dim];
    ux[2] = 1.0;
    ux[0] = -1.0;
    let mut up = vec![0.0; dim];
    up[3] = 1.0;
    up[1] = 1.0;
    for j in 2..modes {
        up[2 * j + 1] = g;
    }
    let cm = state.cm();
    let form = |a: &[f64], b: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..dim {
            for k in 0..dim {
                s += a[i] * cm[(i, k)] * b[k];
            }
        }
        s
    };
    Ok(ProtocolNoise { vx: form(&ux, &ux), vp: form(&up, &up), cxp: form(&ux, &up) })
}

/// Protocol fidelity for given parameters and gain.
pub fn protocol_fidelity(params: &NetworkParams, g: f64) -> Result<f64> {
    Ok(protocol_noise(&params.state()?, g)?.fidelity())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolOptimum {
    pub fidelity: f64,
    pub g: f64,
    pub d: f64,
}

pub const GAIN_RANGE: (f64, f64) = (0.0, 3.0);
pub const ASYMMETRY_RANGE: (f64, f64) = (-2.0, 2.0);

/// Maximizes the protocol fidelity over the gain (inner golden section)
/// and the squeezing asymmetry `d` at fixed `r̄` (outer golden section).
pub fn protocol_fidelity_sim(n: usize, n1: f64, n2: f64, rbar: f64) -> Result<ProtocolOptimum> {
    check(n, n1, n2, rbar)?;
    let best_gain = |d: f64| -> (f64, f64) {
        let params = NetworkParams::from_mean(n, n1, n2, rbar, d);
        let Ok(state) = params.state() else {
            return (0.0, f64::NEG_INFINITY);
        };
        if n == 1 {
            return (0.0, protocol_noise(&state, 0.0).map_or(f64::NEG_INFINITY, |p| p.fidelity()));
        }
        golden_section_max(
            |g| protocol_noise(&state, g).map_or(f64::NEG_INFINITY, |p| p.fidelity()),
            GAIN_RANGE.0,
            GAIN_RANGE.1,
            1e-10,
        )
    };
    let (d, _) = golden_section_max(|d| best_gain(d).1, ASYMMETRY_RANGE.0, ASYMMETRY_RANGE.1, 1e-10);
    let (g, fidelity) = best_gain(d);
    if !fidelity.is_finite() {
        return Err(crate::Error::Convergence { context: "protocol optimization".into(), residual: f64::NAN });
    }
    Ok(ProtocolOptimum { fidelity, g, d })
}

/// `n` log-spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo) || n < 2 {
        return Err(param("log grid needs 0 < lo < hi and at least two points"));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioPoint {
    pub rbar: f64,
    pub ratio: f64,
}

/// `C_pair / C_collective` for pure inputs along `rbars`.
pub fn ratio_limit_scan(n: usize, rbars: &[f64]) -> Result<Vec<RatioPoint>> {
    rbars
        .iter()
        .map(|&rbar| {
            if !(rbar > 0.0) {
                return Err(param(format!("ratio needs r̄ > 0, got {rbar}")));
            }
            let (c, p) = capabilities_pure(n, rbar)?;
            Ok(RatioPoint { rbar, ratio: p / c })
        })
        .collect()
}

/// One row of the capability scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkRow {
    pub n: usize,
    pub rbar: f64,
    pub alpha: f64,
    pub c_collective: f64,
    pub c_pair: f64,
    pub gap: f64,
    pub ratio: f64,
}

/// Default `r̄` grid: 200 log-spaced points on `[0.001, 2]`.
pub fn default_rbar_grid() -> Vec<f64> {
    log_grid(1e-3, 2.0, 200).expect("valid grid")
}

/// Pure-state capability rows ordered by `N`, then `α`, then `r̄`.
pub fn network_scan(ns: &[usize], rbars: &[f64], alphas: &[f64]) -> Result<Vec<NetworkRow>> {
    let points: Vec<(usize, f64, f64)> =
        ns.iter().flat_map(|&n| alphas.iter().flat_map(move |&a| rbars.iter().map(move |&r| (n, a, r)))).collect();
    points
        .into_par_iter()
        .map(|(n, alpha, rbar)| {
            let rep = capability_report(n, 1.0, 1.0, rbar, alpha)?;
            Ok(NetworkRow {
                n,
                rbar,
                alpha,
                c_collective: rep.c_collective,
                c_pair: rep.c_pair,
                gap: rep.gap,
                ratio: rep.ratio,
            })
        })
        .collect()
}

pub const NETWORK_HEADER: [&str; 7] = ["N", "rbar", "alpha", "C_collective", "C_pair", "gap", "ratio"];

pub fn write_network_csv<W: std::io::Write>(out: W, rows: &[NetworkRow]) -> Result<()> {
    write_csv(
        out,
        &NETWORK_HEADER,
        rows.iter().map(|r| {
            vec![
                r.n.to_string(),
                sig9(r.rbar),
                sig9(r.alpha),
                sig9(r.c_collective),
                sig9(r.c_pair),
                sig9(r.gap),
                sig9(r.ratio),
            ]
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gaussian::tmsv_cm;
    use crate::teleport::fidelity_cm;

    #[test]
    fn single_receiver_reduces_to_tmsv() {
        for r in [0.0f64, 0.3, 1.1] {
            let expect = 1.0 / (1.0 + (-2.0 * r).exp());
            let nu = nu_assisted(1, 1.0, 1.0, r).unwrap();
            assert!((fidelity_from_nu(nu) - expect).abs() < 1e-14);
            assert!((nu_pair(1, 1.0, 1.0, r).unwrap() - nu).abs() < 1e-15);
            let f = fidelity_cm(&tmsv_cm(r).unwrap()).unwrap();
            assert!((f - expect).abs() < 1e-12);
            let sim = protocol_fidelity(&NetworkParams::from_mean(1, 1.0, 1.0, r, 0.0), 0.0).unwrap();
            assert!((sim - expect).abs() < 1e-12, "{sim} vs {expect}");
        }
    }

    #[test]
    fn closed_forms_match_pt_spectra() {
        for n in [1, 2, 5, 10] {
            for rbar in [0.1, 0.5, 1.0, 2.0] {
                for (n1, n2) in [(1.0, 1.0), (1.5, 1.2)] {
                    let st = NetworkParams::from_mean(n, n1, n2, rbar, 0.3).state().unwrap();
                    let nu_n = nu_assisted(n, n1, n2, rbar).unwrap();
                    let coll = localized_pt_eigenvalue(&st).unwrap();
                    let split = st.pt_least_eigenvalue(&[0]).unwrap();
                    let pair = st.partial_trace(&[0, 1]).unwrap().pt_least_eigenvalue(&[0]).unwrap();
                    assert!((coll - nu_n).abs() < 1e-9, "N={n} r={rbar}");
                    if n == 1 {
                        assert!((split - nu_n).abs() < 1e-9);
                    } else {
                        assert!(split < nu_n - 1e-4, "N={n} r={rbar}: {split} vs {nu_n}");
                    }
                    assert!((pair - nu_pair(n, n1, n2, rbar).unwrap()).abs() < 1e-9, "N={n} r={rbar}");
                }
            }
        }
    }

    #[test]
    fn entanglement_independent_of_asymmetry() {
        for (n1, n2) in [(1.0, 1.0), (1.5, 1.2)] {
            let base = NetworkParams::from_mean(3, n1, n2, 0.6, 0.0).state().unwrap();
            let (b_split, b_loc) = (base.pt_least_eigenvalue(&[0]).unwrap(), localized_pt_eigenvalue(&base).unwrap());
            for d in [-0.5, 0.3, 1.2] {
                let st = NetworkParams::from_mean(3, n1, n2, 0.6, d).state().unwrap();
                assert!((st.pt_least_eigenvalue(&[0]).unwrap() - b_split).abs() < 1e-9);
                assert!((localized_pt_eigenvalue(&st).unwrap() - b_loc).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn capabilities_agree_with_nu() {
        for n in [2, 5] {
            for rbar in [0.05, 0.7] {
                let rep = capability_report(n, 1.0, 1.0, rbar, 1.0).unwrap();
                let (c, p) = capabilities_pure(n, rbar).unwrap();
                assert!((rep.c_collective - c).abs() < 1e-14 && (rep.c_pair - p).abs() < 1e-14);
            }
        }
        assert_eq!(capabilities_pure(3, 0.0).unwrap(), (0.0, 0.0));
        assert_eq!(capability(0.5), 0.0);
        assert!((capability(2.0 / 3.0) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn gap_signs() {
        assert!(monogamy_gap(2, 0.05, 1.0).unwrap() < 0.0);
        assert!((monogamy_gap(2, 0.1, 1.0).unwrap() - -0.05316).abs() < 1e-5);
        assert!(monogamy_gap(2, 2.0, 1.0).unwrap() > 0.0);
        for (alpha, root) in [(1.0, 0.573), (2.0, 0.265), (4.0, 0.1306), (8.0, 0.0651)] {
            let t = violation_threshold(2, alpha).unwrap().unwrap();
            assert!((t - root).abs() < 2e-3, "alpha={alpha}: {t}");
        }
    }

    #[test]
    fn expansion_error_is_cubic() {
        let pts = asymptotic_check(2, &[0.02, 0.01, 0.005]).unwrap();
        assert!(pts[1].dev_collective.max(pts[1].dev_pair) < 1e-5);
        let s: Vec<f64> = pts.iter().map(|p| p.scaled).collect();
        assert!((s[1] / s[0] - 1.0).abs() < 0.1 && (s[2] / s[1] - 1.0).abs() < 0.1, "{s:?}");
    }

    #[test]
    fn protocol_optimum_matches_nu() {
        for (n, n1, n2, rbar) in [(2, 1.0, 1.0, 0.5), (3, 1.0, 1.0, 1.0), (2, 1.5, 1.2, 0.7)] {
            let opt = protocol_fidelity_sim(n, n1, n2, rbar).unwrap();
            let target = fidelity_from_nu(nu_assisted(n, n1, n2, rbar).unwrap());
            assert!((opt.fidelity - target).abs() < 1e-6, "N={n}: {opt:?} vs {target}");
            let no_assist = protocol_fidelity(&NetworkParams::from_mean(n, n1, n2, rbar, opt.d), 0.0).unwrap();
            assert!(no_assist < opt.fidelity - 1e-4);
        }
    }

    #[test]
    fn ratio_limits() {
        let pts = ratio_limit_scan(2, &[1e-3, 2.0]).unwrap();
        assert!(pts[0].ratio > 0.99);
        assert!(pts[1].ratio < 0.5);
    }

    #[test]
    fn csv_layout() {
        let rows = network_scan(&[2], &[0.1], &[1.0]).unwrap();
        let mut buf = Vec::new();
        write_network_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("N,rbar,alpha,C_collective,C_pair,gap,ratio\n2,0.1,1,"));
    }
}
