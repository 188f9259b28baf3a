//! Derivative-free maximization helpers: golden-section line search and a
//! cyclic coordinate-ascent driver built on it.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Maximizes `f` on `[lo, hi]` by golden-section search. Returns `(x, f(x))`.
///
/// Assumes `f` is unimodal on the bracket; otherwise a local maximum is
/// returned. The bracket end points are also compared so that a maximum
/// sitting on the boundary is not missed.
pub fn golden_section_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64, xtol: f64) -> (f64, f64) {
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut iters = 0;
    while (b - a).abs() > xtol && iters < 200 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        iters += 1;
    }
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for x in [lo, hi] {
        let fx = f(x);
        if fx > best.1 {
            best = (x, fx);
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub sweeps: usize,
    pub converged: bool,
}

/// Cyclic coordinate ascent inside the box `bounds`, each coordinate updated
/// by a golden-section line search. Stops once a full sweep improves the
/// objective by less than `ftol`.
pub fn coordinate_ascent(
    f: &impl Fn(&[f64]) -> f64,
    start: &[f64],
    bounds: &[(f64, f64)],
    ftol: f64,
    max_sweeps: usize,
) -> CoordinateResult {
    let mut x = start.to_vec();
    let mut value = f(&x);
    for sweep in 1..=max_sweeps {
        let before = value;
        for i in 0..x.len() {
            let (lo, hi) = bounds[i];
            let (xi, fi) = golden_section_max(
                |t| {
                    let mut trial = x.clone();
                    trial[i] = t;
                    f(&trial)
                },
                lo,
                hi,
                1e-9,
            );
            if fi > value {
                x[i] = xi;
                value = fi;
            }
        }
        if value - before < ftol {
            return CoordinateResult { x, value, sweeps: sweep, converged: true };
        }
    }
    CoordinateResult { x, value, sweeps: max_sweeps, converged: false }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, fx) = golden_section_max(|x| -(x - 0.3).powi(2) + 2.0, -1.0, 2.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((fx - 2.0).abs() < 1e-14);
    }

    #[test]
    fn golden_respects_boundary_maximum() {
        let (x, _) = golden_section_max(|x| x, 0.0, 3.0, 1e-10);
        assert_eq!(x, 3.0);
    }

    #[test]
    fn coordinate_ascent_on_coupled_quadratic() {
        let f = |v: &[f64]| -(v[0] - 1.0).powi(2) - (v[1] + 0.5).powi(2) - 0.5 * (v[0] - 1.0) * (v[1] + 0.5);
        let res = coordinate_ascent(&f, &[0.0, 0.0], &[(-3.0, 3.0), (-3.0, 3.0)], 1e-14, 200);
        assert!(res.converged);
        assert!((res.x[0] - 1.0).abs() < 1e-5);
        assert!((res.x[1] + 0.5).abs() < 1e-5);
    }
}
