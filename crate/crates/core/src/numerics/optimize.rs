use alloc::vec::Vec;

/// Location of a one-dimensional minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    /// True when the grid minimum sat on an endpoint of the search range.
    pub at_boundary: bool,
}

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search on `[a, b]` until the bracket is below `rel_tol * |x|`.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, rel_tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..300 {
        if (b - a).abs() <= rel_tol * (0.5 * (a + b)).abs().max(1e-300) {
            break;
        }
        if fc < fd {
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
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Grid points between `lo` and `hi`, geometric when `log` is set.
pub fn grid(lo: f64, hi: f64, n: usize, log: bool) -> Vec<f64> {
    if n < 2 {
        return alloc::vec![lo];
    }
    (0..n)
        .map(|i| {
            let f = i as f64 / (n - 1) as f64;
            if log {
                libm::exp(libm::log(lo) + f * (libm::log(hi) - libm::log(lo)))
            } else {
                lo + f * (hi - lo)
            }
        })
        .collect()
}

/// Grid scan followed by golden-section refinement between the neighbours of
/// the best grid point.
pub fn minimize_on_grid<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, n: usize, log: bool, rel_tol: f64) -> Minimum {
    let xs = grid(lo, hi, n.max(3), log);
    let values: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    minimize_sampled(f, &xs, &values, rel_tol)
}

/// Refines the minimum of already-sampled values.
pub fn minimize_sampled<F: FnMut(f64) -> f64>(f: F, xs: &[f64], values: &[f64], rel_tol: f64) -> Minimum {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] || values[best].is_nan() {
            best = i;
        }
    }
    let last = xs.len() - 1;
    if best == 0 || best == last {
        return Minimum { x: xs[best], value: values[best], at_boundary: true };
    }
    let (x, v) = golden_section(f, xs[best - 1], xs[best + 1], rel_tol);
    if v <= values[best] {
        Minimum { x, value: v, at_boundary: false }
    } else {
        Minimum { x: xs[best], value: values[best], at_boundary: false }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parabola_minimum() {
        let m = minimize_on_grid(|x| (x - 0.3) * (x - 0.3) + 1.0, 0.0, 1.0, 11, false, 1e-10);
        assert!((m.x - 0.3).abs() < 1e-6);
        assert!(!m.at_boundary);
    }

    #[test]
    fn monotone_flags_boundary() {
        let m = minimize_on_grid(|x| x, 1.0, 2.0, 10, false, 1e-8);
        assert!(m.at_boundary);
    }
}
