use crate::error::{Error, Result};

/// Result of a least-squares line through `(ln N, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
}

/// Fits `y = prefactor * N^exponent`.
pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 3 {
        return Err(Error::InvalidInput("power-law fit needs at least 3 points"));
    }
    if points.iter().any(|&(n, y)| !(n > 0.0 && y > 0.0) || !n.is_finite() || !y.is_finite()) {
        return Err(Error::InvalidInput("power-law fit needs positive finite data"));
    }
    let k = points.len() as f64;
    let (mut sx, mut sy) = (0.0, 0.0);
    for &(n, y) in points {
        sx += libm::log(n);
        sy += libm::log(y);
    }
    let (mx, my) = (sx / k, sy / k);
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(n, y) in points {
        let dx = libm::log(n) - mx;
        let dy = libm::log(y) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::InvalidInput("power-law fit needs distinct abscissae"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res = (syy - slope * sxy).max(0.0);
    let r2 = if syy <= 1e-300 { 1.0 } else { (1.0 - ss_res / syy).clamp(0.0, 1.0) };
    Ok(PowerLawFit { exponent: slope, prefactor: libm::exp(intercept), r_squared: r2 })
}
