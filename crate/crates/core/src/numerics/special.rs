use crate::error::{Error, Result};
use core::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Which special function [`special_value`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpecialKind {
    Gamma,
    Hyp1f1,
    Hyp2f1,
}

/// Dispatch by kind. Arguments: `[x]`, `[a, b, z]` or `[a, b, c, z]`.
pub fn special_value(kind: SpecialKind, args: &[f64]) -> Result<f64> {
    match (kind, args) {
        (SpecialKind::Gamma, [x]) => gamma(*x),
        (SpecialKind::Hyp1f1, [a, b, z]) => hyp1f1(*a, *b, *z),
        (SpecialKind::Hyp2f1, [a, b, c, z]) => hyp2f1(*a, *b, *c, *z),
        _ => Err(Error::InvalidInput("wrong number of special-function arguments")),
    }
}

fn is_nonpositive_integer(x: f64) -> bool {
    x <= 0.0 && x == libm::floor(x)
}

/// Euler gamma function. Exact factorials for small positive integers.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain("gamma of non-finite argument"));
    }
    if is_nonpositive_integer(x) {
        return Err(Error::GammaPole(x));
    }
    if x == libm::floor(x) && x <= 171.0 {
        let mut f = 1.0;
        let mut k = 2.0;
        while k < x {
            f *= k;
            k += 1.0;
        }
        return Ok(f);
    }
    if x < 0.5 {
        let s = libm::sin(PI * x);
        return Ok(PI / (s * gamma(1.0 - x)?));
    }
    Ok(libm::exp(ln_gamma_lanczos(x)))
}

fn ln_gamma_lanczos(x: f64) -> f64 {
    let x = x - 1.0;
    let mut a = LANCZOS[0];
    let t = x + LANCZOS_G + 0.5;
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * libm::log(2.0 * PI) + (x + 0.5) * libm::log(t) - t + libm::log(a)
}

/// Natural log of |Gamma(x)| for x > 0.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain("ln_gamma requires a positive argument"));
    }
    if x < 0.5 {
        return Ok(libm::log(gamma(x)?));
    }
    Ok(ln_gamma_lanczos(x))
}

const SERIES_EPS: f64 = 1e-16;
const MAX_TERMS: usize = 100_000;

/// Plain power series of 1F1, used where it converges without cancellation.
fn hyp1f1_series(a: f64, b: f64, z: f64) -> Result<f64> {
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        term *= (a + nf) / (b + nf) * z / (nf + 1.0);
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        if term.abs() <= SERIES_EPS * sum.abs() && nf > z.abs() {
            return Ok(sum);
        }
    }
    Err(Error::Domain("1F1 series did not converge"))
}

/// Large negative argument: leading algebraic asymptotic series.
fn hyp1f1_asymptotic(a: f64, b: f64, z: f64) -> Result<f64> {
    let x = -z;
    let pref = gamma(b)? / gamma(b - a)? * libm::pow(x, -a);
    let mut term = 1.0;
    let mut sum = 1.0;
    for s in 0..200 {
        let sf = s as f64;
        let next = term * (a + sf) * (a - b + 1.0 + sf) / ((sf + 1.0) * x);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        sum += term;
        if term.abs() <= SERIES_EPS * sum.abs() {
            break;
        }
    }
    Ok(pref * sum)
}

/// Kummer confluent hypergeometric function 1F1(a; b; z) for real arguments.
pub fn hyp1f1(a: f64, b: f64, z: f64) -> Result<f64> {
    if is_nonpositive_integer(b) {
        return Err(Error::Domain("1F1 undefined for non-positive integer b"));
    }
    if z == 0.0 || a == 0.0 {
        return Ok(1.0);
    }
    if is_nonpositive_integer(a) {
        return hyp1f1_series(a, b, z);
    }
    if z >= -1.0 {
        if z > 700.0 {
            return Err(Error::Domain("1F1 argument too large"));
        }
        return hyp1f1_series(a, b, z);
    }
    if is_nonpositive_integer(b - a) {
        return Ok(libm::exp(z) * hyp1f1_series(b - a, b, -z)?);
    }
    if z >= -600.0 {
        return Ok(libm::exp(z) * hyp1f1_series(b - a, b, -z)?);
    }
    hyp1f1_asymptotic(a, b, z)
}

/// Gauss hypergeometric function 2F1(a, b; c; z) by direct series, |z| < 1.
pub fn hyp2f1(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    if !(z.abs() < 1.0) {
        return Err(Error::Domain("2F1 series requires |z| < 1"));
    }
    if is_nonpositive_integer(c) {
        return Err(Error::Domain("2F1 undefined for non-positive integer c"));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((c + nf) * (nf + 1.0)) * z;
        sum += term;
        if term == 0.0 || (term.abs() <= SERIES_EPS * sum.abs() && nf > 2.0) {
            return Ok(sum);
        }
    }
    Err(Error::Domain("2F1 series did not converge"))
}

/// Standard normal quantile: rational initial guess refined by Halley steps.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain("normal quantile requires 0 < p < 1"));
    }
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    let plow = 0.024_25;
    let mut x = if p < plow {
        let q = libm::sqrt(-2.0 * libm::log(p));
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - plow {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = libm::sqrt(-2.0 * libm::log(1.0 - p));
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    for _ in 0..2 {
        let e = 0.5 * libm::erfc(-x / core::f64::consts::SQRT_2) - p;
        let u = e * libm::sqrt(2.0 * PI) * libm::exp(0.5 * x * x);
        x -= u / (1.0 + 0.5 * x * u);
    }
    Ok(x)
}
