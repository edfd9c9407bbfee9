use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};

/// Tolerances and truncation window for integrals over `[0, inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub relative_tolerance: f64,
    pub absolute_tolerance: f64,
    pub max_subdivisions: usize,
    /// Upper limit of the truncated interval, in units of the cutoff scale.
    pub truncation_multiplier: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            relative_tolerance: 1e-10,
            absolute_tolerance: 1e-14,
            max_subdivisions: 4000,
            truncation_multiplier: 50.0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.relative_tolerance > 0.0 && self.absolute_tolerance > 0.0) {
            return Err(Error::InvalidInput("quadrature tolerances must be positive"));
        }
        if !(self.truncation_multiplier >= 10.0) {
            return Err(Error::InvalidInput("truncation multiplier must be at least 10"));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidInput("max_subdivisions must be positive"));
        }
        Ok(())
    }
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_589_439_452,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

/// Composite 10-point Gauss-Legendre nodes and weights on `[a, b]` split
/// into `panels` equal panels.
pub fn gauss_legendre_nodes(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(10 * panels);
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for j in 0..5 {
            let dx = 0.5 * h * XGK[2 * j + 1];
            let w = 0.5 * h * WG[j];
            out.push((c - dx, w));
            out.push((c + dx, w));
        }
    }
    out.sort_by(|x, y| x.0.total_cmp(&y.0));
    out
}

/// 21-point Kronrod rule with embedded 10-point Gauss error estimate.
pub fn gauss_kronrod21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let (v, e, _) = gauss_kronrod21_abs(f, a, b);
    (v, e)
}

/// As [`gauss_kronrod21`], also returning the integral of `|f|`.
fn gauss_kronrod21_abs<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut resk = fc * WGK[10];
    let mut resg = 0.0;
    let mut resabs = resk.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = resk * 0.5;
    let mut resasc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        resasc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = resk * half;
    let resabs = resabs * half.abs();
    let resasc = resasc * half.abs();
    let mut err = ((resk - resg) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * libm::fmin(1.0, libm::pow(200.0 * err / resasc, 1.5));
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = libm::fmax(err, 50.0 * f64::EPSILON * resabs);
    }
    (result, err, resabs)
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive integration over the panels delimited by `points`
/// (sorted, at least two entries).
pub fn integrate_panels<F: FnMut(f64) -> f64>(
    mut f: F,
    points: &[f64],
    spec: &QuadratureSpec,
) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidInput("at least two integration points required"));
    }
    let mut heap = BinaryHeap::with_capacity(points.len() + 64);
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut total_abs = 0.0;
    for w in points.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (v, e, r) = gauss_kronrod21_abs(&mut f, w[0], w[1]);
        total += v;
        total_err += e;
        total_abs += r;
        heap.push(Panel { a: w[0], b: w[1], value: v, error: e, abs: r });
    }
    let budget = spec.max_subdivisions + heap.len();
    let mut count = heap.len();
    loop {
        let tol = libm::fmax(spec.absolute_tolerance, spec.relative_tolerance * total.abs());
        // Cancellation floor: the error cannot drop below roundoff in |f|.
        let floor = 200.0 * f64::EPSILON * total_abs;
        if total_err <= tol || total_err <= floor {
            break;
        }
        if count >= budget {
            return Err(Error::Quadrature { achieved_error: total_err, subdivisions: count });
        }
        let worst = match heap.pop() {
            Some(p) => p,
            None => break,
        };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            // Panel cannot be split further in floating point.
            return Err(Error::Quadrature { achieved_error: total_err, subdivisions: count });
        }
        let (v1, e1, r1) = gauss_kronrod21_abs(&mut f, worst.a, mid);
        let (v2, e2, r2) = gauss_kronrod21_abs(&mut f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        total_abs += r1 + r2 - worst.abs;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1, abs: r1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2, abs: r2 });
        count += 1;
    }
    // Re-sum to shed drift from the running updates.
    let sum: f64 = heap.iter().map(|p| p.value).sum();
    Ok(sum)
}

/// Adaptive integration over a finite interval.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    integrate_panels(f, &[a, b], spec)
}

/// Integral over `[0, inf)` truncated at `truncation_multiplier * scale`.
pub fn integrate_semi_infinite<F: FnMut(f64) -> f64>(
    f: F,
    spec: &QuadratureSpec,
    scale: f64,
) -> Result<f64> {
    integrate_oscillatory(f, spec, scale, 0.0)
}

const MAX_PANELS: usize = 20_000;

/// Like [`integrate_semi_infinite`], but pre-splits the window at multiples of
/// `pi / time_scale` so that `cos(omega * time_scale)` factors are resolved.
pub fn integrate_oscillatory<F: FnMut(f64) -> f64>(
    f: F,
    spec: &QuadratureSpec,
    scale: f64,
    time_scale: f64,
) -> Result<f64> {
    spec.validate()?;
    if !(scale > 0.0) {
        return Err(Error::InvalidInput("integration scale must be positive"));
    }
    let upper = spec.truncation_multiplier * scale;
    let points = breakpoints(upper, scale, time_scale);
    integrate_panels(f, &points, spec)
}

fn breakpoints(upper: f64, scale: f64, time_scale: f64) -> Vec<f64> {
    let mut pts = Vec::new();
    pts.push(0.0);
    // A few geometric points near the origin help integrands with u^p behaviour.
    for k in [0.05, 0.25, 1.0] {
        pts.push(k * scale);
    }
    if time_scale.abs() > 0.0 {
        let step = core::f64::consts::PI / time_scale.abs();
        let n = libm::floor(upper / step) as usize;
        let stride = n / MAX_PANELS + 1;
        let mut k = stride;
        while k <= n {
            pts.push(k as f64 * step);
            k += stride;
        }
    } else {
        let mut x = 2.0 * scale;
        while x < upper {
            pts.push(x);
            x *= 2.0;
        }
    }
    pts.push(upper);
    pts.sort_by(|a, b| a.total_cmp(b));
    pts.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * upper);
    pts.retain(|&x| x <= upper);
    pts
}
