//! Globally adaptive Gauss–Kronrod (G10/K21) quadrature on a finite interval.

use crate::error::{Error, Result};

/// Kronrod abscissae in [0, 1); odd indices (1, 3, ...) are the Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights for the nodes XGK[1], XGK[3], ..., XGK[9].
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// An integral value with an estimate of its absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

fn kronrod21<F: FnMut(f64) -> Result<f64>>(f: &mut F, lo: f64, hi: f64) -> Result<Segment> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center)?;
    let mut values = [(0.0, 0.0); 10];
    let mut kronrod = fc * WGK[10];
    let mut abs_sum = fc.abs() * WGK[10];
    let mut gauss = 0.0;
    for k in 0..10 {
        let dx = half * XGK[k];
        let (f1, f2) = (f(center - dx)?, f(center + dx)?);
        values[k] = (f1, f2);
        kronrod += WGK[k] * (f1 + f2);
        abs_sum += WGK[k] * (f1.abs() + f2.abs());
        if k % 2 == 1 {
            gauss += WG[k / 2] * (f1 + f2);
        }
    }
    // QUADPACK error heuristic: scale the Gauss/Kronrod difference by the
    // integrand's variation and bound it below by rounding error.
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for k in 0..10 {
        asc += WGK[k] * ((values[k].0 - mean).abs() + (values[k].1 - mean).abs());
    }
    let asc = asc * half.abs();
    let abs_int = abs_sum * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    if abs_int > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * abs_int);
    }
    Ok(Segment {
        lo,
        hi,
        value: kronrod * half,
        error,
    })
}

/// Integrates `f` over `[lo, hi]` until the summed error estimate falls below
/// `abs_tol`, bisecting the worst segment at each step.
///
/// The integrand may fail; its error is propagated unchanged. Exceeding
/// `max_segments` is reported as [`Error::Numerical`].
pub fn integrate<F>(mut f: F, lo: f64, hi: f64, abs_tol: f64, max_segments: usize) -> Result<Estimate>
where
    F: FnMut(f64) -> Result<f64>,
{
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(Error::Numerical(format!("non-finite integration bounds [{lo}, {hi}]")));
    }
    if hi <= lo {
        return Ok(Estimate::default());
    }
    let mut segments = vec![kronrod21(&mut f, lo, hi)?];
    loop {
        let (value, error) = segments
            .iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        if error <= abs_tol {
            return Ok(Estimate { value, error });
        }
        if segments.len() >= max_segments {
            return Err(Error::Numerical(format!(
                "quadrature on [{lo}, {hi}] did not reach tolerance {abs_tol:e} \
                 (error estimate {error:e} after {} segments)",
                segments.len()
            )));
        }
        let worst = segments
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.lo + seg.hi);
        if mid <= seg.lo || mid >= seg.hi {
            // interval no longer divisible in floating point; accept it
            return Ok(Estimate { value, error });
        }
        segments.push(kronrod21(&mut f, seg.lo, mid)?);
        segments.push(kronrod21(&mut f, mid, seg.hi)?);
    }
}
