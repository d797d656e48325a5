//! Scalar special functions: log-gamma, log-beta, digamma and the
//! regularized incomplete beta function.
//!
//! All densities and privacy quantities in this crate are assembled from
//! these functions in log-space, so the accuracy targets here bound the
//! accuracy of everything downstream. Arguments are validated by the public
//! entry points; the crate-internal `*_unchecked` variants skip validation
//! for use inside integrands whose arguments are already known to be valid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// ln(2π) / 2
const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

/// Arguments below this are shifted upward with the recurrence before the
/// asymptotic series is applied.
const ASYMPTOTIC_THRESHOLD: f64 = 10.0;

/// B_{2j} / (2j (2j - 1)) for j = 1..=8 (Stirling series for ln Γ).
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// B_{2j} / (2j) for j = 1..=8 (asymptotic series for ψ).
const DIGAMMA_SERIES: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32_760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
];

/// Iteration cap of the incomplete-beta continued fraction.
pub const INC_BETA_MAX_ITER: usize = 400;

const INC_BETA_EPS: f64 = 1e-15;
const TINY: f64 = 1e-300;

fn check_positive(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(name, format!("must be a positive finite real, got {v}")))
    }
}

/// Natural logarithm of Γ(z) for z > 0.
pub fn ln_gamma(z: f64) -> Result<f64> {
    check_positive("z", z)?;
    Ok(ln_gamma_unchecked(z))
}

pub(crate) fn ln_gamma_unchecked(z: f64) -> f64 {
    if z == 1.0 || z == 2.0 {
        return 0.0;
    }
    let (shifted, log_prod) = shift_up(z);
    stirling(shifted) - log_prod
}

/// Returns `(z + m, ln(z (z+1) ... (z+m-1)))` with `z + m >= ASYMPTOTIC_THRESHOLD`.
fn shift_up(z: f64) -> (f64, f64) {
    let mut x = z;
    let mut prod = 1.0;
    while x < ASYMPTOTIC_THRESHOLD {
        prod *= x;
        x += 1.0;
    }
    (x, prod.ln())
}

fn stirling(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    let mut pow = inv;
    for c in STIRLING {
        series += c * pow;
        pow *= inv2;
    }
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + series
}

/// ln beta(a, b) = ln Γ(a) + ln Γ(b) − ln Γ(a + b).
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    check_positive("a", a)?;
    check_positive("b", b)?;
    Ok(ln_beta_unchecked(a, b))
}

pub(crate) fn ln_beta_unchecked(a: f64, b: f64) -> f64 {
    ln_gamma_unchecked(a) + ln_gamma_unchecked(b) - ln_gamma_unchecked(a + b)
}

/// The digamma function ψ(z) = d/dz ln Γ(z) for z > 0.
pub fn digamma(z: f64) -> Result<f64> {
    check_positive("z", z)?;
    let mut x = z;
    let mut acc = 0.0;
    while x < ASYMPTOTIC_THRESHOLD {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    let mut series = 0.0;
    let mut pow = inv2;
    for c in DIGAMMA_SERIES {
        series += c * pow;
        pow *= inv2;
    }
    Ok(acc + x.ln() - 0.5 / x - series)
}

/// Regularized incomplete beta function I_x(a, b).
///
/// Evaluated with the modified Lentz continued fraction. For
/// `x > a / (a + b)` the symmetry `I_x(a, b) = 1 − I_{1−x}(b, a)` moves the
/// argument into the fast-converging region. Failure to converge within
/// [`INC_BETA_MAX_ITER`] iterations is reported as [`Error::Numerical`].
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    check_positive("a", a)?;
    check_positive("b", b)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::param("x", format!("must lie in [0, 1], got {x}")));
    }
    reg_inc_beta_unchecked(x, a, b)
}

pub(crate) fn reg_inc_beta_unchecked(x: f64, a: f64, b: f64) -> Result<f64> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    if x >= 1.0 {
        return Ok(1.0);
    }
    if x > a / (a + b) {
        let y = 1.0 - x;
        Ok(1.0 - inc_beta_cf(y, b, a, (-x).ln_1p(), x.ln())?)
    } else {
        Ok(inc_beta_cf(x, a, b, x.ln(), (-x).ln_1p())?)
    }
}

/// Upper tail 1 − I_x(a, b), evaluated without cancellation on either side.
/// `y = 1 − x` is supplied by the caller so it can keep full precision.
pub(crate) fn reg_inc_beta_upper_split(x: f64, y: f64, a: f64, b: f64) -> Result<f64> {
    if x <= 0.0 {
        return Ok(1.0);
    }
    if y <= 0.0 {
        return Ok(0.0);
    }
    let (ln_x, ln_y) = (x.ln(), y.ln());
    if y > b / (a + b) {
        Ok(1.0 - inc_beta_cf(x, a, b, ln_x, ln_y)?)
    } else {
        Ok(inc_beta_cf(y, b, a, ln_y, ln_x)?)
    }
}

/// x^a (1−x)^b / (a B(a,b)) times the continued fraction; `ln_x` and
/// `ln_1mx` are passed in so callers can supply the accurate form.
fn inc_beta_cf(x: f64, a: f64, b: f64, ln_x: f64, ln_1mx: f64) -> Result<f64> {
    let front = (a * ln_x + b * ln_1mx - ln_beta_unchecked(a, b)).exp() / a;
    if front == 0.0 {
        return Ok(0.0);
    }
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=INC_BETA_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < INC_BETA_EPS {
            return Ok(front * h);
        }
    }
    Err(Error::Numerical(format!(
        "incomplete beta continued fraction did not converge (x={x}, a={a}, b={b})"
    )))
}

/// Closed-form bracket around beta(a, b) valid for a, b > 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaBounds {
    pub lower: f64,
    pub upper: f64,
}

impl BetaBounds {
    pub fn ln_lower(&self) -> f64 {
        self.lower.ln()
    }

    pub fn ln_upper(&self) -> f64 {
        self.upper.ln()
    }

    pub fn contains(&self, value: f64) -> bool {
        self.lower <= value && value <= self.upper
    }
}

/// exp(2 − a − b) ≤ beta(a, b) ≤ (a + b − 1) / ((2a − 1)(2b − 1)), for a, b > 1.
pub fn beta_bounds(a: f64, b: f64) -> Result<BetaBounds> {
    if !(a > 1.0 && a.is_finite()) {
        return Err(Error::param("a", format!("beta bounds require a > 1, got {a}")));
    }
    if !(b > 1.0 && b.is_finite()) {
        return Err(Error::param("b", format!("beta bounds require b > 1, got {b}")));
    }
    Ok(BetaBounds {
        lower: (2.0 - a - b).exp(),
        upper: (a + b - 1.0) / ((2.0 * a - 1.0) * (2.0 * b - 1.0)),
    })
}

/// ln of the two bounds, without the round trip through `exp`.
pub(crate) fn ln_beta_bounds(a: f64, b: f64) -> Result<(f64, f64)> {
    beta_bounds(a, b)?;
    let ln_upper = (a + b - 1.0).ln() - (2.0 * a - 1.0).ln() - (2.0 * b - 1.0).ln();
    Ok((2.0 - a - b, ln_upper))
}
