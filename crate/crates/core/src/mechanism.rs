//! The Dirichlet mechanism: output density, sampling, pointwise privacy loss
//! and output moments.
//!
//! With parameter `k`, an input `p` in the interior of the simplex is mapped
//! to a draw from `Dirichlet(k p)`.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{map_chunks, ExecutionMode, RngSeed};
use crate::simplex::{check_dim, differing_indices, SimplexVector, TOLERANCE};
use crate::special::ln_gamma_unchecked;

/// Samples per chunk for bulk sampling.
pub const SAMPLE_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConfigFields")]
pub struct MechanismConfig {
    k: f64,
}

#[derive(Deserialize)]
struct ConfigFields {
    k: f64,
}

impl TryFrom<ConfigFields> for MechanismConfig {
    type Error = Error;

    fn try_from(f: ConfigFields) -> Result<Self> {
        MechanismConfig::new(f.k)
    }
}

impl MechanismConfig {
    pub fn new(k: f64) -> Result<Self> {
        if k.is_finite() && k > 0.0 {
            Ok(MechanismConfig { k })
        } else {
            Err(Error::param("k", format!("must be a positive finite real, got {k}")))
        }
    }

    pub fn k(&self) -> f64 {
        self.k
    }
}

fn require_interior(p: &SimplexVector, what: &str) -> Result<()> {
    if p.is_interior() {
        Ok(())
    } else {
        Err(Error::InvalidVector(format!("{what} must have strictly positive entries")))
    }
}

/// ln B(k p) = Σ ln Γ(k p_i) − ln Γ(k).
pub fn ln_multivariate_beta(cfg: &MechanismConfig, p: &SimplexVector) -> Result<f64> {
    require_interior(p, "p")?;
    let k = cfg.k;
    Ok(p.entries().iter().map(|&v| ln_gamma_unchecked(k * v)).sum::<f64>() - ln_gamma_unchecked(k))
}

/// Log of the Dirichlet(k p) density at `x`, with respect to Lebesgue
/// measure on the first `n - 1` coordinates.
///
/// A boundary `x` gives `-inf` whenever a zero coordinate has `k p_i > 1`,
/// and an error when `k p_i < 1` (the density is unbounded there).
pub fn log_density(cfg: &MechanismConfig, p: &SimplexVector, x: &SimplexVector) -> Result<f64> {
    check_dim(p.dim(), x.dim())?;
    let norm = ln_multivariate_beta(cfg, p)?;
    let k = cfg.k;
    let mut acc = 0.0;
    let mut vanishes = false;
    for (i, (&pi, &xi)) in p.entries().iter().zip(x.entries()).enumerate() {
        let shape = k * pi;
        if xi == 0.0 {
            if shape < 1.0 {
                return Err(Error::UnboundedDensity { index: i });
            }
            if shape > 1.0 {
                vanishes = true;
            }
            continue;
        }
        acc += (shape - 1.0) * xi.ln();
    }
    if vanishes {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(acc - norm)
}

/// ln of a Gamma(shape, 1) variate.
///
/// Shapes at least one use the Marsaglia–Tsang squeeze. Smaller shapes draw
/// Gamma(shape + 1) and multiply by `U^(1/shape)`, which is added in
/// log-space so tiny shapes do not underflow early.
fn ln_gamma_variate<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    if shape < 1.0 {
        let u: f64 = 1.0 - rng.random::<f64>();
        return ln_gamma_variate(shape + 1.0, rng) + u.ln() / shape;
    }
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let z: f64 = StandardNormal.sample(rng);
        let t = 1.0 + c * z;
        if t <= 0.0 {
            continue;
        }
        let v = t * t * t;
        let u: f64 = 1.0 - rng.random::<f64>();
        let z2 = z * z;
        if u < 1.0 - 0.0331 * z2 * z2 || u.ln() < 0.5 * z2 + d * (1.0 - v + v.ln()) {
            return (d * v).ln();
        }
    }
}

/// Reusable sampler for one input vector.
#[derive(Debug, Clone)]
pub struct DirichletSampler {
    shapes: Vec<f64>,
    underflow_redraws: u64,
}

impl DirichletSampler {
    pub fn new(cfg: &MechanismConfig, p: &SimplexVector) -> Result<Self> {
        require_interior(p, "p")?;
        let shapes = p.entries().iter().map(|v| cfg.k * v).collect();
        Ok(DirichletSampler {
            shapes,
            underflow_redraws: 0,
        })
    }

    pub fn dim(&self) -> usize {
        self.shapes.len()
    }

    /// Number of draws discarded because a coordinate underflowed to zero.
    pub fn underflow_redraws(&self) -> u64 {
        self.underflow_redraws
    }

    /// Draws one output, writing it into `out` (length `dim()`).
    pub fn draw_into<R: Rng + ?Sized>(&mut self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.shapes.len());
        loop {
            let mut max = f64::NEG_INFINITY;
            for (o, &a) in out.iter_mut().zip(&self.shapes) {
                *o = ln_gamma_variate(a, rng);
                max = max.max(*o);
            }
            let mut total = 0.0;
            for o in out.iter_mut() {
                *o = (*o - max).exp();
                total += *o;
            }
            let mut ok = true;
            for o in out.iter_mut() {
                *o /= total;
                ok &= *o > 0.0;
            }
            if ok {
                return;
            }
            self.underflow_redraws += 1;
        }
    }

    pub fn draw<R: Rng + ?Sized>(&mut self, rng: &mut R) -> SimplexVector {
        let mut out = vec![0.0; self.shapes.len()];
        self.draw_into(rng, &mut out);
        SimplexVector::from_normalized(out)
    }
}

/// One mechanism output for input `p`, determined by `seed`.
pub fn sample(cfg: &MechanismConfig, p: &SimplexVector, seed: RngSeed) -> Result<SimplexVector> {
    let mut sampler = DirichletSampler::new(cfg, p)?;
    Ok(sampler.draw(&mut seed.rng()))
}

/// `count` outputs drawn in fixed chunks; identical in both execution modes.
pub fn sample_many(
    cfg: &MechanismConfig,
    p: &SimplexVector,
    seed: RngSeed,
    count: usize,
    mode: ExecutionMode,
) -> Result<Vec<SimplexVector>> {
    let sampler = DirichletSampler::new(cfg, p)?;
    let chunks = map_chunks(count, SAMPLE_CHUNK, seed, mode, |_, len, rng| {
        let mut s = sampler.clone();
        (0..len).map(|_| s.draw(rng)).collect::<Vec<_>>()
    });
    Ok(chunks.into_iter().flatten().collect())
}

/// Log-likelihood ratio ln[P(M(p) = x) / P(M(q) = x)] for inputs that
/// differ in two coordinates with equal sums.
pub fn privacy_loss(
    cfg: &MechanismConfig,
    p: &SimplexVector,
    q: &SimplexVector,
    x: &SimplexVector,
) -> Result<f64> {
    check_dim(p.dim(), x.dim())?;
    require_interior(p, "p")?;
    require_interior(q, "q")?;
    require_interior(x, "x")?;
    let Some((i, j)) = differing_pair(p, q)? else {
        return Ok(0.0);
    };
    let k = cfg.k;
    let gammas = ln_gamma_unchecked(k * q[i]) + ln_gamma_unchecked(k * q[j])
        - ln_gamma_unchecked(k * p[i])
        - ln_gamma_unchecked(k * p[j]);
    Ok(gammas + k * (p[i] - q[i]) * (x[i].ln() - x[j].ln()))
}

/// The two coordinates where `p` and `q` differ, `None` when they agree.
pub(crate) fn differing_pair(p: &SimplexVector, q: &SimplexVector) -> Result<Option<(usize, usize)>> {
    let diff = differing_indices(p, q)?;
    match diff.as_slice() {
        [] => Ok(None),
        &[i, j] => {
            if ((p[i] + p[j]) - (q[i] + q[j])).abs() > 2.0 * TOLERANCE {
                return Err(Error::NotAdjacent(format!(
                    "entries {i} and {j} do not preserve their sum"
                )));
            }
            Ok(Some((i, j)))
        }
        other => Err(Error::NotAdjacent(format!(
            "vectors differ in {} coordinates {other:?}; exactly two are allowed",
            other.len()
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: SimplexVector,
    pub variance: Vec<f64>,
}

/// Mean `p` and per-coordinate variance `p_i (1 − p_i) / (k + 1)`.
pub fn moments(cfg: &MechanismConfig, p: &SimplexVector) -> Result<Moments> {
    require_interior(p, "p")?;
    let variance = p
        .entries()
        .iter()
        .map(|&v| v * (1.0 - v) / (cfg.k + 1.0))
        .collect();
    Ok(Moments {
        mean: p.clone(),
        variance,
    })
}

/// 1 / (4 (k + 1)), the variance at `p_i = 1/2`.
pub fn worst_case_variance(cfg: &MechanismConfig) -> f64 {
    0.25 / (cfg.k + 1.0)
}

/// Smallest `k` whose worst-case variance equals `target`.
pub fn calibrate_k_for_variance(target: f64) -> Result<MechanismConfig> {
    if !(target > 0.0 && target < 0.25) {
        return Err(Error::param(
            "target_variance",
            format!("must lie in (0, 0.25), got {target}"),
        ));
    }
    MechanismConfig::new(0.25 / target - 1.0)
}
