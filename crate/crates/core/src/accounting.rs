//! Privacy accounting for the Dirichlet mechanism.
//!
//! The output space is split by a threshold `gamma` into
//! `Ω₁ = {x : x_i >= gamma for all i in W}` and its complement `Ω₂`.
//! `delta` is the largest probability of landing in `Ω₂` over the
//! restricted domain, attained at a vertex of the projected domain because
//! the `Ω₁` probability is log-concave in the input. `epsilon` bounds the
//! log-likelihood ratio of adjacent inputs on `Ω₁` in closed form.
//!
//! The `Ω₁` probability of an input only depends on its `W` coordinates and
//! the remaining mass. With `|W| <= 3` it is evaluated by nested adaptive
//! quadrature over the stick-breaking representation of the Dirichlet
//! distribution, with the innermost coordinate in closed form through the
//! regularized incomplete beta function. Larger `|W|` falls back to a
//! seeded Monte-Carlo estimate.

use std::cell::Cell;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mechanism::{DirichletSampler, MechanismConfig};
use crate::quadrature::{integrate, Estimate};
use crate::rng::{map_chunks, ExecutionMode, RngSeed};
use crate::simplex::{restricted_vertices, with_remainder, AdjacencyParams, DomainSpec, SimplexVector, TOLERANCE};
use crate::special::{ln_beta, ln_beta_bounds, ln_beta_unchecked, reg_inc_beta_upper_split};

/// Smallest threshold considered by [`calibrate_gamma`].
pub const GAMMA_FLOOR: f64 = 1e-12;
/// Absolute bisection tolerance of [`calibrate_gamma`].
pub const GAMMA_TOLERANCE: f64 = 1e-10;
/// Requested absolute accuracy of quadrature-based `Ω₁` probabilities.
pub const QUADRATURE_TOLERANCE: f64 = 1e-9;
/// Largest `|W|` evaluated by quadrature.
pub const MAX_QUADRATURE_DIM: usize = 3;

const MAX_SEGMENTS: usize = 2000;
const MC_CHUNK: usize = 8192;
/// The upper quadrature piece starts this far (in log scale) below both the
/// split point and the gap `1 - hi`; the neglected mass is below `e^-40`.
const UPPER_CUTOFF: f64 = 40.0;

/// Threshold defining the `Ω₁ / Ω₂` partition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PartitionParam {
    gamma: f64,
}

impl PartitionParam {
    /// Requires `0 < gamma <= 1 / w_size`.
    pub fn new(gamma: f64, w_size: usize) -> Result<Self> {
        let cap = 1.0 / w_size.max(1) as f64;
        if gamma.is_finite() && gamma > 0.0 && gamma <= cap + TOLERANCE {
            Ok(PartitionParam { gamma: gamma.min(cap) })
        } else {
            Err(Error::param(
                "gamma",
                format!("must lie in (0, 1/|W|] = (0, {cap}], got {gamma}"),
            ))
        }
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Omega1Method {
    /// Single incomplete-beta evaluation (`|W| = 1`, or `gamma = 0`).
    Exact,
    Quadrature,
    MonteCarlo,
    /// `|W| gamma > 1`: `Ω₁` is empty.
    Infeasible,
}

/// Probability of `Ω₁` with an absolute error estimate (a standard error
/// for Monte-Carlo).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Omega1Estimate {
    pub probability: f64,
    pub error: f64,
    pub method: Omega1Method,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Omega1Options {
    pub tolerance: f64,
    pub mc_draws: usize,
    pub mc_seed: RngSeed,
}

impl Default for Omega1Options {
    fn default() -> Self {
        Omega1Options {
            tolerance: QUADRATURE_TOLERANCE,
            mc_draws: 1_000_000,
            mc_seed: RngSeed::new(0x0d1c_41e7, 0),
        }
    }
}

fn validate_projected(p_tilde: &[f64]) -> Result<()> {
    if p_tilde.len() < 2 {
        return Err(Error::InvalidVector(
            "projected vector needs at least one W coordinate and the remainder".into(),
        ));
    }
    if p_tilde.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidVector(format!(
            "projected vector {p_tilde:?} must have strictly positive entries"
        )));
    }
    let sum: f64 = p_tilde.iter().sum();
    if (sum - 1.0).abs() > TOLERANCE {
        return Err(Error::InvalidVector(format!("projected vector sums to {sum}")));
    }
    Ok(())
}

/// `P[x_i >= gamma for every W coordinate]` for the Dirichlet mechanism at
/// an input whose projection is `p_tilde` (`W` coordinates followed by the
/// remaining mass).
pub fn omega1_probability(cfg: &MechanismConfig, p_tilde: &[f64], gamma: f64) -> Result<Omega1Estimate> {
    omega1_probability_with(cfg, p_tilde, gamma, &Omega1Options::default())
}

pub fn omega1_probability_with(
    cfg: &MechanismConfig,
    p_tilde: &[f64],
    gamma: f64,
    opts: &Omega1Options,
) -> Result<Omega1Estimate> {
    VertexEvaluator::new(cfg, p_tilde, opts)?.probability(gamma)
}

/// Evaluates the `Ω₁` probability of one projected input for many
/// thresholds. The Monte-Carlo variant draws once and reuses the sample, so
/// its estimate is monotone in `gamma`.
enum VertexEvaluator {
    Analytic {
        shapes: Vec<f64>,
        rest: f64,
        tolerance: f64,
    },
    MonteCarlo {
        /// Sorted minimum W coordinate of each draw.
        minima: Vec<f64>,
    },
}

impl VertexEvaluator {
    fn new(cfg: &MechanismConfig, p_tilde: &[f64], opts: &Omega1Options) -> Result<Self> {
        validate_projected(p_tilde)?;
        let m = p_tilde.len() - 1;
        let k = cfg.k();
        if m <= MAX_QUADRATURE_DIM {
            return Ok(VertexEvaluator::Analytic {
                shapes: p_tilde[..m].iter().map(|v| k * v).collect(),
                rest: k * p_tilde[m],
                tolerance: opts.tolerance / m as f64,
            });
        }
        let p = SimplexVector::new(p_tilde.to_vec())?;
        let sampler = DirichletSampler::new(cfg, &p)?;
        let chunks = map_chunks(
            opts.mc_draws,
            MC_CHUNK,
            opts.mc_seed,
            ExecutionMode::Parallel,
            |_, len, rng| {
                let mut s = sampler.clone();
                let mut out = vec![0.0; m + 1];
                (0..len)
                    .map(|_| {
                        s.draw_into(rng, &mut out);
                        out[..m].iter().copied().fold(f64::INFINITY, f64::min)
                    })
                    .collect::<Vec<_>>()
            },
        );
        let mut minima: Vec<f64> = chunks.into_iter().flatten().collect();
        minima.sort_unstable_by(f64::total_cmp);
        Ok(VertexEvaluator::MonteCarlo { minima })
    }

    fn w_size(&self) -> Option<usize> {
        match self {
            VertexEvaluator::Analytic { shapes, .. } => Some(shapes.len()),
            VertexEvaluator::MonteCarlo { .. } => None,
        }
    }

    fn probability(&self, gamma: f64) -> Result<Omega1Estimate> {
        if !(gamma.is_finite() && gamma >= 0.0) {
            return Err(Error::param("gamma", format!("must be a non-negative real, got {gamma}")));
        }
        if gamma == 0.0 {
            return Ok(Omega1Estimate {
                probability: 1.0,
                error: 0.0,
                method: Omega1Method::Exact,
            });
        }
        match self {
            VertexEvaluator::Analytic {
                shapes,
                rest,
                tolerance,
            } => {
                let m = shapes.len();
                if m as f64 * gamma >= 1.0 {
                    return Ok(Omega1Estimate {
                        probability: 0.0,
                        error: 0.0,
                        method: Omega1Method::Infeasible,
                    });
                }
                let est = stick_breaking(shapes, *rest, 1.0, 1.0 - m as f64 * gamma, gamma, *tolerance)?;
                Ok(Omega1Estimate {
                    probability: est.value.clamp(0.0, 1.0),
                    error: est.error,
                    method: if m == 1 {
                        Omega1Method::Exact
                    } else {
                        Omega1Method::Quadrature
                    },
                })
            }
            VertexEvaluator::MonteCarlo { minima } => {
                let below = minima.partition_point(|&v| v < gamma);
                let n = minima.len() as f64;
                let p = (minima.len() - below) as f64 / n;
                Ok(Omega1Estimate {
                    probability: p,
                    error: (p * (1.0 - p) / n).sqrt(),
                    method: Omega1Method::MonteCarlo,
                })
            }
        }
    }
}

/// Probability that the next `shapes.len()` stick-breaking coordinates all
/// reach `gamma`, when `remaining` mass is left to split among them and the
/// `rest` shape. `slack = remaining − shapes.len() · gamma` is carried
/// separately so that it keeps full relative precision near zero.
fn stick_breaking(shapes: &[f64], rest: f64, remaining: f64, slack: f64, gamma: f64, tol: f64) -> Result<Estimate> {
    if slack <= 0.0 {
        return Ok(Estimate::default());
    }
    let a = shapes[0];
    let r = remaining;
    if shapes.len() == 1 {
        return Ok(Estimate {
            value: reg_inc_beta_upper_split(gamma / r, slack / r, a, rest)?,
            error: 1e-14,
        });
    }
    let later = (shapes.len() - 1) as f64;
    let lo = gamma / r;
    let width = slack / r;
    let gap = later * gamma / r;
    let hi = 1.0 - gap;
    let tail: f64 = shapes[1..].iter().sum::<f64>() + rest;
    let ln_norm = ln_beta_unchecked(a, tail);
    let inner_error = Cell::new(0.0f64);
    let inner = |rem: f64, sl: f64| -> Result<f64> {
        let est = stick_breaking(&shapes[1..], rest, rem, sl, gamma, tol)?;
        inner_error.set(inner_error.get().max(est.error));
        Ok(est.value)
    };
    // Lower part in t = ln u keeps the weight bounded for small shapes and a
    // tiny lower limit. Upper part in s = ln(hi − u): the inner probability
    // vanishes like a power of (hi − u), which is smooth in s.
    let (split, upper_len) = if lo + 0.5 * width <= 0.5 {
        (lo + 0.5 * width, 0.5 * width)
    } else {
        (0.5, lo + width - 0.5)
    };
    let lower = integrate(
        |t| {
            let u = t.exp();
            let ln_w = a * t + (tail - 1.0) * (-u).ln_1p() - ln_norm;
            let sl = (slack + gamma - r * u).max(0.0);
            Ok(ln_w.exp() * inner(r * (1.0 - u), sl)?)
        },
        lo.ln(),
        split.ln(),
        tol / 2.0,
        MAX_SEGMENTS,
    )?;
    let s_hi = upper_len.ln();
    let s_lo = s_hi.min(gap.ln()) - UPPER_CUTOFF;
    let upper = integrate(
        |s| {
            let e = s.exp();
            let u = hi - e;
            let ln_w = (a - 1.0) * u.ln() + (tail - 1.0) * (gap + e).ln() + s - ln_norm;
            Ok(ln_w.exp() * inner(later * gamma + r * e, r * e)?)
        },
        s_lo,
        s_hi,
        tol / 2.0,
        MAX_SEGMENTS,
    )?;
    Ok(Estimate {
        value: lower.value + upper.value,
        error: lower.error + upper.error + inner_error.get(),
    })
}

/// `Ω₁` probability at one vertex of the projected domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexDiagnostic {
    /// `W` coordinates of the vertex.
    pub vertex: Vec<f64>,
    pub probability: f64,
    pub error: f64,
    pub method: Omega1Method,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaResult {
    pub delta: f64,
    /// Index into `vertices` of the minimizing vertex.
    pub argmin: usize,
    pub vertices: Vec<VertexDiagnostic>,
}

impl DeltaResult {
    pub fn argmin_vertex(&self) -> &[f64] {
        &self.vertices[self.argmin].vertex
    }
}

fn vertex_evaluators(cfg: &MechanismConfig, d: &DomainSpec, opts: &Omega1Options) -> Result<Vec<(Vec<f64>, VertexEvaluator)>> {
    restricted_vertices(d)
        .into_par_iter()
        .map(|v| {
            let ev = VertexEvaluator::new(cfg, &with_remainder(&v), opts)?;
            Ok((v, ev))
        })
        .collect()
}

fn delta_from(evaluators: &[(Vec<f64>, VertexEvaluator)], gamma: f64) -> Result<DeltaResult> {
    let vertices: Vec<VertexDiagnostic> = evaluators
        .par_iter()
        .map(|(v, ev)| {
            let est = ev.probability(gamma)?;
            Ok(VertexDiagnostic {
                vertex: v.clone(),
                probability: est.probability,
                error: est.error,
                method: est.method,
            })
        })
        .collect::<Result<_>>()?;
    let argmin = vertices
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.probability.total_cmp(&b.1.probability))
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(DeltaResult {
        delta: (1.0 - vertices[argmin].probability).clamp(0.0, 1.0),
        argmin,
        vertices,
    })
}

/// `delta = 1 − min over vertices of the Ω₁ probability`.
pub fn delta_identity(cfg: &MechanismConfig, d: &DomainSpec, gamma: PartitionParam) -> Result<DeltaResult> {
    delta_identity_with(cfg, d, gamma, &Omega1Options::default())
}

pub fn delta_identity_with(
    cfg: &MechanismConfig,
    d: &DomainSpec,
    gamma: PartitionParam,
    opts: &Omega1Options,
) -> Result<DeltaResult> {
    check_gamma(d, gamma)?;
    delta_from(&vertex_evaluators(cfg, d, opts)?, gamma.gamma)
}

fn check_gamma(d: &DomainSpec, gamma: PartitionParam) -> Result<()> {
    PartitionParam::new(gamma.gamma, d.w_size()).map(|_| ())
}

/// Half of the largest change of one differing coordinate: `b / 2` for
/// identity queries and `b / (2 · divisor)` for averages.
fn check_shift(d: &DomainSpec, half_shift: f64) -> Result<()> {
    let slack = 1.0 - d.eta_bar() - 2.0 * d.eta() - half_shift;
    if slack < -TOLERANCE {
        return Err(Error::InfeasibleDomain(format!(
            "domain too tight for the adjacency radius: 2 eta + eta_bar + b/2 = {} exceeds 1",
            1.0 - slack
        )));
    }
    Ok(())
}

fn second_term(k: f64, half_shift: f64, w_size: usize, gamma: f64) -> f64 {
    let top = 1.0 - (w_size as f64 - 1.0) * gamma;
    k * half_shift * (top.ln() - gamma.ln())
}

/// Beta arguments `(kη, k(1−η̄−η))` and `(k(η+h), k(1−η̄−η−h))`.
fn beta_arguments(k: f64, d: &DomainSpec, half_shift: f64) -> [(f64, f64); 2] {
    let (eta, eta_bar) = (d.eta(), d.eta_bar());
    [
        (k * eta, k * (1.0 - eta_bar - eta)),
        (k * (eta + half_shift), k * (1.0 - eta_bar - eta - half_shift)),
    ]
}

fn epsilon_exact(cfg: &MechanismConfig, d: &DomainSpec, half_shift: f64, gamma: PartitionParam) -> Result<f64> {
    check_gamma(d, gamma)?;
    check_shift(d, half_shift)?;
    let [(a0, b0), (a1, b1)] = beta_arguments(cfg.k(), d, half_shift);
    let first = ln_beta(a0, b0)? - ln_beta(a1, b1)?;
    Ok(first + second_term(cfg.k(), half_shift, d.w_size(), gamma.gamma))
}

fn epsilon_bounded(cfg: &MechanismConfig, d: &DomainSpec, half_shift: f64, gamma: PartitionParam) -> Result<f64> {
    check_gamma(d, gamma)?;
    check_shift(d, half_shift)?;
    let [(a0, b0), (a1, b1)] = beta_arguments(cfg.k(), d, half_shift);
    let (_, ln_upper) = ln_beta_bounds(a0, b0)?;
    let (ln_lower, _) = ln_beta_bounds(a1, b1)?;
    Ok(ln_upper - ln_lower + second_term(cfg.k(), half_shift, d.w_size(), gamma.gamma))
}

/// Closed-form epsilon for identity queries.
pub fn epsilon_identity(
    cfg: &MechanismConfig,
    d: &DomainSpec,
    a: &AdjacencyParams,
    gamma: PartitionParam,
) -> Result<f64> {
    epsilon_exact(cfg, d, a.b() / 2.0, gamma)
}

/// Epsilon with the beta ratio replaced by closed-form bounds (numerator
/// by its upper bound, denominator by its lower bound). Never smaller than
/// [`epsilon_identity`]; refuses when a beta argument is at most one.
pub fn epsilon_identity_approx(
    cfg: &MechanismConfig,
    d: &DomainSpec,
    a: &AdjacencyParams,
    gamma: PartitionParam,
) -> Result<f64> {
    epsilon_bounded(cfg, d, a.b() / 2.0, gamma)
}

/// How the perturbation of an average is scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DivisorConvention {
    /// Divide by the number of averaged vectors.
    #[default]
    CollectionSize,
    /// Divide by the vector dimension `n`.
    Dimension,
}

impl DivisorConvention {
    pub fn divisor(self, d: &DomainSpec, collection_size: usize) -> f64 {
        match self {
            DivisorConvention::CollectionSize => collection_size as f64,
            DivisorConvention::Dimension => d.n() as f64,
        }
    }
}

fn require_collection_size(n: usize) -> Result<()> {
    if n == 0 {
        Err(Error::param("collection_size", "must be at least 1"))
    } else {
        Ok(())
    }
}

/// Epsilon for the average of `collection_size` vectors.
pub fn epsilon_average(
    cfg: &MechanismConfig,
    d: &DomainSpec,
    a: &AdjacencyParams,
    gamma: PartitionParam,
    collection_size: usize,
    convention: DivisorConvention,
) -> Result<f64> {
    require_collection_size(collection_size)?;
    let divisor = convention.divisor(d, collection_size);
    epsilon_exact(cfg, d, a.b() / (2.0 * divisor), gamma)
}

/// Bounded counterpart of [`epsilon_average`].
pub fn epsilon_average_approx(
    cfg: &MechanismConfig,
    d: &DomainSpec,
    a: &AdjacencyParams,
    gamma: PartitionParam,
    collection_size: usize,
    convention: DivisorConvention,
) -> Result<f64> {
    require_collection_size(collection_size)?;
    let divisor = convention.divisor(d, collection_size);
    epsilon_bounded(cfg, d, a.b() / (2.0 * divisor), gamma)
}

/// The first epsilon term at the four candidate maximizers
/// `(p_i, q_i)` ∈ {(η+h, η), (1−η̄−η−h, 1−η̄−η), (η, η+h), (1−η̄−η, 1−η̄−η−h)},
/// i.e. `ln beta(k q_i, k(1−η̄−q_i)) − ln beta(k p_i, k(1−η̄−p_i))`.
pub fn first_term_candidates(cfg: &MechanismConfig, d: &DomainSpec, half_shift: f64) -> Result<[f64; 4]> {
    check_shift(d, half_shift)?;
    let k = cfg.k();
    let (eta, top) = (d.eta(), 1.0 - d.eta_bar());
    let term = |pi: f64, qi: f64| -> Result<f64> {
        Ok(ln_beta(k * qi, k * (top - qi))? - ln_beta(k * pi, k * (top - pi))?)
    };
    let far = top - eta;
    Ok([
        term(eta + half_shift, eta)?,
        term(far - half_shift, far)?,
        term(eta, eta + half_shift)?,
        term(far, far - half_shift)?,
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaCalibration {
    pub gamma: PartitionParam,
    /// Smallest vertex `Ω₁` probability at `gamma`.
    pub min_probability: f64,
    /// False when the cap `1/|W|` already satisfies the constraint.
    pub binding: bool,
}

/// Largest `gamma` whose smallest vertex `Ω₁` probability is at least
/// `1 − delta_hat`, found by bisection on `[GAMMA_FLOOR, 1/|W|]`.
pub fn calibrate_gamma(cfg: &MechanismConfig, d: &DomainSpec, delta_hat: f64) -> Result<GammaCalibration> {
    calibrate_gamma_with(cfg, d, delta_hat, &Omega1Options::default())
}

pub fn calibrate_gamma_with(
    cfg: &MechanismConfig,
    d: &DomainSpec,
    delta_hat: f64,
    opts: &Omega1Options,
) -> Result<GammaCalibration> {
    if !(delta_hat > 0.0 && delta_hat < 1.0) {
        return Err(Error::param("delta_hat", format!("must lie in (0, 1), got {delta_hat}")));
    }
    let evaluators = vertex_evaluators(cfg, d, opts)?;
    let target = 1.0 - delta_hat;
    let min_prob = |g: f64| -> Result<f64> {
        let probs: Vec<f64> = evaluators
            .par_iter()
            .map(|(_, ev)| ev.probability(g).map(|e| e.probability))
            .collect::<Result<_>>()?;
        Ok(probs.into_iter().fold(f64::INFINITY, f64::min))
    };
    let w = d.w_size();
    debug_assert!(evaluators.iter().all(|(_, e)| e.w_size().is_none_or(|m| m == w)));
    let cap = 1.0 / w as f64;
    let at_cap = min_prob(cap)?;
    if at_cap >= target {
        return Ok(GammaCalibration {
            gamma: PartitionParam::new(cap, w)?,
            min_probability: at_cap,
            binding: false,
        });
    }
    let mut lo = GAMMA_FLOOR;
    let mut lo_prob = min_prob(lo)?;
    if lo_prob < target {
        return Err(Error::CalibrationInfeasible(format!(
            "even gamma = {GAMMA_FLOOR:e} leaves Ω₂ probability {} above delta_hat = {delta_hat}",
            1.0 - lo_prob
        )));
    }
    let mut hi = cap;
    while hi - lo > GAMMA_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        let p = min_prob(mid)?;
        if p >= target {
            lo = mid;
            lo_prob = p;
        } else {
            hi = mid;
        }
    }
    Ok(GammaCalibration {
        gamma: PartitionParam::new(lo, w)?,
        min_probability: lo_prob,
        binding: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum QueryKind {
    Identity,
    Average { collection_size: usize },
}

/// Either a target `delta_hat` (gamma is calibrated) or an explicit gamma.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaChoice {
    DeltaHat(f64),
    Gamma(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportDiagnostics {
    pub vertices: Vec<VertexDiagnostic>,
    pub argmin: usize,
    /// Target of the calibration, when gamma was calibrated.
    pub delta_hat: Option<f64>,
    /// Whether `delta_hat` was binding (false when gamma hit its cap).
    pub binding: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivacyReport {
    pub epsilon: f64,
    /// Bounded epsilon; `None` where a beta argument is at most one.
    pub epsilon_approx: Option<f64>,
    pub delta: f64,
    pub gamma: PartitionParam,
    pub query: QueryKind,
    pub divisor_convention: DivisorConvention,
    pub k: f64,
    pub b: f64,
    pub domain: DomainSpec,
    pub diagnostics: ReportDiagnostics,
}

impl PrivacyReport {
    /// Largest total change of the two differing coordinates between the
    /// adjacent mechanism inputs this report covers.
    pub fn effective_radius(&self) -> f64 {
        match self.query {
            QueryKind::Identity => self.b,
            QueryKind::Average { collection_size } => {
                self.b / self.divisor_convention.divisor(&self.domain, collection_size)
            }
        }
    }
}

/// Epsilon, delta and diagnostics for one query.
pub fn privacy_report(
    cfg: &MechanismConfig,
    d: &DomainSpec,
    a: &AdjacencyParams,
    query: QueryKind,
    choice: GammaChoice,
    convention: DivisorConvention,
) -> Result<PrivacyReport> {
    privacy_report_with(cfg, d, a, query, choice, convention, &Omega1Options::default())
}

pub fn privacy_report_with(
    cfg: &MechanismConfig,
    d: &DomainSpec,
    a: &AdjacencyParams,
    query: QueryKind,
    choice: GammaChoice,
    convention: DivisorConvention,
    opts: &Omega1Options,
) -> Result<PrivacyReport> {
    let (gamma, delta_hat, binding) = match choice {
        GammaChoice::DeltaHat(dh) => {
            let cal = calibrate_gamma_with(cfg, d, dh, opts)?;
            (cal.gamma, Some(dh), Some(cal.binding))
        }
        GammaChoice::Gamma(g) => (PartitionParam::new(g, d.w_size())?, None, None),
    };
    let delta = delta_identity_with(cfg, d, gamma, opts)?;
    let (epsilon, epsilon_approx) = match query {
        QueryKind::Identity => (
            epsilon_identity(cfg, d, a, gamma)?,
            epsilon_identity_approx(cfg, d, a, gamma).ok(),
        ),
        QueryKind::Average { collection_size } => (
            epsilon_average(cfg, d, a, gamma, collection_size, convention)?,
            epsilon_average_approx(cfg, d, a, gamma, collection_size, convention).ok(),
        ),
    };
    Ok(PrivacyReport {
        epsilon,
        epsilon_approx,
        delta: delta.delta,
        gamma,
        query,
        divisor_convention: convention,
        k: cfg.k(),
        b: a.b(),
        domain: d.clone(),
        diagnostics: ReportDiagnostics {
            vertices: delta.vertices,
            argmin: delta.argmin,
            delta_hat,
            binding,
        },
    })
}
