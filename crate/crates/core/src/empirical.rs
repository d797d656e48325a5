//! Monte-Carlo auditing of reported privacy parameters and the average-query
//! experiment.

use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::accounting::{omega1_probability, PartitionParam, PrivacyReport};
use crate::error::{Error, Result};
use crate::mechanism::{privacy_loss, sample_many, DirichletSampler, MechanismConfig};
use crate::rng::{map_chunks, ExecutionMode, RngSeed};
use crate::simplex::{
    are_b_adjacent, average, collection_adjacency, with_remainder, AdjacencyParams, Collection,
    CollectionAdjacency, DomainSpec, SimplexVector,
};

/// Smallest audit size accepted by [`AuditConfig::new`].
pub const MIN_AUDIT_SAMPLES: usize = 1000;
/// Losses above `epsilon + LOSS_TOLERANCE` count as violations.
pub const LOSS_TOLERANCE: f64 = 1e-9;
/// Slack below which the log-concavity probe fails.
pub const LOGCONCAVITY_TOLERANCE: f64 = 1e-7;

const AUDIT_CHUNK: usize = 4096;

/// The shipped 100-member collection used by the average-query experiment.
pub const AVERAGE_QUERY_FIXTURE: &str = include_str!("../fixtures/average_query_collection.csv");

/// The domain the shipped collection lies in: `n = 3`, `W = {0, 1}`,
/// `eta = eta_bar = 0.05`.
pub fn average_query_domain() -> DomainSpec {
    DomainSpec::new(3, vec![0, 1], 0.05, 0.05).expect("valid constant domain")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    samples: usize,
    seed: RngSeed,
    confidence: f64,
    mode: ExecutionMode,
}

impl AuditConfig {
    pub fn new(samples: usize, seed: RngSeed, confidence: f64) -> Result<Self> {
        if samples < MIN_AUDIT_SAMPLES {
            return Err(Error::param(
                "samples",
                format!("at least {MIN_AUDIT_SAMPLES} samples are required, got {samples}"),
            ));
        }
        if !(confidence > 0.0 && confidence < 1.0) {
            return Err(Error::param("confidence", format!("must lie in (0, 1), got {confidence}")));
        }
        Ok(AuditConfig {
            samples,
            seed,
            confidence,
            mode: ExecutionMode::Sequential,
        })
    }

    pub fn with_mode(mut self, mode: ExecutionMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn seed(&self) -> RngSeed {
        self.seed
    }

    pub fn confidence(&self) -> f64 {
        self.confidence
    }

    pub fn mode(&self) -> ExecutionMode {
        self.mode
    }
}

/// A binomial proportion with a two-sided confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinomialInterval {
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub confidence: f64,
}

/// Normal-approximation interval with continuity correction.
pub fn binomial_interval(successes: u64, trials: u64, confidence: f64) -> Result<BinomialInterval> {
    if trials == 0 || successes > trials {
        return Err(Error::param(
            "trials",
            format!("need 0 <= successes <= trials and trials > 0, got {successes}/{trials}"),
        ));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::param("confidence", format!("must lie in (0, 1), got {confidence}")));
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z = Normal::standard().inverse_cdf(0.5 + 0.5 * confidence);
    let half = z * (p * (1.0 - p) / n).sqrt() + 0.5 / n;
    Ok(BinomialInterval {
        estimate: p,
        lower: (p - half).max(0.0),
        upper: (p + half).min(1.0),
        confidence,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditResult {
    pub samples: usize,
    /// Fraction of outputs in `Ω₂`.
    pub empirical_delta: BinomialInterval,
    pub omega1_count: u64,
    /// Largest privacy loss seen over outputs in `Ω₁`; `None` when no
    /// output landed there.
    pub max_observed_loss: Option<f64>,
    pub loss_violations: u64,
    pub epsilon: f64,
    pub empirical_mean: SimplexVector,
    pub empirical_variance: Vec<f64>,
    pub underflow_redraws: u64,
}

/// Running count, mean and centred second moment per coordinate.
#[derive(Debug, Clone)]
struct Moments {
    count: f64,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl Moments {
    fn new(dim: usize) -> Self {
        Moments {
            count: 0.0,
            mean: vec![0.0; dim],
            m2: vec![0.0; dim],
        }
    }

    fn push(&mut self, x: &[f64]) {
        self.count += 1.0;
        for ((m, s), &v) in self.mean.iter_mut().zip(&mut self.m2).zip(x) {
            let d = v - *m;
            *m += d / self.count;
            *s += d * (v - *m);
        }
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0.0 {
            return;
        }
        let total = self.count + other.count;
        for i in 0..self.mean.len() {
            let d = other.mean[i] - self.mean[i];
            self.mean[i] += d * other.count / total;
            self.m2[i] += other.m2[i] + d * d * self.count * other.count / total;
        }
        self.count = total;
    }

    /// Unbiased sample variance.
    fn variance(&self) -> Vec<f64> {
        let denom = (self.count - 1.0).max(1.0);
        self.m2.iter().map(|s| s / denom).collect()
    }

    fn mean_vector(&self) -> SimplexVector {
        let total: f64 = self.mean.iter().sum();
        SimplexVector::from_normalized(self.mean.iter().map(|v| v / total).collect())
    }
}

struct ChunkTally {
    omega1: u64,
    max_loss: Option<f64>,
    violations: u64,
    moments: Moments,
    redraws: u64,
}

/// Samples the mechanism at `p`, estimates the `Ω₂` probability and checks
/// every `Ω₁` output's privacy loss against the pair `(p, q)` against the
/// reported epsilon.
pub fn audit_pair(
    cfg: &MechanismConfig,
    p: &SimplexVector,
    q: &SimplexVector,
    report: &PrivacyReport,
    ac: &AuditConfig,
) -> Result<AuditResult> {
    let d = &report.domain;
    let radius = AdjacencyParams::new(report.effective_radius().min(1.0))?;
    if !are_b_adjacent(p, q, d, &radius)? {
        return Err(Error::NotAdjacent(format!(
            "inputs are not {}-adjacent on W = {:?}",
            radius.b(),
            d.w()
        )));
    }
    let gamma = report.gamma.gamma();
    let epsilon = report.epsilon;
    let sampler = DirichletSampler::new(cfg, p)?;
    let dim = p.dim();
    let tallies = map_chunks(ac.samples, AUDIT_CHUNK, ac.seed, ac.mode, |_, len, rng| {
        let mut s = sampler.clone();
        let mut tally = ChunkTally {
            omega1: 0,
            max_loss: None,
            violations: 0,
            moments: Moments::new(dim),
            redraws: 0,
        };
        let mut buf = vec![0.0; dim];
        for _ in 0..len {
            s.draw_into(rng, &mut buf);
            tally.moments.push(&buf);
            if d.w().iter().all(|&i| buf[i] >= gamma) {
                tally.omega1 += 1;
                let x = SimplexVector::from_normalized(buf.clone());
                let loss = privacy_loss(cfg, p, q, &x)?;
                tally.max_loss = Some(tally.max_loss.map_or(loss, |m: f64| m.max(loss)));
                if loss > epsilon + LOSS_TOLERANCE {
                    tally.violations += 1;
                }
            }
        }
        tally.redraws = s.underflow_redraws();
        Ok(tally)
    });
    let mut omega1 = 0;
    let mut max_loss: Option<f64> = None;
    let mut violations = 0;
    let mut moments = Moments::new(dim);
    let mut redraws = 0;
    for t in tallies {
        let t: ChunkTally = t?;
        omega1 += t.omega1;
        max_loss = match (max_loss, t.max_loss) {
            (Some(a), Some(b)) => Some(a.max(b)),
            (a, b) => a.or(b),
        };
        violations += t.violations;
        moments.merge(&t.moments);
        redraws += t.redraws;
    }
    let n = ac.samples as u64;
    Ok(AuditResult {
        samples: ac.samples,
        empirical_delta: binomial_interval(n - omega1, n, ac.confidence)?,
        omega1_count: omega1,
        max_observed_loss: max_loss,
        loss_violations: violations,
        epsilon,
        empirical_mean: moments.mean_vector(),
        empirical_variance: moments.variance(),
        underflow_redraws: redraws,
    })
}

/// Parameters of the average-query experiment. The neighbouring collection
/// moves `b / 2` of mass in member `member` from coordinate `decrease` to
/// coordinate `increase`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AverageExperimentSpec {
    pub k: f64,
    pub runs: usize,
    pub b: f64,
    pub member: usize,
    pub increase: usize,
    pub decrease: usize,
    pub seed: RngSeed,
    pub mode: ExecutionMode,
}

impl AverageExperimentSpec {
    /// Defaults matching the shipped fixture: `b = 1`, member 0, mass moved
    /// from the last coordinate to the second.
    pub fn new(k: f64, runs: usize, seed: RngSeed) -> Self {
        AverageExperimentSpec {
            k,
            runs,
            b: 1.0,
            member: 0,
            increase: 1,
            decrease: 2,
            seed,
            mode: ExecutionMode::Sequential,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    pub average: SimplexVector,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    /// `p_i (1 − p_i) / (k + 1)` at the arm's average.
    pub expected_variance: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AverageExperiment {
    pub spec: AverageExperimentSpec,
    pub neighbour: Collection,
    pub p_outputs: Vec<SimplexVector>,
    pub q_outputs: Vec<SimplexVector>,
    pub p_summary: ArmSummary,
    pub q_summary: ArmSummary,
}

fn summarize(cfg: &MechanismConfig, avg: SimplexVector, outputs: &[SimplexVector]) -> ArmSummary {
    let mut m = Moments::new(avg.dim());
    for x in outputs {
        m.push(x.entries());
    }
    let k = cfg.k();
    ArmSummary {
        expected_variance: avg.entries().iter().map(|p| p * (1.0 - p) / (k + 1.0)).collect(),
        average: avg,
        mean: m.mean.clone(),
        variance: m.variance(),
    }
}

/// Builds the neighbouring collection and runs the mechanism `runs` times on
/// the averages of both collections.
pub fn run_average_experiment(
    spec: &AverageExperimentSpec,
    collection: &Collection,
    d: &DomainSpec,
) -> Result<AverageExperiment> {
    let cfg = MechanismConfig::new(spec.k)?;
    if spec.runs == 0 {
        return Err(Error::param("runs", "must be at least 1"));
    }
    collection.check_domain(d)?;
    let a = AdjacencyParams::new(spec.b)?;
    let base = collection
        .members()
        .get(spec.member)
        .ok_or_else(|| Error::param("member", format!("no member {} in a collection of {}", spec.member, collection.len())))?;
    let (i, j) = (spec.increase, spec.decrease);
    if i == j || i >= base.dim() || j >= base.dim() {
        return Err(Error::param("increase/decrease", format!("invalid coordinate pair ({i}, {j})")));
    }
    let mut moved = base.entries().to_vec();
    let half = spec.b / 2.0;
    moved[i] += half;
    moved[j] -= half;
    let neighbour = collection.with_member(spec.member, SimplexVector::new(moved)?)?;
    neighbour.check_domain(d)?;
    if !matches!(collection_adjacency(collection, &neighbour, &a)?, CollectionAdjacency::Adjacent(_)) {
        return Err(Error::NotAdjacent("perturbed collection is not adjacent to the original".into()));
    }
    let avg_p = average(collection);
    let avg_q = average(&neighbour);
    let p_outputs = sample_many(&cfg, &avg_p, spec.seed.with_stream(0), spec.runs, spec.mode)?;
    let q_outputs = sample_many(&cfg, &avg_q, spec.seed.with_stream(1), spec.runs, spec.mode)?;
    Ok(AverageExperiment {
        spec: *spec,
        p_summary: summarize(&cfg, avg_p, &p_outputs),
        q_summary: summarize(&cfg, avg_q, &q_outputs),
        neighbour,
        p_outputs,
        q_outputs,
    })
}

/// Reads a collection from CSV with a header row and one member per row.
pub fn read_collection_csv<R: Read>(reader: R) -> Result<Collection> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let mut members = Vec::new();
    for (row, record) in rdr.deserialize::<Vec<f64>>().enumerate() {
        let entries = record.map_err(|e| Error::Input(format!("row {}: {e}", row + 1)))?;
        let v = SimplexVector::new(entries).map_err(|e| Error::Input(format!("row {}: {e}", row + 1)))?;
        members.push(v);
    }
    Collection::new(members)
}

/// Writes a collection as CSV with columns `x0, x1, ...`.
pub fn write_collection_csv<W: Write>(writer: W, c: &Collection) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Input(e.to_string());
    w.write_record((0..c.dim()).map(|i| format!("x{i}"))).map_err(io)?;
    for m in c.members() {
        w.write_record(m.entries().iter().map(|v| format!("{v:.6}"))).map_err(io)?;
    }
    w.flush().map_err(|e| Error::Input(e.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogConcavityResult {
    pub passed: bool,
    /// Smallest `P(midpoint) − sqrt(P(u) P(v))` observed.
    pub worst_slack: f64,
    pub trials: usize,
}

/// Midpoint log-concavity check of the `Ω₁` probability over the projected
/// domain.
pub fn logconcavity_probe(
    cfg: &MechanismConfig,
    d: &DomainSpec,
    gamma: PartitionParam,
    trials: usize,
    seed: RngSeed,
) -> Result<LogConcavityResult> {
    logconcavity_probe_with(d, trials, seed, |y| {
        omega1_probability(cfg, &with_remainder(y), gamma.gamma()).map(|e| e.probability)
    })
}

/// [`logconcavity_probe`] for an arbitrary function of the projected point.
pub fn logconcavity_probe_with<F>(d: &DomainSpec, trials: usize, seed: RngSeed, f: F) -> Result<LogConcavityResult>
where
    F: Fn(&[f64]) -> Result<f64>,
{
    let mut rng = seed.rng();
    let mut worst = f64::INFINITY;
    for _ in 0..trials {
        let u = d.sample_projected(&mut rng);
        let v = d.sample_projected(&mut rng);
        let mid: Vec<f64> = u.iter().zip(&v).map(|(a, b)| 0.5 * (a + b)).collect();
        let slack = f(&mid)? - (f(&u)? * f(&v)?).sqrt();
        worst = worst.min(slack);
    }
    if trials == 0 {
        worst = 0.0;
    }
    Ok(LogConcavityResult {
        passed: worst >= -LOGCONCAVITY_TOLERANCE,
        worst_slack: worst,
        trials,
    })
}

/// Uniformly random pair `(p, q)` in the domain that differs in two `W`
/// coordinates by a total of exactly `radius` (or less, if the domain is too
/// narrow at `p`).
pub fn random_adjacent_pair<R: Rng + ?Sized>(
    d: &DomainSpec,
    radius: f64,
    rng: &mut R,
) -> Result<(SimplexVector, SimplexVector)> {
    if d.w_size() < 2 {
        return Err(Error::InfeasibleDomain("adjacent pairs need |W| >= 2".into()));
    }
    let y = d.sample_projected(rng);
    let p = d.lift(&y)?;
    let m = d.w_size();
    let a = rng.random_range(0..m);
    let mut b = rng.random_range(0..m - 1);
    if b >= a {
        b += 1;
    }
    let (i, j) = (d.w()[a], d.w()[b]);
    // moving mass within W leaves the W-sum unchanged; only x_j >= eta binds
    let shift = (0.5 * radius).min(p[j] - d.eta());
    let mut q = p.entries().to_vec();
    q[i] += shift;
    q[j] -= shift;
    Ok((p, SimplexVector::new(q)?))
}
