use std::fs;
use std::io::Write;
use std::path::Path;

use dirichlet_core::accounting::{calibrate_gamma, epsilon_identity, epsilon_identity_approx};
use dirichlet_core::empirical::{
    average_query_domain, random_adjacent_pair, read_collection_csv, AverageExperiment, AverageExperimentSpec,
    AuditResult, AVERAGE_QUERY_FIXTURE,
};
use dirichlet_core::{
    audit_pair, privacy_report, run_average_experiment, sample_many, AdjacencyParams, AuditConfig, DomainSpec,
    ExecutionMode, GammaChoice, MechanismConfig, PrivacyReport, QueryKind, RngSeed, SimplexVector,
};
use serde::Serialize;

use crate::args::{AuditArgs, CurvesArgs, QueryArg, ReplayArgs, SampleArgs, SimulateArgs};
use crate::error::CliError;
use crate::manifest::{now, read_manifest, sha256_hex, ArtifactSink, RunManifest, SCHEMA_VERSION};

pub const CURVES_HEADER: [&str; 4] = ["delta", "gamma", "epsilon_exact", "epsilon_approx"];
pub const AUDIT_HEADER: [&str; 10] = [
    "samples",
    "omega1_count",
    "empirical_delta",
    "delta_lower",
    "delta_upper",
    "confidence",
    "max_observed_loss",
    "loss_violations",
    "epsilon",
    "underflow_redraws",
];
pub const OUTPUTS_HEADER_PREFIX: [&str; 2] = ["arm", "run"];
pub const SUMMARY_HEADER_PREFIX: [&str; 2] = ["arm", "statistic"];

fn mode(parallel: bool) -> ExecutionMode {
    if parallel {
        ExecutionMode::Parallel
    } else {
        ExecutionMode::Sequential
    }
}

fn manifest<T: Serialize>(command: &str, params: &T, seed: Option<u64>, started_at: String) -> Result<RunManifest, CliError> {
    Ok(RunManifest {
        schema_version: SCHEMA_VERSION,
        command: command.to_string(),
        parameters: serde_json::to_value(params)?,
        seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        started_at,
        finished_at: String::new(),
        fixture_sha256: None,
        artifacts: Vec::new(),
    })
}

fn csv_bytes<F>(fill: F) -> Result<Vec<u8>, CliError>
where
    F: FnOnce(&mut csv::Writer<&mut Vec<u8>>) -> Result<(), CliError>,
{
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        fill(&mut w)?;
        w.flush().map_err(|e| CliError::io(Path::new("<csv>"), e))?;
    }
    Ok(buf)
}

fn indexed(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (0..n).map(move |i| format!("{prefix}{i}"))
}

fn emit(sink: &mut ArtifactSink, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    if sink.enabled() {
        sink.write(name, bytes)
    } else {
        std::io::stdout()
            .write_all(bytes)
            .map_err(|e| CliError::io(Path::new("<stdout>"), e))
    }
}

fn audit_report(args: &AuditArgs) -> Result<(MechanismConfig, PrivacyReport), CliError> {
    let cfg = MechanismConfig::new(args.k)?;
    let d = DomainSpec::new(args.n, args.w_indices.clone(), args.eta, args.eta_bar)?;
    let a = AdjacencyParams::new(args.b)?;
    let query = match (args.query, args.collection_size) {
        (QueryArg::Identity, _) => QueryKind::Identity,
        (QueryArg::Average, Some(collection_size)) => QueryKind::Average { collection_size },
        (QueryArg::Average, None) => return Err(CliError::Usage("--query average requires --N".into())),
    };
    let choice = match (args.delta_hat, args.gamma) {
        (Some(dh), None) => GammaChoice::DeltaHat(dh),
        (None, Some(g)) => GammaChoice::Gamma(g),
        _ => return Err(CliError::Usage("exactly one of --delta-hat and --gamma is required".into())),
    };
    let report = privacy_report(&cfg, &d, &a, query, choice, args.divisor.into())?;
    Ok((cfg, report))
}

fn audit_csv(r: &AuditResult) -> Result<Vec<u8>, CliError> {
    let dim = r.empirical_mean.dim();
    csv_bytes(|w| {
        let header: Vec<String> = AUDIT_HEADER
            .iter()
            .map(|s| s.to_string())
            .chain(indexed("mean_", dim))
            .chain(indexed("variance_", dim))
            .collect();
        w.write_record(&header)?;
        let ci = &r.empirical_delta;
        let mut row = vec![
            r.samples.to_string(),
            r.omega1_count.to_string(),
            ci.estimate.to_string(),
            ci.lower.to_string(),
            ci.upper.to_string(),
            ci.confidence.to_string(),
            r.max_observed_loss.map(|v| v.to_string()).unwrap_or_default(),
            r.loss_violations.to_string(),
            r.epsilon.to_string(),
            r.underflow_redraws.to_string(),
        ];
        row.extend(r.empirical_mean.entries().iter().map(f64::to_string));
        row.extend(r.empirical_variance.iter().map(f64::to_string));
        w.write_record(&row)?;
        Ok(())
    })
}

pub fn run_audit(args: &AuditArgs, out_dir: Option<&Path>) -> Result<(), CliError> {
    let started = now();
    let mut sink = ArtifactSink::new(out_dir)?;
    let (cfg, report) = audit_report(args)?;
    let json = serde_json::to_string_pretty(&report)? + "\n";
    std::io::stdout()
        .write_all(json.as_bytes())
        .map_err(|e| CliError::io(Path::new("<stdout>"), e))?;
    sink.write("report.json", json.as_bytes())?;
    if args.empirical {
        let (p, q) = match (&args.p, &args.q) {
            (Some(p), Some(q)) => (SimplexVector::new(p.clone())?, SimplexVector::new(q.clone())?),
            _ => {
                let mut rng = RngSeed::new(args.seed, 1).rng();
                random_adjacent_pair(&report.domain, report.effective_radius(), &mut rng)?
            }
        };
        let ac = AuditConfig::new(args.samples, RngSeed::new(args.seed, 0), args.confidence)?.with_mode(mode(args.parallel));
        let result = audit_pair(&cfg, &p, &q, &report, &ac)?;
        eprintln!(
            "audit: empirical delta {} (upper {:.6}), loss violations {}, max loss {}",
            result.empirical_delta.estimate,
            result.empirical_delta.upper,
            result.loss_violations,
            result.max_observed_loss.map(|v| v.to_string()).unwrap_or_else(|| "-".into())
        );
        let bytes = audit_csv(&result)?;
        if sink.enabled() {
            sink.write("audit.csv", &bytes)?;
        } else {
            std::io::stderr()
                .write_all(&bytes)
                .map_err(|e| CliError::io(Path::new("<stderr>"), e))?;
        }
    }
    sink.finish(manifest("audit", args, Some(args.seed), started)?)
}

pub fn curves_csv(args: &CurvesArgs) -> Result<Vec<u8>, CliError> {
    let cfg = MechanismConfig::new(args.k)?;
    let d = DomainSpec::new(args.w_size + 1, (0..args.w_size).collect(), args.eta, args.eta_bar)?;
    let a = AdjacencyParams::new(args.b)?;
    let mut rows = Vec::new();
    for delta in args.delta_grid.points() {
        let cal = calibrate_gamma(&cfg, &d, delta)?;
        let exact = epsilon_identity(&cfg, &d, &a, cal.gamma)?;
        let approx = epsilon_identity_approx(&cfg, &d, &a, cal.gamma).ok();
        rows.push([
            delta.to_string(),
            cal.gamma.gamma().to_string(),
            exact.to_string(),
            approx.map(|v| v.to_string()).unwrap_or_default(),
        ]);
    }
    csv_bytes(|w| {
        w.write_record(CURVES_HEADER)?;
        for r in &rows {
            w.write_record(r)?;
        }
        Ok(())
    })
}

pub fn run_curves(args: &CurvesArgs, out_dir: Option<&Path>) -> Result<(), CliError> {
    let started = now();
    let mut sink = ArtifactSink::new(out_dir)?;
    let bytes = curves_csv(args)?;
    emit(&mut sink, "curves.csv", &bytes)?;
    sink.finish(manifest("curves", args, None, started)?)
}

pub fn run_sample(args: &SampleArgs, out_dir: Option<&Path>) -> Result<(), CliError> {
    let started = now();
    let mut sink = ArtifactSink::new(out_dir)?;
    let cfg = MechanismConfig::new(args.k)?;
    let p = SimplexVector::new(args.p.clone())?;
    let draws = sample_many(&cfg, &p, RngSeed::new(args.seed, 0), args.count, mode(args.parallel))?;
    let bytes = csv_bytes(|w| {
        w.write_record(indexed("x", p.dim()))?;
        for x in &draws {
            w.write_record(x.entries().iter().map(f64::to_string))?;
        }
        Ok(())
    })?;
    emit(&mut sink, "samples.csv", &bytes)?;
    sink.finish(manifest("sample", args, Some(args.seed), started)?)
}

fn experiment_tables(e: &AverageExperiment) -> Result<(Vec<u8>, Vec<u8>), CliError> {
    let dim = e.p_summary.average.dim();
    let outputs = csv_bytes(|w| {
        w.write_record(OUTPUTS_HEADER_PREFIX.iter().map(|s| s.to_string()).chain(indexed("x", dim)))?;
        for (arm, xs) in [("P", &e.p_outputs), ("Q", &e.q_outputs)] {
            for (run, x) in xs.iter().enumerate() {
                let row = [arm.to_string(), run.to_string()]
                    .into_iter()
                    .chain(x.entries().iter().map(f64::to_string));
                w.write_record(row)?;
            }
        }
        Ok(())
    })?;
    let summary = csv_bytes(|w| {
        w.write_record(SUMMARY_HEADER_PREFIX.iter().map(|s| s.to_string()).chain(indexed("x", dim)))?;
        for (arm, s) in [("P", &e.p_summary), ("Q", &e.q_summary)] {
            let stats: [(&str, &[f64]); 4] = [
                ("average", s.average.entries()),
                ("mean", &s.mean),
                ("variance", &s.variance),
                ("expected_variance", &s.expected_variance),
            ];
            for (name, values) in stats {
                let row = [arm.to_string(), name.to_string()]
                    .into_iter()
                    .chain(values.iter().map(f64::to_string));
                w.write_record(row)?;
            }
        }
        Ok(())
    })?;
    Ok((outputs, summary))
}

pub fn run_simulate(args: &SimulateArgs, out_dir: Option<&Path>) -> Result<(), CliError> {
    let started = now();
    let mut sink = ArtifactSink::new(out_dir)?;
    let mut recorded = args.clone();
    let bytes = match &args.fixture {
        Some(path) => {
            recorded.fixture = Some(fs::canonicalize(path).map_err(|e| CliError::io(path, e))?);
            fs::read(path).map_err(|e| CliError::io(path, e))?
        }
        None => AVERAGE_QUERY_FIXTURE.as_bytes().to_vec(),
    };
    let hash = sha256_hex(&bytes);
    if let Some(expected) = &args.fixture_sha256 {
        if !expected.eq_ignore_ascii_case(&hash) {
            return Err(CliError::FixtureMismatch {
                expected: expected.clone(),
                found: hash,
            });
        }
    }
    let collection = read_collection_csv(bytes.as_slice())?;
    let mut spec = AverageExperimentSpec::new(args.k, args.runs, RngSeed::new(args.seed, 0));
    spec.b = args.b;
    spec.mode = mode(args.parallel);
    let experiment = run_average_experiment(&spec, &collection, &average_query_domain())?;
    let (outputs, summary) = experiment_tables(&experiment)?;
    sink.write("outputs.csv", &outputs)?;
    emit(&mut sink, "summary.csv", &summary)?;
    let mut m = manifest("simulate", &recorded, Some(args.seed), started)?;
    m.fixture_sha256 = Some(hash);
    sink.finish(m)
}

pub fn run_replay(args: &ReplayArgs) -> Result<(), CliError> {
    let m = read_manifest(&args.manifest)?;
    let out = args.output.out_dir.as_deref();
    if out.is_none() {
        return Err(CliError::Usage("replay requires --out-dir".into()));
    }
    let params = m.parameters.clone();
    match m.command.as_str() {
        "audit" => run_audit(&serde_json::from_value(params)?, out),
        "curves" => run_curves(&serde_json::from_value(params)?, out),
        "sample" => run_sample(&serde_json::from_value(params)?, out),
        "simulate" => {
            let mut a: SimulateArgs = serde_json::from_value(params)?;
            if a.fixture_sha256.is_none() {
                a.fixture_sha256 = m.fixture_sha256.clone();
            }
            run_simulate(&a, out)
        }
        other => Err(CliError::Usage(format!("manifest records unknown command `{other}`"))),
    }
}
