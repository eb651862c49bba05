//! The subcommands. Each returns its report lines; failures carry the exit
//! code they map to.

use std::fmt;
use std::fs;
use std::path::Path;

use serde::Serialize;

use super::config::JobConfig;
use crate::arith::{factorize, inner_mu_sum, log_integral, pair_coefficient, primes_in_range, Progression, Rational};
use crate::bounds::{bounds_table, residual_report, Envelope, EnvelopeReport};
use crate::constants::{
    backend_agreement, c_constant, e_constant, AgreementRow, Backend, ConstantsError,
    DegreeModel, DensityEstimate, Kind, SplitSample, MIN_SAMPLE,
};
use crate::curve::{reduce_curve, Reduction};
use crate::scan::io::{load_checkpoints, load_config, load_records, run_job, write_atomic};
use crate::scan::{
    compute_record, exponent_identity_check, inclusion_exclusion_check, run_scan, Accumulator,
    MemorySink, ScanError, Snapshot,
};
use crate::structure::{structure_by_enumeration, PrimeRecord};

/// Largest prime checked against the enumeration oracle.
pub const ORACLE_LIMIT: u64 = 2000;
/// Range of the `sum_{de | m} mu(d)/e = 1/m` check.
pub const ONE_OVER_M_LIMIT: u64 = 10_000;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or arguments: exit 2.
    Config(String),
    /// A verification check failed: exit 1.
    Verify(String),
    /// Anything else that stopped the command: exit 1.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Verify(_) | CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Verify(m) => write!(f, "verification failed: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

impl From<ScanError> for CliError {
    fn from(e: ScanError) -> Self {
        match e {
            ScanError::Config(_) | ScanError::Arith(_) | ScanError::Curve(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<ConstantsError> for CliError {
    fn from(e: ConstantsError) -> Self {
        match e {
            ConstantsError::Infeasible { .. } | ConstantsError::Domain(_) => {
                CliError::Config(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    write_atomic(path, text.as_bytes()).map_err(|e| CliError::Runtime(e.to_string()))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

pub fn cmd_scan(job: &JobConfig, halt_at: Option<u64>) -> Result<Vec<String>, CliError> {
    let out = run_job(&job.scan, &job.out_dir, halt_at)?;
    let acc = &out.accumulator;
    let status = if out.completed { "complete" } else { "halted" };
    Ok(vec![
        format!("scan {status} at x = {} in {}", out.last_x, job.out_dir.display()),
        format!(
            "primes {}  cyclic {}  exponent sum {}",
            acc.prime_count, acc.cyclic_count, acc.exponent_sum
        ),
    ])
}

/// Records and checkpoints of a finished scan of this job.
pub struct Dataset {
    pub records: Vec<PrimeRecord>,
    pub snapshots: Vec<Snapshot>,
}

pub fn load_dataset(job: &JobConfig) -> Result<Dataset, CliError> {
    let dir = &job.out_dir;
    let stored = load_config(dir).map_err(|e| {
        CliError::Runtime(format!("no dataset in {} ({e}); run `scan` first", dir.display()))
    })?;
    let s = &job.scan;
    if stored.curve != s.curve || stored.q != s.q || stored.a != s.a || stored.x_max != s.x_max {
        return Err(CliError::Config(format!(
            "dataset in {} was scanned for a different curve, progression or x_max",
            dir.display()
        )));
    }
    let snapshots = load_checkpoints(dir)?;
    if snapshots.last().map(|s| s.x) != Some(s.x_max) {
        return Err(CliError::Runtime(format!(
            "dataset in {} is incomplete; rerun `scan` to resume it",
            dir.display()
        )));
    }
    let records = load_records(dir)?;
    Ok(Dataset { records, snapshots })
}

/// Cyclicity and exponent constants for the job, measured on its holdout
/// where the backend needs data.
pub fn estimate_constants(
    job: &JobConfig,
    records: Option<&[PrimeRecord]>,
) -> Result<(DensityEstimate, DensityEstimate), CliError> {
    let s = &job.scan;
    let model = DegreeModel::for_curve(&s.curve);
    let sample = match (job.backend, records) {
        (Backend::Exact, _) => None,
        (_, Some(recs)) => {
            let (lo, hi) = job.holdout;
            Some(SplitSample::from_records(recs, &s.curve, s.q, s.a, lo, hi)?)
        }
        (_, None) => return Err(ConstantsError::MissingSample.into()),
    };
    let c = c_constant(job.backend, job.truncation, s.q, s.a, &model, sample.as_ref())?;
    let e = e_constant(
        job.backend,
        job.truncation,
        s.q,
        s.a,
        job.exponent_form,
        &model,
        sample.as_ref(),
    )?;
    Ok((c, e))
}

pub fn constants_path(dir: &Path, kind: Kind) -> std::path::PathBuf {
    dir.join(match kind {
        Kind::Cyclicity => "constants_cyclicity.json",
        Kind::Exponent => "constants_exponent.json",
    })
}

pub fn cmd_constants(job: &JobConfig) -> Result<Vec<String>, CliError> {
    let data = if job.backend == Backend::Exact {
        None
    } else {
        Some(load_dataset(job)?)
    };
    let (c, e) = estimate_constants(job, data.as_ref().map(|d| d.records.as_slice()))?;
    let mut lines = Vec::new();
    for est in [&c, &e] {
        write(&constants_path(&job.out_dir, est.kind), &to_json(est))?;
        lines.push(format!(
            "{:?}: {:.8} (M = {}, truncation {:.2e}, statistical {:.2e})",
            est.kind, est.value, est.truncation, est.truncation_bound, est.statistical_error
        ));
    }
    Ok(lines)
}

fn read_constant(dir: &Path, kind: Kind) -> Result<f64, CliError> {
    let path = constants_path(dir, kind);
    let text = fs::read_to_string(&path).map_err(|e| {
        CliError::Runtime(format!("{}: {e}; run `constants` first", path.display()))
    })?;
    let v: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
    v.get("value")
        .and_then(|x| x.as_f64())
        .ok_or_else(|| CliError::Runtime(format!("{}: no numeric `value`", path.display())))
}

fn kind_of(env: Envelope) -> Kind {
    if env.is_exponent() {
        Kind::Exponent
    } else {
        Kind::Cyclicity
    }
}

fn envelope_reports(job: &JobConfig, snapshots: &[Snapshot]) -> Result<Vec<EnvelopeReport>, CliError> {
    let input = job.bounds_input(job.scan.x_max as f64);
    let mut out = Vec::new();
    for &env in &job.envelopes {
        let kind = kind_of(env);
        let constant = read_constant(&job.out_dir, kind)?;
        let report = residual_report(
            snapshots,
            constant,
            kind,
            env,
            &input,
            (job.compare_from, job.scan.x_max),
        )
        .map_err(|e| CliError::Runtime(format!("{}: {e}", env.name())))?;
        out.push(report);
    }
    Ok(out)
}

pub fn cmd_compare(job: &JobConfig) -> Result<Vec<String>, CliError> {
    let snapshots = load_dataset(job)?.snapshots;
    let mut lines = Vec::new();
    for r in envelope_reports(job, &snapshots)? {
        write(&job.out_dir.join(format!("residuals_{}.csv", r.envelope)), &r.to_csv())?;
        write(&job.out_dir.join(format!("envelope_{}.json", r.envelope)), &to_json(&r))?;
        let max_ratio = r.checkpoints.iter().map(|c| c.ratio).fold(0.0, f64::max);
        let slope = r.slope_fit.map_or("none".to_string(), |s| format!("{s:.4}"));
        lines.push(format!(
            "{}: {} checkpoints, max |residual|/envelope {max_ratio:.4}, slope {slope}",
            r.envelope,
            r.checkpoints.len()
        ));
    }
    Ok(lines)
}

pub fn cmd_bounds(job: &JobConfig) -> Result<Vec<String>, CliError> {
    let grid: Vec<f64> = job.grid.iter().map(|&x| x as f64).collect();
    let input = job.bounds_input(grid.first().copied().unwrap_or(16.0));
    let table = bounds_table(&input, &job.envelopes, &grid)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut csv = String::from("x");
    for e in &job.envelopes {
        csv.push(',');
        csv.push_str(e.name());
    }
    csv.push('\n');
    for (x, vals) in &table {
        csv.push_str(&format!("{x}"));
        for v in vals {
            csv.push_str(&format!(",{v:e}"));
        }
        csv.push('\n');
    }
    fs::create_dir_all(&job.out_dir).map_err(|e| CliError::Runtime(e.to_string()))?;
    write(&job.out_dir.join("bounds.csv"), &csv)?;
    Ok(csv.lines().map(String::from).collect())
}

pub fn cmd_export(job: &JobConfig, format: ExportFormat) -> Result<Vec<String>, CliError> {
    let snapshots = load_dataset(job)?.snapshots;
    let env = job
        .envelopes
        .iter()
        .copied()
        .find(|e| !e.is_exponent())
        .ok_or_else(|| CliError::Config("export needs a cyclicity envelope in bounds.envelopes".into()))?;
    let constant = read_constant(&job.out_dir, Kind::Cyclicity)?;
    let input = job.bounds_input(job.scan.x_max as f64);
    let lo = crate::bounds::report::MIN_X;
    let r = residual_report(&snapshots, constant, Kind::Cyclicity, env, &input, (lo, job.scan.x_max))
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let (name, text) = match format {
        ExportFormat::Tsv => ("export.tsv", r.to_tsv()),
        ExportFormat::Csv => ("export.csv", r.to_tsv().replace('\t', ",")),
    };
    let path = job.out_dir.join(name);
    write(&path, &text)?;
    Ok(vec![format!("wrote {} rows to {}", r.checkpoints.len(), path.display())])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum ExportFormat {
    Tsv,
    Csv,
}

/// Outcome of one verification check.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, passed: bool, detail: impl Into<String>) -> Self {
        Check { name, passed, detail: detail.into() }
    }

    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("{tag} {}: {}", self.name, self.detail)
    }
}

/// `(d_p, e_p)` from the scan pipeline against point enumeration for every
/// good prime `p <= limit`. Returns the number of primes compared and the
/// mismatching primes.
pub fn structure_oracle(job: &JobConfig, limit: u64) -> Result<(usize, Vec<u64>), CliError> {
    let s = &job.scan;
    let mut checked = 0;
    let mut bad = Vec::new();
    for p in primes_in_range(2, limit, Progression::all()) {
        let curve = match reduce_curve(&s.curve, p).map_err(ScanError::from)? {
            Reduction::Bad => continue,
            Reduction::Good(c) => c,
        };
        let rec = compute_record(&s.curve, p, s.crossover, s.seed)?
            .ok_or_else(|| CliError::Runtime(format!("{p} reduced but produced no record")))?;
        checked += 1;
        if (rec.dp, rec.ep) != structure_by_enumeration(&curve) {
            bad.push(p);
        }
    }
    Ok((checked, bad))
}

/// Number of `m <= limit` violating `sum_{de | m} mu(d)/e = 1/m` or
/// `sum_{k | m} c(k) = 1/m`.
pub fn one_over_m_failures(limit: u64) -> u64 {
    (1..=limit)
        .filter(|&m| {
            let target = Rational::new(1, m as i128);
            let regrouped: Rational = factorize(m).divisors().into_iter().map(pair_coefficient).sum();
            inner_mu_sum(m) != target || regrouped != target
        })
        .count() as u64
}

fn agreement_detail(rows: &[AgreementRow]) -> String {
    let worst = rows.iter().map(|r| r.sigmas).fold(0.0, f64::max);
    let ms: Vec<String> = rows.iter().map(|r| r.m.to_string()).collect();
    format!("m in [{}], worst {worst:.2} sigma", ms.join(","))
}

/// The full identity and oracle suite on a fresh in-memory scan of the job.
pub fn verify_suite(job: &JobConfig) -> Result<Vec<Check>, CliError> {
    let s = &job.scan;
    let mut sink = MemorySink::default();
    let out = run_scan(s, &mut sink)?;
    let mut checks = Vec::new();

    let ie = inclusion_exclusion_check(&sink.records, &sink.snapshots);
    let worst = ie.rows.iter().map(|r| r.residual.abs()).max().unwrap_or(0);
    checks.push(Check::new(
        "inclusion-exclusion",
        ie.passed(),
        format!("{} checkpoints, max |residual| {worst}", ie.rows.len()),
    ));

    let ex = exponent_identity_check(&sink.records);
    checks.push(Check::new(
        "exponent identity",
        ex.passed(),
        format!("{} records, sum e_p = {}", ex.records, ex.exponent_sum),
    ));

    let (n, bad) = structure_oracle(job, ORACLE_LIMIT.min(s.x_max))?;
    checks.push(Check::new(
        "structure oracle",
        bad.is_empty() && n > 0,
        format!("{n} primes, mismatches {bad:?}"),
    ));

    let fails = one_over_m_failures(ONE_OVER_M_LIMIT);
    checks.push(Check::new(
        "1/m coefficients",
        fails == 0,
        format!("m <= {ONE_OVER_M_LIMIT}, {fails} failures"),
    ));

    let (lo, hi) = job.holdout;
    let model = DegreeModel::for_curve(&s.curve);
    match SplitSample::from_records(&sink.records, &s.curve, s.q, s.a, lo, hi) {
        Ok(sample) if sample.total >= MIN_SAMPLE => {
            let rows = backend_agreement(&sample, &model, job.truncation.min(s.m_max))?;
            checks.push(Check::new(
                "backend agreement",
                rows.iter().all(|r| r.passed),
                agreement_detail(&rows),
            ));
        }
        Ok(sample) => checks.push(Check::new(
            "backend agreement",
            false,
            format!("holdout has {} primes, need {MIN_SAMPLE}", sample.total),
        )),
        Err(e) => checks.push(Check::new("backend agreement", false, e.to_string())),
    }

    let mut rebuilt = Accumulator::new(s.m_max);
    for r in &sink.records {
        rebuilt.add(r);
    }
    let inv = out.accumulator.check_invariants();
    checks.push(Check::new(
        "accumulator",
        inv.is_ok() && rebuilt == out.accumulator,
        match inv {
            Ok(()) if rebuilt == out.accumulator => "invariants hold, records refold".to_string(),
            Ok(()) => "records do not refold to the accumulator".to_string(),
            Err(e) => e.to_string(),
        },
    ));

    if model.rational_two_torsion() {
        let c = c_constant(Backend::Exact, job.truncation.max(2), s.q, s.a, &model, None)?;
        let zero = out.accumulator.cyclic_count == 0 && c.value == 0.0;
        checks.push(Check::new(
            "vanishing constant",
            zero,
            format!("pi_c = {}, exact partial sum {}", out.accumulator.cyclic_count, c.value),
        ));
    }
    Ok(checks)
}

/// Report lines, and the names of the failed checks.
pub fn cmd_verify(job: &JobConfig) -> Result<(Vec<String>, Vec<&'static str>), CliError> {
    let checks = verify_suite(job)?;
    let lines = checks.iter().map(Check::line).collect();
    let failed = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
    Ok((lines, failed))
}

/// `pi_c(x) / Li(x)` at a checkpoint.
pub fn observed_density(snap: &Snapshot) -> Result<f64, CliError> {
    let li = log_integral(snap.x as f64).map_err(|e| CliError::Runtime(e.to_string()))?;
    Ok(snap.cyclic_count as f64 / li)
}
