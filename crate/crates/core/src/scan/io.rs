//! On-disk job layout: `job.json` (the configuration), `records.csv` (one
//! line per good prime) and `checkpoint_<x>.json` (accumulator snapshots).
//!
//! Checkpoints are written to a temporary file and renamed into place after
//! the record file has been synced, so a checkpoint on disk never refers to
//! records that are not.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::accumulator::{Accumulator, Snapshot, FORMAT_VERSION};
use super::config::ScanConfig;
use super::run::{run_scan_from, ScanOutcome, ScanSink, StartState};
use super::ScanError;
use crate::structure::PrimeRecord;

pub const RECORDS_FILE: &str = "records.csv";
pub const JOB_FILE: &str = "job.json";
pub const RECORDS_HEADER: &str = "p,ap,n,dp,ep";

fn io_err(path: &Path, e: std::io::Error) -> ScanError {
    ScanError::Io(format!("{}: {e}", path.display()))
}

pub fn checkpoint_path(dir: &Path, x: u64) -> PathBuf {
    dir.join(format!("checkpoint_{x}.json"))
}

/// Writes `contents` to `path` via a synced temporary file and a rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), ScanError> {
    let tmp = path.with_extension("tmp");
    let mut f = File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
    f.write_all(contents).map_err(|e| io_err(&tmp, e))?;
    f.sync_all().map_err(|e| io_err(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))?;
    Ok(())
}

#[derive(Serialize, Deserialize, PartialEq, Debug)]
struct JobManifest {
    format_version: u32,
    config: ScanConfig,
}

fn format_record(r: &PrimeRecord) -> String {
    format!("{},{},{},{},{}\n", r.p, r.ap, r.n, r.dp, r.ep)
}

fn parse_record(line: &str, lineno: usize) -> Result<PrimeRecord, ScanError> {
    let bad = || ScanError::Format(format!("{RECORDS_FILE} line {lineno}: malformed record"));
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 5 {
        return Err(bad());
    }
    let p: u64 = fields[0].parse().map_err(|_| bad())?;
    let ap: i64 = fields[1].parse().map_err(|_| bad())?;
    let n: u64 = fields[2].parse().map_err(|_| bad())?;
    let dp: u64 = fields[3].parse().map_err(|_| bad())?;
    let ep: u64 = fields[4].parse().map_err(|_| bad())?;
    let r = PrimeRecord { p, ap, n, dp, ep };
    r.validate()?;
    Ok(r)
}

/// Reads `records.csv`, checking the version line, header and ordering.
pub fn load_records(dir: &Path) -> Result<Vec<PrimeRecord>, ScanError> {
    let path = dir.join(RECORDS_FILE);
    let f = File::open(&path).map_err(|e| io_err(&path, e))?;
    let mut out: Vec<PrimeRecord> = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| io_err(&path, e))?;
        match i {
            0 => {
                if line != format!("#format_version={FORMAT_VERSION}") {
                    return Err(ScanError::Format(format!(
                        "{RECORDS_FILE}: expected #format_version={FORMAT_VERSION}"
                    )));
                }
            }
            1 => {
                if line != RECORDS_HEADER {
                    return Err(ScanError::Format(format!("{RECORDS_FILE}: bad header")));
                }
            }
            _ => {
                let r = parse_record(&line, i + 1)?;
                if out.last().is_some_and(|prev| prev.p >= r.p) {
                    return Err(ScanError::Format(format!(
                        "{RECORDS_FILE} line {}: primes not ascending",
                        i + 1
                    )));
                }
                out.push(r);
            }
        }
    }
    Ok(out)
}

/// All checkpoint snapshots in the directory, ascending in `x`.
pub fn load_checkpoints(dir: &Path) -> Result<Vec<Snapshot>, ScanError> {
    let mut out = Vec::new();
    let entries = fs::read_dir(dir).map_err(|e| io_err(dir, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| io_err(dir, e))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        let Some(x) = name
            .strip_prefix("checkpoint_")
            .and_then(|s| s.strip_suffix(".json"))
            .and_then(|s| s.parse::<u64>().ok())
        else {
            continue;
        };
        let text = fs::read_to_string(entry.path()).map_err(|e| io_err(&entry.path(), e))?;
        let snap: Snapshot = serde_json::from_str(&text)
            .map_err(|e| ScanError::Format(format!("{name}: {e}")))?;
        if snap.x != x {
            return Err(ScanError::Format(format!("{name}: x field is {}", snap.x)));
        }
        out.push(snap);
    }
    out.sort_by_key(|s| s.x);
    Ok(out)
}

pub fn load_config(dir: &Path) -> Result<ScanConfig, ScanError> {
    let path = dir.join(JOB_FILE);
    let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    let m: JobManifest =
        serde_json::from_str(&text).map_err(|e| ScanError::Format(format!("{JOB_FILE}: {e}")))?;
    if m.format_version != FORMAT_VERSION {
        return Err(ScanError::Format(format!("{JOB_FILE}: unsupported format_version")));
    }
    Ok(m.config)
}

struct FileSink {
    dir: PathBuf,
    csv: BufWriter<File>,
}

impl ScanSink for FileSink {
    fn record(&mut self, r: &PrimeRecord) -> Result<(), ScanError> {
        self.csv
            .write_all(format_record(r).as_bytes())
            .map_err(|e| io_err(&self.dir, e))
    }

    fn checkpoint(&mut self, s: &Snapshot) -> Result<(), ScanError> {
        self.csv.flush().map_err(|e| io_err(&self.dir, e))?;
        self.csv.get_ref().sync_data().map_err(|e| io_err(&self.dir, e))?;
        let json = serde_json::to_string_pretty(s).expect("snapshot serializes");
        write_atomic(&checkpoint_path(&self.dir, s.x), json.as_bytes())
    }
}

/// Rewrites `records.csv` keeping only primes `<= x`. Bytes after the last
/// newline are a record cut short by an interrupted write and are dropped.
fn truncate_records(dir: &Path, x: u64) -> Result<(), ScanError> {
    let path = dir.join(RECORDS_FILE);
    let mut text = format!("#format_version={FORMAT_VERSION}\n{RECORDS_HEADER}\n");
    let header_len = text.len();
    let old = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(_) if x <= 1 => String::new(),
        Err(e) => return Err(io_err(&path, e)),
    };
    if x > 1 && !old.starts_with(&text) {
        return Err(ScanError::Format(format!("{RECORDS_FILE}: bad version line or header")));
    }
    if old.len() >= header_len {
        let body = &old[header_len..];
        let complete = &body[..body.rfind('\n').map_or(0, |i| i + 1)];
        for (i, line) in complete.lines().enumerate() {
            let r = parse_record(line, i + 3)?;
            if r.p > x {
                break;
            }
            text.push_str(line);
            text.push('\n');
        }
    }
    write_atomic(&path, text.as_bytes())
}

/// Runs (or resumes) the job stored in `dir`.
///
/// A fresh directory gets `job.json` and an empty record file. If `job.json`
/// already exists it must describe the same job (shard count aside); the
/// scan then restarts from the largest checkpoint on disk after dropping any
/// records written past it.
pub fn run_job(
    config: &ScanConfig,
    dir: &Path,
    halt_at: Option<u64>,
) -> Result<ScanOutcome, ScanError> {
    config.validate()?;
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let job_path = dir.join(JOB_FILE);
    let mut start = StartState {
        x: 1,
        accumulator: Accumulator::new(config.m_max),
    };
    if job_path.exists() {
        let mut stored = load_config(dir)?;
        stored.shards = config.shards;
        if &stored != config {
            return Err(ScanError::Config(format!(
                "{} holds a different job; use another output directory",
                dir.display()
            )));
        }
        if let Some(last) = load_checkpoints(dir)?.pop() {
            start = StartState {
                x: last.x,
                accumulator: last.to_accumulator()?,
            };
        }
    } else {
        let manifest = JobManifest {
            format_version: FORMAT_VERSION,
            config: config.clone(),
        };
        let json = serde_json::to_string_pretty(&manifest).expect("config serializes");
        write_atomic(&job_path, json.as_bytes())?;
    }
    truncate_records(dir, start.x)?;
    let path = dir.join(RECORDS_FILE);
    let file = OpenOptions::new()
        .append(true)
        .open(&path)
        .map_err(|e| io_err(&path, e))?;
    let mut sink = FileSink {
        dir: dir.to_path_buf(),
        csv: BufWriter::new(file),
    };
    let out = run_scan_from(config, start, halt_at, &mut sink)?;
    sink.csv.flush().map_err(|e| io_err(dir, e))?;
    sink.csv.get_ref().sync_data().map_err(|e| io_err(dir, e))?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::CurveSpec;

    fn config() -> ScanConfig {
        let mut c = ScanConfig::new(CurveSpec::new("e", 1, 1, 496).unwrap(), 50_000, 1, 0);
        c.m_max = 10;
        c
    }

    #[test]
    fn write_then_reload() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config();
        let out = run_job(&cfg, dir.path(), None).unwrap();
        let recs = load_records(dir.path()).unwrap();
        assert_eq!(recs.len() as u64, out.accumulator.prime_count);
        let mut acc = Accumulator::new(cfg.m_max);
        for r in &recs {
            acc.add(r);
        }
        assert_eq!(acc, out.accumulator);
        let cps = load_checkpoints(dir.path()).unwrap();
        assert_eq!(cps.last().unwrap().to_accumulator().unwrap(), acc);
        assert_eq!(load_config(dir.path()).unwrap(), cfg);
    }

    #[test]
    fn resume_after_halt_is_identical() {
        let cfg = config();
        let a = tempfile::tempdir().unwrap();
        run_job(&cfg, a.path(), None).unwrap();
        let b = tempfile::tempdir().unwrap();
        let part = run_job(&cfg, b.path(), Some(33_333)).unwrap();
        assert!(!part.completed);
        // Records past the last checkpoint exist on disk and must be dropped.
        assert!(load_records(b.path()).unwrap().last().unwrap().p > 20_000);
        run_job(&cfg, b.path(), None).unwrap();
        for name in ["records.csv", "checkpoint_50000.json", "checkpoint_20000.json"] {
            let x = fs::read(a.path().join(name)).unwrap();
            let y = fs::read(b.path().join(name)).unwrap();
            assert_eq!(x, y, "{name}");
        }
    }

    #[test]
    fn resume_drops_torn_record() {
        let cfg = config();
        let a = tempfile::tempdir().unwrap();
        run_job(&cfg, a.path(), None).unwrap();
        let b = tempfile::tempdir().unwrap();
        run_job(&cfg, b.path(), Some(30_000)).unwrap();
        let path = b.path().join(RECORDS_FILE);
        let mut f = OpenOptions::new().append(true).open(&path).unwrap();
        f.write_all(b"30011,17,299").unwrap();
        drop(f);
        run_job(&cfg, b.path(), None).unwrap();
        assert_eq!(fs::read(a.path().join(RECORDS_FILE)).unwrap(), fs::read(&path).unwrap());
    }

    #[test]
    fn refuses_foreign_job() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = config();
        run_job(&cfg, dir.path(), Some(100)).unwrap();
        let mut other = cfg.clone();
        other.q = 4;
        other.a = 1;
        assert!(matches!(run_job(&other, dir.path(), None), Err(ScanError::Config(_))));
    }
}
