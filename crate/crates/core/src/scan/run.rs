//! The sharded scan: blocks of the prime range are processed in parallel and
//! folded into the accumulator strictly in ascending order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::accumulator::{Accumulator, Snapshot};
use super::config::ScanConfig;
use super::ScanError;
use crate::arith::{primes_in_range, Progression};
use crate::curve::{group_order, reduce_curve, CurveSpec, Reduction};
use crate::structure::{group_structure, PrimeRecord};

/// Width of one unit of parallel work.
pub const BLOCK_LEN: u64 = 1 << 16;

/// Receives records and checkpoint snapshots in ascending order.
pub trait ScanSink {
    fn record(&mut self, _r: &PrimeRecord) -> Result<(), ScanError> {
        Ok(())
    }
    fn checkpoint(&mut self, _s: &Snapshot) -> Result<(), ScanError> {
        Ok(())
    }
}

/// Discards everything.
pub struct NullSink;
impl ScanSink for NullSink {}

/// Keeps everything in memory.
#[derive(Default)]
pub struct MemorySink {
    pub records: Vec<PrimeRecord>,
    pub snapshots: Vec<Snapshot>,
}

impl ScanSink for MemorySink {
    fn record(&mut self, r: &PrimeRecord) -> Result<(), ScanError> {
        self.records.push(*r);
        Ok(())
    }
    fn checkpoint(&mut self, s: &Snapshot) -> Result<(), ScanError> {
        self.snapshots.push(s.clone());
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct ScanOutcome {
    pub accumulator: Accumulator,
    pub snapshots: Vec<Snapshot>,
    /// Every prime `<= last_x` has been folded in.
    pub last_x: u64,
    pub completed: bool,
}

/// Where a scan starts: nothing done, or everything up to `x` folded into
/// `accumulator`.
#[derive(Clone, Debug)]
pub struct StartState {
    pub x: u64,
    pub accumulator: Accumulator,
}

/// Per-prime random stream, independent of how the range is sharded.
pub fn prime_rng(seed: u64, p: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed ^ p.wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

/// The record for `p`, or `None` when `p` is a bad prime.
pub fn compute_record(
    spec: &CurveSpec,
    p: u64,
    crossover: u64,
    seed: u64,
) -> Result<Option<PrimeRecord>, ScanError> {
    let curve = match reduce_curve(spec, p)? {
        Reduction::Bad => return Ok(None),
        Reduction::Good(c) => c,
    };
    let mut rng = prime_rng(seed, p);
    let n = group_order(&curve, crossover, &mut rng)?;
    let (d, _) = group_structure(&curve, n, &mut rng)?;
    let rec = PrimeRecord::new(p, n, d);
    rec.validate()?;
    Ok(Some(rec))
}

fn block_records(
    config: &ScanConfig,
    prog: Progression,
    lo: u64,
    hi: u64,
) -> Result<Vec<PrimeRecord>, ScanError> {
    let mut out = Vec::new();
    for p in primes_in_range(lo, hi, prog) {
        if let Some(r) = compute_record(&config.curve, p, config.crossover, config.seed)? {
            out.push(r);
        }
    }
    Ok(out)
}

pub fn run_scan(config: &ScanConfig, sink: &mut dyn ScanSink) -> Result<ScanOutcome, ScanError> {
    let start = StartState {
        x: 1,
        accumulator: Accumulator::new(config.m_max),
    };
    run_scan_from(config, start, None, sink)
}

/// Continues a scan from `start`. With `halt_at`, stops once every prime up
/// to that bound has been handed to the sink, as if the process had been
/// killed there.
pub fn run_scan_from(
    config: &ScanConfig,
    start: StartState,
    halt_at: Option<u64>,
    sink: &mut dyn ScanSink,
) -> Result<ScanOutcome, ScanError> {
    config.validate()?;
    let prog = config.progression()?;
    if start.accumulator.m_max() != config.m_max {
        return Err(ScanError::Config("resume state has a different m_max".into()));
    }
    let end = halt_at.map_or(config.x_max, |h| h.min(config.x_max));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.shards)
        .build()
        .map_err(|e| ScanError::Config(format!("thread pool: {e}")))?;

    let mut acc = start.accumulator;
    let mut snapshots = Vec::new();
    let cps = &config.checkpoints;
    let mut next_cp = cps.partition_point(|&c| c <= start.x);
    let mut emit = |acc: &Accumulator,
                    upto: u64,
                    next_cp: &mut usize,
                    sink: &mut dyn ScanSink|
     -> Result<(), ScanError> {
        while *next_cp < cps.len() && cps[*next_cp] <= upto {
            acc.check_invariants()?;
            let snap = acc.snapshot(cps[*next_cp]);
            sink.checkpoint(&snap)?;
            snapshots.push(snap);
            *next_cp += 1;
        }
        Ok(())
    };

    let mut blocks = Vec::new();
    let mut lo = start.x + 1;
    while lo <= end {
        let hi = end.min(lo + BLOCK_LEN - 1);
        blocks.push((lo, hi));
        lo = hi + 1;
    }
    let batch = config.shards * 4;
    for chunk in blocks.chunks(batch) {
        let results: Vec<Result<Vec<PrimeRecord>, ScanError>> = pool.install(|| {
            chunk
                .par_iter()
                .map(|&(lo, hi)| block_records(config, prog, lo, hi))
                .collect()
        });
        for (res, &(_, hi)) in results.into_iter().zip(chunk) {
            for r in res? {
                emit(&acc, r.p - 1, &mut next_cp, sink)?;
                acc.add(&r);
                sink.record(&r)?;
            }
            emit(&acc, hi, &mut next_cp, sink)?;
        }
    }
    emit(&acc, end, &mut next_cp, sink)?;
    Ok(ScanOutcome {
        accumulator: acc,
        snapshots,
        last_x: end.max(start.x),
        completed: end == config.x_max,
    })
}
