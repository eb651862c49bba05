//! Prime generation: a plain sieve for small bounds and a segmented sieve
//! restricted to an arithmetic progression.

use super::factor::{is_prime, small_primes, TRIAL_LIMIT};
use super::ArithError;

/// Segment length used by [`PrimeStream`].
pub const SEGMENT_LEN: u64 = 1 << 18;

/// All primes `<= limit`, ascending.
pub fn simple_sieve(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut composite = vec![false; n + 1];
    let mut i = 2usize;
    while i * i <= n {
        if !composite[i] {
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
        i += 1;
    }
    (2..=n).filter(|&k| !composite[k]).map(|k| k as u64).collect()
}

/// A residue class `a mod q` with `gcd(a, q) = 1`, or every integer when
/// `q = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Progression {
    q: u64,
    a: u64,
}

impl Progression {
    pub fn new(q: u64, a: u64) -> Result<Self, ArithError> {
        if q == 0 {
            return Err(ArithError::ZeroModulus);
        }
        let a = a % q;
        if q > 1 && gcd(a, q) != 1 {
            return Err(ArithError::InvalidProgression { q, a });
        }
        Ok(Progression { q, a })
    }

    pub fn all() -> Self {
        Progression { q: 1, a: 0 }
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn a(&self) -> u64 {
        self.a
    }

    #[inline]
    pub fn contains(&self, n: u64) -> bool {
        n % self.q == self.a
    }
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Base primes for sieving up to `hi`, and whether they reach `sqrt(hi)`.
/// Past `TRIAL_LIMIT^2` the sieve only strips small factors and survivors
/// are confirmed by Miller-Rabin.
fn base_for(hi: u64) -> (&'static [u64], bool) {
    let root = hi.isqrt();
    let table = small_primes();
    let end = table.partition_point(|&p| p <= root);
    (&table[..end], root <= TRIAL_LIMIT)
}

/// Primes in `[lo, hi]` (inclusive) lying in `prog`, ascending.
pub fn primes_in_range(lo: u64, hi: u64, prog: Progression) -> Vec<u64> {
    let mut out = Vec::new();
    if hi < 2 || lo > hi {
        return out;
    }
    let lo = lo.max(2);
    let (base, complete) = base_for(hi);
    let mut start = lo;
    loop {
        let end = hi.min(start.saturating_add(SEGMENT_LEN - 1));
        sieve_into(start, end, base, complete, prog, &mut out);
        if end == hi {
            break;
        }
        start = end + 1;
    }
    out
}

fn sieve_into(
    lo: u64,
    hi: u64,
    base: &[u64],
    complete: bool,
    prog: Progression,
    out: &mut Vec<u64>,
) {
    let len = (hi - lo + 1) as usize;
    let mut composite = vec![false; len];
    for &p in base {
        if p * p > hi {
            break;
        }
        let first = (p * p).max(lo.div_ceil(p) * p);
        let mut j = first;
        while j <= hi {
            composite[(j - lo) as usize] = true;
            j += p;
        }
    }
    for (i, &c) in composite.iter().enumerate() {
        let n = lo + i as u64;
        if !c && n >= 2 && prog.contains(n) && (complete || is_prime(n)) {
            out.push(n);
        }
    }
}

/// Number of primes in `[lo, hi]` lying in `prog`.
pub fn count_primes(lo: u64, hi: u64, prog: Progression) -> u64 {
    let mut total = 0u64;
    if hi < 2 || lo > hi {
        return 0;
    }
    let mut start = lo.max(2);
    let (base, complete) = base_for(hi);
    let mut buf = Vec::new();
    loop {
        let end = hi.min(start.saturating_add(SEGMENT_LEN - 1));
        buf.clear();
        sieve_into(start, end, base, complete, prog, &mut buf);
        total += buf.len() as u64;
        if end == hi {
            break;
        }
        start = end + 1;
    }
    total
}

/// Ascending stream of the primes in `[lo, hi]` congruent to `a mod q`.
/// Holds one segment in memory at a time.
pub struct PrimeStream {
    prog: Progression,
    next_lo: u64,
    hi: u64,
    done: bool,
    buf: Vec<u64>,
    pos: usize,
    base: &'static [u64],
    complete: bool,
}

impl Iterator for PrimeStream {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        loop {
            if self.pos < self.buf.len() {
                self.pos += 1;
                return Some(self.buf[self.pos - 1]);
            }
            if self.done {
                return None;
            }
            let lo = self.next_lo;
            let end = self.hi.min(lo.saturating_add(SEGMENT_LEN - 1));
            self.buf.clear();
            self.pos = 0;
            sieve_into(
                lo,
                end,
                self.base,
                self.complete,
                self.prog,
                &mut self.buf,
            );
            if end == self.hi {
                self.done = true;
            } else {
                self.next_lo = end + 1;
            }
        }
    }
}

/// Stream of primes `p` in `[lo, hi]` with `p = a (mod q)`.
pub fn segmented_primes(lo: u64, hi: u64, q: u64, a: u64) -> Result<PrimeStream, ArithError> {
    let prog = Progression::new(q, a)?;
    if lo < 2 || lo > hi || hi > 1 << 63 {
        return Err(ArithError::InvalidRange { lo, hi });
    }
    let (base, complete) = base_for(hi);
    Ok(PrimeStream {
        prog,
        next_lo: lo,
        hi,
        done: false,
        buf: Vec::new(),
        pos: 0,
        base,
        complete,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trial(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
    }

    #[test]
    fn first_primes() {
        let v: Vec<u64> = segmented_primes(2, 20, 1, 0).unwrap().collect();
        assert_eq!(v, vec![2, 3, 5, 7, 11, 13, 17, 19]);
    }

    #[test]
    fn progressions_against_trial_division() {
        let v: Vec<u64> = segmented_primes(2, 50, 4, 1).unwrap().collect();
        let want: Vec<u64> = (2..=50).filter(|&n| trial(n) && n % 4 == 1).collect();
        assert_eq!(v, want);
        assert_eq!(v, vec![5, 13, 17, 29, 37, 41]);
        let v: Vec<u64> = segmented_primes(2, 10, 3, 2).unwrap().collect();
        assert_eq!(v, vec![2, 5]);
    }

    #[test]
    fn bad_progression_rejected() {
        assert!(matches!(
            segmented_primes(2, 100, 6, 3),
            Err(ArithError::InvalidProgression { .. })
        ));
        assert!(Progression::new(1, 0).is_ok());
    }

    #[test]
    fn stream_crosses_segments() {
        let hi = 3 * SEGMENT_LEN + 17;
        let streamed: Vec<u64> = segmented_primes(2, hi, 1, 0).unwrap().collect();
        assert_eq!(streamed, simple_sieve(hi));
        assert_eq!(count_primes(2, hi, Progression::all()), streamed.len() as u64);
    }

    #[test]
    fn pi_of_ten_million() {
        assert_eq!(count_primes(2, 10_000_000, Progression::all()), 664_579);
    }

    #[test]
    fn large_window_uses_primality_fallback() {
        let lo = (1u64 << 62) - 1000;
        let hi = 1u64 << 62;
        let v = primes_in_range(lo, hi, Progression::all());
        let want: Vec<u64> = (lo..=hi).filter(|&n| is_prime(n)).collect();
        assert_eq!(v, want);
        assert!(!v.is_empty());
    }

    #[test]
    fn shards_reassemble() {
        let full = primes_in_range(2, 1_000_000, Progression::all());
        for k in [1u64, 4, 16] {
            let step = 1_000_000 / k;
            let mut joined = Vec::new();
            for i in 0..k {
                let lo = i * step + 1;
                let hi = if i + 1 == k { 1_000_000 } else { (i + 1) * step };
                joined.extend(segmented_primes(lo.max(2), hi, 1, 0).unwrap());
            }
            assert_eq!(joined, full, "k = {k}");
        }
    }
}
