//! The invariants `(d_p, e_p)` with `E(F_p) = Z/d_p + Z/e_p`, `d_p | e_p`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::divpoly::{DivisionPolys, MAX_N};
use super::weil::{root_of_unity_exponent, weil_pairing};
use super::StructureError;
use crate::arith::{factorize, gcd, lcm, valuation};
use crate::curve::{hasse_interval, point_order, Point, ReducedCurve};

/// Independent random Sylow samples drawn before switching to a
/// deterministic sweep over the points.
pub const RANDOM_SAMPLES: usize = 40;

/// One good prime and the structure of the reduced curve there.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrimeRecord {
    pub p: u64,
    pub ap: i64,
    pub n: u64,
    pub dp: u64,
    pub ep: u64,
}

impl PrimeRecord {
    pub fn new(p: u64, n: u64, dp: u64) -> Self {
        PrimeRecord {
            p,
            ap: p as i64 + 1 - n as i64,
            n,
            dp,
            ep: n / dp,
        }
    }

    /// Checks every structural invariant of a record.
    pub fn validate(&self) -> Result<(), StructureError> {
        let fail = |what: &'static str| Err(StructureError::InvalidRecord { p: self.p, what });
        let (lo, hi) = hasse_interval(self.p);
        if self.n < lo || self.n > hi {
            return fail("Hasse bound");
        }
        if self.ap != self.p as i64 + 1 - self.n as i64 {
            return fail("n = p + 1 - a_p");
        }
        if self.dp == 0 || self.dp.checked_mul(self.ep) != Some(self.n) {
            return fail("d_p e_p = n");
        }
        if self.ep % self.dp != 0 {
            return fail("d_p | e_p");
        }
        if (self.p - 1) % self.dp != 0 {
            return fail("d_p | p - 1");
        }
        Ok(())
    }

    /// `E(F_p)` is cyclic.
    pub fn is_cyclic(&self) -> bool {
        self.dp == 1
    }
}

/// Whether `p` splits completely in the `m`-division field, i.e. `m | d_p`.
pub fn m_torsion_rational(record: &PrimeRecord, m: u64) -> bool {
    record.dp % m == 0
}

pub fn is_cyclic(record: &PrimeRecord) -> bool {
    record.is_cyclic()
}

/// `(d_p, e_p)` from the known group order `n`.
///
/// `d_p` is assembled prime by prime over `l | gcd(n, p - 1)`. The exponent
/// `v_l(d_p)` is at most `min(v_l(n) / 2, v_l(p - 1))`. Division polynomials
/// settle it when the relevant `l^k` is at most 16; otherwise random points
/// of the Sylow `l`-subgroup bound it from above (largest order seen) and
/// from below (Weil pairing of two points of order `l^k`) until the bounds
/// meet.
pub fn group_structure<R: Rng>(
    curve: &ReducedCurve,
    n: u64,
    rng: &mut R,
) -> Result<(u64, u64), StructureError> {
    let p = curve.p();
    let g = gcd(n, p - 1);
    let mut d = 1u64;
    let mut divpolys: Option<DivisionPolys> = None;
    for &(l, _) in factorize(g).factors() {
        let vn = valuation(n, l);
        let cap = (vn / 2).min(valuation(p - 1, l));
        if cap == 0 {
            continue;
        }
        let dp = divpolys.get_or_insert_with(|| DivisionPolys::new(curve));
        let (mut lo, mut hi) = (0u32, cap);
        // Smallest level first; stop at the first level without full torsion.
        let mut k = 1u32;
        while k <= hi && l.pow(k) <= MAX_N {
            let full = if l == 2 && k == 1 {
                dp.cubic().count_roots(&curve.field) == 3
            } else {
                dp.rational_torsion(l.pow(k)) == l.pow(2 * k)
            };
            if full {
                lo = k;
            } else {
                hi = k - 1;
            }
            k += 1;
        }
        if lo < hi {
            lo = sylow_rank_exponent(curve, n, l, vn, lo, hi, rng)?;
        }
        d *= l.pow(lo);
    }
    if (p - 1) % d != 0 || n % (d * d) != 0 {
        return Err(StructureError::Uncertified { p, l: 0 });
    }
    Ok((d, n / d))
}

/// Tracks the Sylow `l`-subgroup `Z/l^a + Z/l^b` (`a <= b`, `a + b = v`)
/// and narrows `a` into `[lo, hi]`.
struct SylowSearch<'a> {
    curve: &'a ReducedCurve,
    l: u64,
    v: u32,
    cofactor: u64,
    lo: u32,
    hi: u32,
    /// Sampled points with their order exponents, largest first.
    seen: Vec<(Point, u32)>,
}

impl SylowSearch<'_> {
    fn absorb(&mut self, r: &Point) {
        let pt = self.curve.mul(self.cofactor, r);
        if pt.is_infinity() {
            return;
        }
        let ord = point_order(self.curve, &pt, self.l.pow(self.v));
        let j = valuation(ord, self.l);
        // The exponent of the subgroup is l^b with b >= j, so a <= v - j.
        self.hi = self.hi.min(self.v - j);
        for &(q, i) in &self.seen {
            let k = i.min(j).min(self.hi);
            if k <= self.lo {
                continue;
            }
            let n = self.l.pow(k);
            let a = self.curve.mul(self.l.pow(j - k), &pt);
            let b = self.curve.mul(self.l.pow(i - k), &q);
            if let Some(z) = weil_pairing(self.curve, n, &a, &b) {
                if let Some(order) = root_of_unity_exponent(self.curve, z, self.l, k) {
                    // A pairing of exact order l^t shows E[l^t] is rational.
                    self.lo = self.lo.max(order);
                }
            }
        }
        self.seen.push((pt, j));
        self.seen.sort_by(|x, y| y.1.cmp(&x.1));
        self.seen.truncate(8);
    }

    fn settled(&self) -> bool {
        self.lo >= self.hi
    }
}

fn sylow_rank_exponent<R: Rng>(
    curve: &ReducedCurve,
    n: u64,
    l: u64,
    v: u32,
    lo: u32,
    hi: u32,
    rng: &mut R,
) -> Result<u32, StructureError> {
    let mut search = SylowSearch {
        curve,
        l,
        v,
        cofactor: n / l.pow(v),
        lo,
        hi,
        seen: Vec::new(),
    };
    for _ in 0..RANDOM_SAMPLES {
        search.absorb(&curve.random_point(rng));
        if search.settled() {
            return Ok(search.lo);
        }
    }
    // Deterministic sweep: every point is eventually absorbed, and the
    // points generate the group, so the bounds must meet.
    let f = &curve.field;
    for xi in 0..f.p() {
        let x = f.from_u64(xi);
        if let Some(y) = f.sqrt(curve.rhs(x)) {
            search.absorb(&Point::Affine { x, y });
            if search.settled() {
                return Ok(search.lo);
            }
        }
    }
    Err(StructureError::Uncertified { p: curve.p(), l })
}

/// `(d_p, e_p)` by listing every point: the exponent is the lcm of the point
/// orders and `d_p = n / exponent`. `O(p)` group operations.
pub fn structure_by_enumeration(curve: &ReducedCurve) -> (u64, u64) {
    let pts = curve.all_points();
    let n = pts.len() as u64;
    let mut exponent = 1u64;
    for pt in &pts {
        exponent = lcm(exponent, point_order(curve, pt, n));
    }
    (n / exponent, exponent)
}

/// Does some point have order `n`? The cyclicity test used as an oracle.
pub fn has_point_of_full_order(curve: &ReducedCurve) -> bool {
    let pts = curve.all_points();
    let n = pts.len() as u64;
    pts.iter().any(|pt| point_order(curve, pt, n) == n)
}
