//! Counting `|E(F_p)|`: character sums for small `p`, Shanks-Mestre
//! baby-step giant-step inside the Hasse interval otherwise.

use rand::Rng;

use super::point::{Point, ReducedCurve};
use super::CurveError;
use crate::arith::{factorize, lcm};

/// Default prime above which the baby-step giant-step counter is used.
pub const DEFAULT_CROSSOVER: u64 = 10_000;

/// Below this the order need not be pinned down by one point on `E` or its
/// twist, so baby-step giant-step is not offered.
pub const BSGS_MIN_P: u64 = 458;

/// Upper limit for the `O(p)` counter.
pub const NAIVE_MAX_P: u64 = 1_000_000;

/// Rounds of fresh points (one on `E`, one on its twist) before giving up.
const MAX_ROUNDS: usize = 64;

/// `[p + 1 - floor(2 sqrt p), p + 1 + floor(2 sqrt p)]`.
pub fn hasse_interval(p: u64) -> (u64, u64) {
    let b = (4 * p).isqrt();
    (p + 1 - b, p + 1 + b)
}

fn check_hasse(p: u64, n: u64) -> Result<u64, CurveError> {
    let (lo, hi) = hasse_interval(p);
    if n < lo || n > hi {
        return Err(CurveError::HasseViolation { p, n });
    }
    Ok(n)
}

/// `1 + sum_x (1 + (f(x) / p))`, using a table of squares.
pub fn point_count_naive(curve: &ReducedCurve) -> Result<u64, CurveError> {
    let p = curve.p();
    if p > NAIVE_MAX_P {
        return Err(CurveError::NaiveTooLarge(p));
    }
    let f = &curve.field;
    let a4 = f.to_u64(curve.a4);
    let a6 = f.to_u64(curve.a6);
    let mut square = vec![false; p as usize];
    for y in 1..=p / 2 {
        square[(y * y % p) as usize] = true;
    }
    let mut n = 1u64;
    for x in 0..p {
        let r = ((x * x % p + a4) % p * x + a6) % p;
        if r == 0 {
            n += 1;
        } else if square[r as usize] {
            n += 2;
        }
    }
    check_hasse(p, n)
}

/// Order of `pt`, given any `multiple` with `multiple * pt = O`.
pub fn point_order(curve: &ReducedCurve, pt: &Point, multiple: u64) -> u64 {
    debug_assert!(curve.mul(multiple, pt).is_infinity());
    let mut ord = multiple;
    for &(l, _) in factorize(multiple).factors() {
        while ord % l == 0 && curve.mul(ord / l, pt).is_infinity() {
            ord /= l;
        }
    }
    ord
}

/// Some `n` in `[lo, hi]` with `n * pt = O`, or `None` if there is none.
/// Baby steps `j * pt` for `0 < j <= s`, giant steps of `2s + 1`.
fn order_multiple_in(curve: &ReducedCurve, pt: &Point, lo: u64, hi: u64) -> Option<u64> {
    let width = hi - lo + 1;
    let s = width.isqrt().div_ceil(2).max(1);
    let mut baby: Vec<(u64, u64)> = Vec::with_capacity(s as usize);
    let mut acc = Point::Infinity;
    for j in 1..=s {
        acc = curve.add(&acc, pt);
        match acc {
            Point::Infinity => {
                // Small order j; the first multiple of j in range will do.
                let n = lo.div_ceil(j) * j;
                return (n <= hi).then_some(n);
            }
            Point::Affine { x, .. } => baby.push((x.raw(), j)),
        }
    }
    baby.sort_unstable();
    let giant = curve.mul(2 * s + 1, pt);
    let mut q = curve.mul(lo + s, pt);
    let mut base = lo + s;
    while base <= hi + s {
        let hit = match q {
            Point::Infinity => Some(base),
            Point::Affine { x, .. } => baby
                .binary_search_by_key(&x.raw(), |&(bx, _)| bx)
                .ok()
                .map(|i| {
                    let j = baby[i].1;
                    let jp = curve.mul(j, pt);
                    if jp == q {
                        base - j
                    } else {
                        base + j
                    }
                }),
        };
        if let Some(n) = hit {
            if n >= lo && n <= hi {
                debug_assert!(curve.mul(n, pt).is_infinity());
                return Some(n);
            }
        }
        q = curve.add(&q, &giant);
        base += 2 * s + 1;
    }
    // Repeated x-coordinates among the baby steps can hide a hit; walk the
    // interval one step at a time.
    let mut r = curve.mul(lo, pt);
    for n in lo..=hi {
        if r.is_infinity() {
            return Some(n);
        }
        r = curve.add(&r, pt);
    }
    None
}

/// Group order by baby-step giant-step with twist disambiguation.
///
/// Every point `P` on `E` constrains `n` to multiples of `ord(P)`, every
/// point on the twist constrains `2p + 2 - n` likewise. Points are drawn
/// until exactly one `n` in the Hasse interval survives.
pub fn point_count_bsgs<R: Rng>(curve: &ReducedCurve, rng: &mut R) -> Result<u64, CurveError> {
    let p = curve.p();
    if p < BSGS_MIN_P {
        return Err(CurveError::BsgsTooSmall(p));
    }
    let (lo, hi) = hasse_interval(p);
    let twist = curve.twist();
    let mut l_e = 1u64;
    let mut l_t = 1u64;
    for round in 0..MAX_ROUNDS {
        let on_twist = round % 2 == 1;
        let c = if on_twist { &twist } else { curve };
        let pt = c.random_point(rng);
        let m = order_multiple_in(c, &pt, lo, hi).ok_or(CurveError::NoOrderInInterval { p })?;
        let ord = point_order(c, &pt, m);
        if on_twist {
            l_t = lcm(l_t, ord);
        } else {
            l_e = lcm(l_e, ord);
        }
        let mut found = None;
        let mut count = 0;
        let mut n = lo.div_ceil(l_e) * l_e;
        while n <= hi {
            if (2 * p + 2 - n) % l_t == 0 {
                count += 1;
                found = Some(n);
                if count > 1 {
                    break;
                }
            }
            n += l_e;
        }
        match (count, found) {
            (0, _) => return Err(CurveError::NoOrderInInterval { p }),
            (1, Some(n)) => return check_hasse(p, n),
            _ => {}
        }
    }
    Err(CurveError::Ambiguous { p })
}

/// `|E(F_p)|`, choosing the counter by `crossover`.
pub fn group_order<R: Rng>(
    curve: &ReducedCurve,
    crossover: u64,
    rng: &mut R,
) -> Result<u64, CurveError> {
    if curve.p() < crossover.max(BSGS_MIN_P) {
        point_count_naive(curve)
    } else {
        point_count_bsgs(curve, rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::primes_in_range;
    use crate::arith::Progression;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn small_examples_by_enumeration() {
        let e = ReducedCurve::new(5, 1, 1).unwrap();
        assert_eq!(point_count_naive(&e).unwrap(), 9);
        assert_eq!(e.all_points().len(), 9);
        let e = ReducedCurve::new(5, -1, 0).unwrap();
        assert_eq!(point_count_naive(&e).unwrap(), 8);
        let e = ReducedCurve::new(3, 0, 1);
        assert!(e.is_none(), "x^3 + 1 is singular mod 3");
    }

    #[test]
    fn naive_matches_enumeration() {
        for p in primes_in_range(3, 400, Progression::all()) {
            for (a4, a6) in [(1, 1), (-1, 0), (6, -2), (0, 1), (2, 3)] {
                if let Some(e) = ReducedCurve::new(p, a4, a6) {
                    assert_eq!(point_count_naive(&e).unwrap(), e.all_points().len() as u64);
                }
            }
        }
    }

    #[test]
    fn bsgs_matches_naive_up_to_1e5() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for p in primes_in_range(BSGS_MIN_P, 100_000, Progression::all()) {
            if let Some(e) = ReducedCurve::new(p, 1, 1) {
                let a = point_count_naive(&e).unwrap();
                let b = point_count_bsgs(&e, &mut rng).unwrap();
                assert_eq!(a, b, "p = {p}");
            }
        }
    }

    #[test]
    fn full_two_torsion_gives_multiple_of_four() {
        let p = 1_000_003;
        let e = ReducedCurve::new(p, -1, 0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = point_count_bsgs(&e, &mut rng).unwrap();
        assert_eq!(n % 4, 0);
        // p = 3 mod 4 is supersingular for this curve.
        assert_eq!(n, p + 1);
    }

    #[test]
    fn twist_orders_sum_to_2p_plus_2() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let primes = primes_in_range(BSGS_MIN_P, 200_000, Progression::all());
        let mut done = 0;
        while done < 1000 {
            let p = primes[rng.gen_range(0..primes.len())];
            let a4 = rng.gen_range(-1000..1000);
            let a6 = rng.gen_range(-1000..1000);
            let Some(e) = ReducedCurve::new(p, a4, a6) else { continue };
            let n = point_count_bsgs(&e, &mut rng).unwrap();
            let nt = point_count_bsgs(&e.twist(), &mut rng).unwrap();
            assert_eq!(n + nt, 2 * p + 2);
            done += 1;
        }
    }

    #[test]
    fn random_curves_naive_equals_bsgs_to_2000() {
        let mut rng = ChaCha8Rng::seed_from_u64(20);
        let primes = primes_in_range(BSGS_MIN_P, 2000, Progression::all());
        for _ in 0..20 {
            let a4 = rng.gen_range(-50i64..50);
            let a6 = rng.gen_range(-50i64..50);
            for &p in &primes {
                if let Some(e) = ReducedCurve::new(p, a4, a6) {
                    let n = point_count_naive(&e).unwrap();
                    assert_eq!(point_count_bsgs(&e, &mut rng).unwrap(), n);
                    for _ in 0..3 {
                        let pt = e.random_point(&mut rng);
                        assert!(e.mul(n, &pt).is_infinity());
                    }
                }
            }
        }
    }

    #[test]
    fn large_prime_in_hasse_interval() {
        let p = 999_999_937;
        let e = ReducedCurve::new(p, 1, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = point_count_bsgs(&e, &mut rng).unwrap();
        let (lo, hi) = hasse_interval(p);
        assert!(n >= lo && n <= hi);
        for _ in 0..10 {
            assert!(e.mul(n, &e.random_point(&mut rng)).is_infinity());
        }
    }
}
