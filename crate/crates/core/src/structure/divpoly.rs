//! Division polynomials and counts of `F_p`-rational `N`-torsion.
//!
//! `f_n` is the `n`-th division polynomial with the factor `2y` removed for
//! even `n`, so every `f_n` lies in `F_p[x]`.

use super::poly::Poly;
use crate::curve::{Fe, Fp, ReducedCurve};

/// Largest `N` for which torsion is counted through division polynomials.
pub const MAX_N: u64 = 16;

pub struct DivisionPolys<'a> {
    curve: &'a ReducedCurve,
    /// `x^3 + a4 x + a6`
    cubic: Poly,
    /// `16 * cubic^2`
    sixteen_f2: Poly,
    f: Vec<Poly>,
}

impl<'a> DivisionPolys<'a> {
    pub fn new(curve: &'a ReducedCurve) -> Self {
        let fp = &curve.field;
        let (a, b) = (curve.a4, curve.a6);
        let c = |k: i64| fp.from_i64(k);
        let cubic = Poly::new(vec![b, a, Fe::ZERO, fp.one()]);
        let sixteen_f2 = cubic.mul(fp, &cubic).scale(fp, c(16));
        let a2 = fp.sqr(a);
        let f3 = Poly::new(vec![
            fp.neg(a2),
            fp.mul(c(12), b),
            fp.mul(c(6), a),
            Fe::ZERO,
            c(3),
        ]);
        let ab = fp.mul(a, b);
        let f4 = Poly::new(vec![
            fp.sub(fp.mul(c(-8), fp.sqr(b)), fp.mul(a2, a)),
            fp.mul(c(-4), ab),
            fp.mul(c(-5), a2),
            fp.mul(c(20), b),
            fp.mul(c(5), a),
            Fe::ZERO,
            fp.one(),
        ])
        .scale(fp, c(2));
        let f = vec![
            Poly::zero(),
            Poly::constant(fp.one()),
            Poly::constant(fp.one()),
            f3,
            f4,
        ];
        DivisionPolys {
            curve,
            cubic,
            sixteen_f2,
            f,
        }
    }

    pub fn cubic(&self) -> &Poly {
        &self.cubic
    }

    /// `f_n`, extending the table as needed.
    pub fn get(&mut self, n: usize) -> &Poly {
        let fp = &self.curve.field;
        while self.f.len() <= n {
            let k = self.f.len();
            let m = k / 2;
            let f = &self.f;
            let next = if k % 2 == 1 {
                let t1 = f[m + 2].mul(fp, &cube(fp, &f[m]));
                let t2 = f[m - 1].mul(fp, &cube(fp, &f[m + 1]));
                if m % 2 == 0 {
                    self.sixteen_f2.mul(fp, &t1).sub(fp, &t2)
                } else {
                    t1.sub(fp, &self.sixteen_f2.mul(fp, &t2))
                }
            } else {
                let a = f[m + 2].mul(fp, &f[m - 1].mul(fp, &f[m - 1]));
                let b = f[m - 2].mul(fp, &f[m + 1].mul(fp, &f[m + 1]));
                f[m].mul(fp, &a.sub(fp, &b))
            };
            self.f.push(next);
        }
        &self.f[n]
    }

    /// Number of `P` in `E(F_p)` with `N P = O`, for `2 <= N <= MAX_N`.
    pub fn rational_torsion(&mut self, n: u64) -> u64 {
        assert!((2..=MAX_N).contains(&n));
        let fp = self.curve.field.clone();
        let fp = &fp;
        let cubic = self.cubic.clone();
        let fn_ = self.get(n as usize).clone();
        let g1 = fn_.roots_part(fp);
        // Roots x with x^3 + a4 x + a6 a nonzero square lift to two points.
        let lifts = if g1.degree().unwrap_or(0) == 0 {
            0
        } else {
            let s = cubic.pow_mod(fp, (fp.p() - 1) / 2, &g1);
            let h = g1.gcd(fp, &s.sub(fp, &Poly::constant(fp.one())));
            h.degree().unwrap_or(0) as u64
        };
        let two_torsion = if n % 2 == 0 {
            cubic.count_roots(fp) as u64
        } else {
            0
        };
        1 + two_torsion + 2 * lifts
    }
}

fn cube(fp: &Fp, p: &Poly) -> Poly {
    p.mul(fp, &p.mul(fp, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::{primes_in_range, Progression};

    #[test]
    fn degrees() {
        let e = ReducedCurve::new(1009, 3, 7).unwrap();
        let mut dp = DivisionPolys::new(&e);
        for n in 1..=16usize {
            let want = if n % 2 == 1 { (n * n - 1) / 2 } else { (n * n - 4) / 2 };
            assert_eq!(dp.get(n).degree().unwrap(), want, "n = {n}");
        }
    }

    #[test]
    fn torsion_counts_match_enumeration() {
        for p in primes_in_range(5, 300, Progression::all()) {
            for (a4, a6) in [(1i64, 1i64), (-1, 0), (6, -2), (0, 1), (-43, 166), (4, 0)] {
                let Some(e) = ReducedCurve::new(p, a4, a6) else { continue };
                let pts = e.all_points();
                let mut dp = DivisionPolys::new(&e);
                for n in 2..=MAX_N {
                    if n % p == 0 {
                        continue;
                    }
                    let brute = pts.iter().filter(|q| e.mul(n, q).is_infinity()).count() as u64;
                    assert_eq!(dp.rational_torsion(n), brute, "p={p} E=({a4},{a6}) N={n}");
                }
            }
        }
    }
}
