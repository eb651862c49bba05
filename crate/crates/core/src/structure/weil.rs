//! Weil pairing by Miller's algorithm.

use crate::curve::{Fe, Point, ReducedCurve};

/// Value of a Miller function kept as numerator and denominator so that the
/// loop needs no inversions.
struct Frac {
    num: Fe,
    den: Fe,
}

/// Line through `t` and `s` (tangent if equal) evaluated at `q`, divided by
/// the vertical line through `t + s`. Returns the new point and the two
/// factors, or `None` if either factor vanishes.
fn line_step(
    e: &ReducedCurve,
    t: &Point,
    s: &Point,
    q: (Fe, Fe),
) -> Option<(Point, Fe, Fe)> {
    let f = &e.field;
    let (xq, yq) = q;
    let (Point::Affine { x: xt, y: yt }, Point::Affine { x: xs, y: ys }) = (*t, *s) else {
        unreachable!("Miller loop never reaches infinity before the last step");
    };
    let sum = e.add(t, s);
    let (num, den) = match sum {
        // t = -s: the line is the vertical x - xt, and the vertical through O is 1.
        Point::Infinity => (f.sub(xq, xt), f.one()),
        Point::Affine { x: x3, .. } => {
            let lambda = if xt == xs && yt == ys {
                let n = f.add(f.mul(f.from_u64(3), f.sqr(xt)), e.a4);
                f.mul(n, f.inv(f.add(yt, yt))?)
            } else {
                f.mul(f.sub(ys, yt), f.inv(f.sub(xs, xt))?)
            };
            let l = f.sub(f.sub(yq, yt), f.mul(lambda, f.sub(xq, xt)));
            (l, f.sub(xq, x3))
        }
    };
    if num.is_zero() || den.is_zero() {
        return None;
    }
    Some((sum, num, den))
}

/// `f_{N,P}(Q)` where `div f = N(P) - N(O)`, normalized at infinity.
/// Requires `N P = O`; `None` if `Q` meets the support of some line.
fn miller(e: &ReducedCurve, n: u64, p: &Point, q: &Point) -> Option<Fe> {
    let f = &e.field;
    let Point::Affine { x: xq, y: yq } = *q else {
        return None;
    };
    let mut acc = Frac {
        num: f.one(),
        den: f.one(),
    };
    let mut t = *p;
    let bits = 64 - n.leading_zeros();
    for i in (0..bits - 1).rev() {
        acc.num = f.sqr(acc.num);
        acc.den = f.sqr(acc.den);
        if t.is_infinity() {
            return None;
        }
        let (t2, ln, ld) = line_step(e, &t, &t, (xq, yq))?;
        acc.num = f.mul(acc.num, ln);
        acc.den = f.mul(acc.den, ld);
        t = t2;
        if (n >> i) & 1 == 1 {
            if t.is_infinity() {
                return None;
            }
            let (t3, ln, ld) = line_step(e, &t, p, (xq, yq))?;
            acc.num = f.mul(acc.num, ln);
            acc.den = f.mul(acc.den, ld);
            t = t3;
        }
    }
    if !t.is_infinity() {
        return None;
    }
    Some(f.mul(acc.num, f.inv(acc.den)?))
}

/// `e_N(P, Q) = (-1)^N f_{N,P}(Q) / f_{N,Q}(P)` for `P, Q` in `E[N]`.
///
/// `None` when the evaluation is degenerate, which only happens when one
/// point is a multiple of the other (and the pairing is then trivial).
pub fn weil_pairing(e: &ReducedCurve, n: u64, p: &Point, q: &Point) -> Option<Fe> {
    let f = &e.field;
    if p.is_infinity() || q.is_infinity() || p == q {
        return None;
    }
    let a = miller(e, n, p, q)?;
    let b = miller(e, n, q, p)?;
    let r = f.mul(a, f.inv(b)?);
    Some(if n % 2 == 1 { f.neg(r) } else { r })
}

/// Multiplicative order of `z` in `F_p^*`, assuming it divides `l^k`.
pub fn root_of_unity_exponent(e: &ReducedCurve, z: Fe, l: u64, k: u32) -> Option<u32> {
    let f = &e.field;
    let mut w = z;
    for j in 0..=k {
        if w == f.one() {
            return Some(j);
        }
        w = f.pow(w, l);
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(e: &ReducedCurve, p: &Point, n: u64) -> u64 {
        (1..=n).find(|&k| e.mul(k, p).is_infinity()).unwrap()
    }

    #[test]
    fn pairing_properties_on_full_torsion() {
        // Each curve has all of E[l] rational over F_p.
        let cases = [(13u64, -1i64, 0i64, 2u64), (7, 0, 2, 3), (13, 0, 3, 3), (31, 0, 11, 5), (61, 0, 4, 5)];
        for (p, a4, a6, l) in cases {
            let e = ReducedCurve::new(p, a4, a6).unwrap();
            let pts = e.all_points();
            let tors: Vec<Point> = pts
                .iter()
                .copied()
                .filter(|q| !q.is_infinity() && e.mul(l, q).is_infinity())
                .collect();
            assert_eq!(tors.len() as u64, l * l - 1, "p={p} l={l}");
            let f = &e.field;
            let mut nontrivial = 0;
            for a in &tors {
                for b in &tors {
                    match weil_pairing(&e, l, a, b) {
                        Some(z) => {
                            assert_eq!(f.pow(z, l), f.one(), "value is an l-th root of unity");
                            if z != f.one() {
                                nontrivial += 1;
                            }
                            // Alternating.
                            let zi = weil_pairing(&e, l, b, a).unwrap();
                            assert_eq!(f.mul(z, zi), f.one());
                        }
                        None => {
                            // Degenerate only for dependent points.
                            let dep = (1..l).any(|k| e.mul(k, a) == *b);
                            assert!(dep || a == b, "p={p}");
                        }
                    }
                }
            }
            assert!(nontrivial > 0);
            assert_eq!(order(&e, &tors[0], l), l);
        }
    }

    #[test]
    fn bilinear_in_first_argument() {
        let e = ReducedCurve::new(13, 0, 3).unwrap();
        let f = &e.field;
        let tors: Vec<Point> = e
            .all_points()
            .into_iter()
            .filter(|q| !q.is_infinity() && e.mul(3, q).is_infinity())
            .collect();
        let (a, b) = (tors[0], tors[1]);
        let c = tors
            .iter()
            .copied()
            .find(|c| (1..3).all(|k| e.mul(k, &a) != *c))
            .unwrap();
        if let (Some(ac), Some(bc)) = (weil_pairing(&e, 3, &a, &c), weil_pairing(&e, 3, &b, &c)) {
            let ab = e.add(&a, &b);
            if let Some(abc) = weil_pairing(&e, 3, &ab, &c) {
                assert_eq!(abc, f.mul(ac, bc));
            }
        }
    }
}
