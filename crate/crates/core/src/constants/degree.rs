//! Degrees of composite fields `Q(E[m]) Q(zeta_q)` where they are known in
//! closed form.

use serde::Serialize;

use super::ConstantsError;
use crate::arith::{euler_phi, factorize, gcd};
use crate::curve::spec::disc_core;
use crate::curve::CurveSpec;

/// `|GL_2(Z/mZ)| = m^4 prod_{l | m} (1 - 1/l)(1 - 1/l^2)`.
pub fn gl2_order(m: u64) -> u128 {
    assert!(m >= 1, "gl2_order needs m >= 1");
    factorize(m)
        .factors()
        .iter()
        .map(|&(l, k)| {
            let l = l as u128;
            l.pow(4 * (k - 1)) * (l * l - 1) * (l * l - l)
        })
        .product()
}

/// Degree of `Q(E[m]) Q(zeta_q)` and the indicator `gamma` for a curve whose
/// mod-`m` representation is surjective, taking `Q(E[m]) ∩ Q(zeta_q)` to be
/// `Q(zeta_g)` with `g = gcd(m, q)`.
///
/// `a_e` is the modulus outside of which surjectivity is assumed; pass 1 for
/// a curve that is surjective everywhere.
pub fn generic_degree(m: u64, q: u64, a: u64, a_e: u64) -> Result<(u128, u8), ConstantsError> {
    if m == 0 || q == 0 {
        return Err(ConstantsError::Domain("m and q must be positive"));
    }
    if gcd(m, a_e) != 1 {
        return Err(ConstantsError::NotGeneric { m, a_e });
    }
    let g = gcd(m, q);
    let degree = gl2_order(m) * euler_phi(q) as u128 / euler_phi(g) as u128;
    let gamma = u8::from(a % g == 1 % g);
    Ok((degree, gamma))
}

/// Kronecker symbol `(d / n)` for `n >= 1`.
pub fn kronecker(d: i64, n: u64) -> i8 {
    let mut n = n;
    let mut result = 1i8;
    let mut d = d as i128;
    let tz = n.trailing_zeros();
    if tz > 0 {
        if d % 2 == 0 {
            return 0;
        }
        if tz % 2 == 1 && matches!(d.rem_euclid(8), 3 | 5) {
            result = -result;
        }
        n >>= tz;
    }
    // Jacobi symbol (d / n) for odd n.
    let mut n = n as i128;
    d = d.rem_euclid(n);
    while d != 0 {
        while d % 2 == 0 {
            d /= 2;
            if matches!(n % 8, 3 | 5) {
                result = -result;
            }
        }
        std::mem::swap(&mut d, &mut n);
        if d % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        d %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// The splitting field of `x^3 + a4 x + a6`, i.e. `Q(E[2])`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum TwoDivision {
    /// Three rational roots: `Q(E[2]) = Q`.
    Rational,
    /// One rational root; `Q(E[2])` is the quadratic field of discriminant `disc`.
    Quadratic { disc: Option<i64> },
    /// Irreducible with square discriminant: a cyclic cubic field.
    Cyclic,
    /// Irreducible with non-square discriminant; the quadratic subfield has
    /// discriminant `disc`.
    Symmetric { disc: Option<i64> },
}

impl TwoDivision {
    pub fn of(a4: i64, a6: i64) -> Self {
        let disc = fundamental_discriminant(-disc_core(a4, a6));
        match integer_roots(a4, a6).len() {
            3 => TwoDivision::Rational,
            1 => TwoDivision::Quadratic { disc },
            _ if disc == Some(1) => TwoDivision::Cyclic,
            _ => TwoDivision::Symmetric { disc },
        }
    }

    pub fn degree(&self) -> u64 {
        match self {
            TwoDivision::Rational => 1,
            TwoDivision::Quadratic { .. } => 2,
            TwoDivision::Cyclic => 3,
            TwoDivision::Symmetric { .. } => 6,
        }
    }

    /// `([Q(E[2]) Q(zeta_q) : Q], gamma)`, or `None` when the intersection
    /// with `Q(zeta_q)` cannot be decided from the cubic alone.
    pub fn composite(&self, q: u64, a: u64, a4: i64, a6: i64) -> Option<(u128, u8)> {
        let phi_q = euler_phi(q) as u128;
        let deg = self.degree() as u128;
        match *self {
            TwoDivision::Rational => Some((phi_q, 1)),
            TwoDivision::Quadratic { disc } | TwoDivision::Symmetric { disc } => {
                // The largest abelian subfield is Q(sqrt(disc)), whose
                // conductor is |disc|.
                let d = disc?;
                if q % d.unsigned_abs() == 0 {
                    Some((deg * phi_q / 2, u8::from(kronecker(d, a) == 1)))
                } else {
                    Some((deg * phi_q, 1))
                }
            }
            TwoDivision::Cyclic => {
                // The conductor of a cyclic cubic field only involves primes
                // dividing the discriminant.
                let core = disc_core(a4, a6).unsigned_abs();
                let mut g = q as u128;
                let mut c = core;
                while c != 0 {
                    (g, c) = (c, g % c);
                }
                (g == 1).then_some((deg * phi_q, 1))
            }
        }
    }
}

/// Distinct integer roots of `x^3 + a4 x + a6`.
pub fn integer_roots(a4: i64, a6: i64) -> Vec<i64> {
    let f = |x: i128| x * x * x + a4 as i128 * x + a6 as i128;
    let mut cands: Vec<i128> = Vec::new();
    if a6 == 0 {
        cands.push(0);
        if a4 < 0 {
            let r = (a4.unsigned_abs()).isqrt() as i128;
            cands.extend([r, -r]);
        }
    } else {
        for d in factorize(a6.unsigned_abs()).divisors() {
            cands.extend([d as i128, -(d as i128)]);
        }
    }
    let mut roots: Vec<i64> = cands.into_iter().filter(|&x| f(x) == 0).map(|x| x as i64).collect();
    roots.sort_unstable();
    roots.dedup();
    roots
}

/// Discriminant of `Q(sqrt(n))`, with 1 for a square. `None` if `|n|` does
/// not fit in 64 bits.
pub fn fundamental_discriminant(n: i128) -> Option<i64> {
    if n == 0 {
        return None;
    }
    let abs = u64::try_from(n.unsigned_abs()).ok()?;
    let core: i128 = factorize(abs)
        .factors()
        .iter()
        .filter(|&&(_, e)| e % 2 == 1)
        .map(|&(p, _)| p as i128)
        .product();
    let s = if n < 0 { -core } else { core };
    let d = if s.rem_euclid(4) == 1 { s } else { 4 * s };
    i64::try_from(d).ok()
}

/// Where exact degrees are available.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum DegreeModel {
    /// A hypothetical curve with surjective mod-`m` image for every `m` and
    /// no entanglement: every term is generic.
    Universal,
    Curve {
        a4: i64,
        a6: i64,
        /// `A(E)`; terms with `gcd(m, A(E)) = 1` are generic.
        a_e: u64,
        cm: bool,
        two: TwoDivision,
    },
}

impl DegreeModel {
    /// `A(E)` comes from the Serre set when known; a non-CM curve without one
    /// is taken to have `S_E ⊆ {2, 3, 5}`.
    pub fn for_curve(spec: &CurveSpec) -> Self {
        DegreeModel::Curve {
            a4: spec.a4,
            a6: spec.a6,
            a_e: spec.serre_constant().unwrap_or(30),
            cm: spec.is_cm(),
            two: TwoDivision::of(spec.a4, spec.a6),
        }
    }

    /// Full rational 2-torsion: `Q(E[2m]) = Q(E[m])` for odd `m`.
    pub fn rational_two_torsion(&self) -> bool {
        matches!(self, DegreeModel::Curve { two: TwoDivision::Rational, .. })
    }

    /// `([Q(E[m]) Q(zeta_q) : Q], gamma)` where it is known exactly.
    pub fn exact(&self, m: u64, q: u64, a: u64) -> Option<(u128, u8)> {
        if m == 1 {
            return Some((euler_phi(q) as u128, 1));
        }
        match *self {
            DegreeModel::Universal => generic_degree(m, q, a, 1).ok(),
            DegreeModel::Curve { a4, a6, a_e, cm, two } => {
                if m == 2 {
                    two.composite(q, a, a4, a6)
                } else if cm {
                    None
                } else {
                    generic_degree(m, q, a, a_e).ok()
                }
            }
        }
    }
}
