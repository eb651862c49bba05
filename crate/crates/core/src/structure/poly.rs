//! Dense univariate polynomials over `F_p`, just enough for root counting.

use crate::curve::{Fe, Fp};

/// Coefficients in ascending degree; no trailing zeros (the zero polynomial
/// is empty).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly(pub Vec<Fe>);

impl Poly {
    pub fn zero() -> Self {
        Poly(Vec::new())
    }

    pub fn new(coeffs: Vec<Fe>) -> Self {
        let mut p = Poly(coeffs);
        p.trim();
        p
    }

    pub fn from_coeffs(field: &Fp, coeffs: &[i64]) -> Self {
        let mut p = Poly(coeffs.iter().map(|&c| field.from_i64(c)).collect());
        p.trim();
        p
    }

    pub fn constant(c: Fe) -> Self {
        let mut p = Poly(vec![c]);
        p.trim();
        p
    }

    /// The monomial `x`.
    pub fn x(field: &Fp) -> Self {
        Poly(vec![Fe::ZERO, field.one()])
    }

    fn trim(&mut self) {
        while self.0.last().is_some_and(|c| c.is_zero()) {
            self.0.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    pub fn add(&self, f: &Fp, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.0.get(i).copied().unwrap_or(Fe::ZERO);
            let b = other.0.get(i).copied().unwrap_or(Fe::ZERO);
            out.push(f.add(a, b));
        }
        let mut p = Poly(out);
        p.trim();
        p
    }

    pub fn sub(&self, f: &Fp, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let a = self.0.get(i).copied().unwrap_or(Fe::ZERO);
            let b = other.0.get(i).copied().unwrap_or(Fe::ZERO);
            out.push(f.sub(a, b));
        }
        let mut p = Poly(out);
        p.trim();
        p
    }

    pub fn scale(&self, f: &Fp, c: Fe) -> Poly {
        let mut p = Poly(self.0.iter().map(|&a| f.mul(a, c)).collect());
        p.trim();
        p
    }

    pub fn mul(&self, f: &Fp, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Fe::ZERO; self.0.len() + other.0.len() - 1];
        for (i, &a) in self.0.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.0.iter().enumerate() {
                out[i + j] = f.add(out[i + j], f.mul(a, b));
            }
        }
        let mut p = Poly(out);
        p.trim();
        p
    }

    /// Remainder of division by the nonzero `m`.
    pub fn rem(&self, f: &Fp, m: &Poly) -> Poly {
        let dm = m.degree().expect("division by zero polynomial");
        let lead_inv = f.inv(m.0[dm]).expect("nonzero leading coefficient");
        let mut r = self.0.clone();
        while r.len() > dm {
            let top = r.len() - 1;
            let c = f.mul(r[top], lead_inv);
            if !c.is_zero() {
                let shift = top - dm;
                for (i, &b) in m.0.iter().enumerate() {
                    r[shift + i] = f.sub(r[shift + i], f.mul(c, b));
                }
            }
            r.pop();
        }
        let mut p = Poly(r);
        p.trim();
        p
    }

    pub fn monic(&self, f: &Fp) -> Poly {
        match self.0.last() {
            None => Poly::zero(),
            Some(&lead) => self.scale(f, f.inv(lead).expect("nonzero")),
        }
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, f: &Fp, other: &Poly) -> Poly {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(f, &b);
            a = b;
            b = r;
        }
        a.monic(f)
    }

    /// `self^e mod m`.
    pub fn pow_mod(&self, f: &Fp, mut e: u64, m: &Poly) -> Poly {
        let mut base = self.rem(f, m);
        let mut acc = Poly::constant(f.one()).rem(f, m);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(f, &base).rem(f, m);
            }
            base = base.mul(f, &base).rem(f, m);
            e >>= 1;
        }
        acc
    }

    pub fn eval(&self, f: &Fp, x: Fe) -> Fe {
        self.0.iter().rev().fold(Fe::ZERO, |acc, &c| f.add(f.mul(acc, x), c))
    }

    /// Number of distinct roots in `F_p`: `deg gcd(self, x^p - x)`.
    pub fn count_roots(&self, f: &Fp) -> usize {
        self.roots_part(f).degree().unwrap_or(0)
    }

    /// `gcd(self, x^p - x)`: the product of the distinct linear factors.
    pub fn roots_part(&self, f: &Fp) -> Poly {
        if self.degree().unwrap_or(0) == 0 {
            return Poly::constant(f.one());
        }
        let xp = Poly::x(f).pow_mod(f, f.p(), self);
        let xp_minus_x = xp.sub(f, &Poly::x(f));
        self.gcd(f, &xp_minus_x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn root_count_matches_brute_force() {
        for p in [5u64, 7, 11, 13, 101, 1009] {
            let f = Fp::new(p);
            for coeffs in [
                vec![1i64, 1, 0, 1],
                vec![0, -1, 0, 1],
                vec![-2, 6, 0, 1],
                vec![6, -5, 1],
                vec![1, 0, 1],
                vec![3, 1, 4, 1, 5, 9, 2, 6],
            ] {
                let poly = Poly::from_coeffs(&f, &coeffs);
                let brute = (0..p).filter(|&x| poly.eval(&f, f.from_u64(x)).is_zero()).count();
                assert_eq!(poly.count_roots(&f), brute, "p={p} {coeffs:?}");
            }
        }
    }

    #[test]
    fn division_identity() {
        let f = Fp::new(97);
        let a = Poly::from_coeffs(&f, &[5, 0, 3, 7, 1, 2]);
        let b = Poly::from_coeffs(&f, &[1, 4, 1]);
        let r = a.rem(&f, &b);
        assert!(r.degree().unwrap_or(0) < 2);
        // a - r is divisible by b, so its remainder is zero.
        assert!(a.sub(&f, &r).rem(&f, &b).is_zero());
    }
}
