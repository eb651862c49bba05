//! Arithmetic in `F_p` for odd primes `p < 2^62`, with elements held in
//! Montgomery form (`a * 2^64 mod p`).

/// An element of `F_p` in Montgomery representation. Only meaningful
/// together with the [`Fp`] that produced it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Fe(u64);

impl Fe {
    pub const ZERO: Fe = Fe(0);

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }

    /// The raw Montgomery word. Distinct elements have distinct words.
    #[inline]
    pub fn raw(self) -> u64 {
        self.0
    }
}

/// The prime field `F_p`.
#[derive(Clone, Debug)]
pub struct Fp {
    p: u64,
    /// `-p^{-1} mod 2^64`
    pneg_inv: u64,
    r2: u64,
    r3: u64,
    one: Fe,
    /// Smallest quadratic non-residue, in Montgomery form.
    nonresidue: Fe,
    /// `p - 1 = odd * 2^two_adicity`
    two_adicity: u32,
    odd: u64,
}

impl Fp {
    /// Panics unless `p` is odd and below `2^62`. Primality is the caller's
    /// responsibility.
    pub fn new(p: u64) -> Self {
        assert!(p % 2 == 1 && p > 2 && p < 1 << 62, "modulus must be an odd prime below 2^62");
        let mut inv = p;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(p.wrapping_mul(inv)));
        }
        let r = ((1u128 << 64) % p as u128) as u64;
        let r2 = ((r as u128 * r as u128) % p as u128) as u64;
        let r3 = ((r2 as u128 * r as u128) % p as u128) as u64;
        let two_adicity = (p - 1).trailing_zeros();
        let mut f = Fp {
            p,
            pneg_inv: inv.wrapping_neg(),
            r2,
            r3,
            one: Fe(r),
            nonresidue: Fe(0),
            two_adicity,
            odd: (p - 1) >> two_adicity,
        };
        let mut z = 2u64;
        while f.legendre(f.from_u64(z)) != -1 {
            z += 1;
        }
        f.nonresidue = f.from_u64(z);
        f
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.p
    }

    #[inline]
    pub fn one(&self) -> Fe {
        self.one
    }

    #[inline]
    pub fn nonresidue(&self) -> Fe {
        self.nonresidue
    }

    #[inline]
    fn redc(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.pneg_inv);
        let u = ((t + m as u128 * self.p as u128) >> 64) as u64;
        if u >= self.p {
            u - self.p
        } else {
            u
        }
    }

    #[inline]
    pub fn from_u64(&self, a: u64) -> Fe {
        Fe(self.redc((a % self.p) as u128 * self.r2 as u128))
    }

    pub fn from_i64(&self, a: i64) -> Fe {
        let r = a.rem_euclid(self.p as i64) as u64;
        self.from_u64(r)
    }

    /// Canonical residue in `[0, p)`.
    #[inline]
    pub fn to_u64(&self, a: Fe) -> u64 {
        self.redc(a.0 as u128)
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        let s = a.0 + b.0;
        Fe(if s >= self.p { s - self.p } else { s })
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        Fe(if a.0 >= b.0 { a.0 - b.0 } else { a.0 + self.p - b.0 })
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        if a.0 == 0 {
            a
        } else {
            Fe(self.p - a.0)
        }
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        Fe(self.redc(a.0 as u128 * b.0 as u128))
    }

    #[inline]
    pub fn sqr(&self, a: Fe) -> Fe {
        self.mul(a, a)
    }

    pub fn pow(&self, mut a: Fe, mut e: u64) -> Fe {
        let mut acc = self.one;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, a);
            }
            a = self.sqr(a);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn inv(&self, a: Fe) -> Option<Fe> {
        if a.is_zero() {
            return None;
        }
        // Extended Euclid on the raw word gives (aR)^{-1}; one Montgomery
        // product with R^3 turns it into a^{-1} R.
        let (mut r0, mut r1) = (self.p as i64, a.0 as i64);
        let (mut t0, mut t1) = (0i64, 1i64);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (t0, t1) = (t1, t0 - q * t1);
        }
        debug_assert_eq!(r0, 1);
        let u = t0.rem_euclid(self.p as i64) as u64;
        Some(Fe(self.redc(u as u128 * self.r3 as u128)))
    }

    /// Euler's criterion: `1` for nonzero squares, `-1` for non-squares,
    /// `0` for zero.
    pub fn legendre(&self, a: Fe) -> i32 {
        if a.is_zero() {
            return 0;
        }
        if self.pow(a, (self.p - 1) / 2) == self.one {
            1
        } else {
            -1
        }
    }

    /// Square root by Tonelli-Shanks, or `None` for a non-residue.
    pub fn sqrt(&self, a: Fe) -> Option<Fe> {
        if a.is_zero() {
            return Some(a);
        }
        if self.p % 4 == 3 {
            let r = self.pow(a, (self.p + 1) / 4);
            return (self.sqr(r) == a).then_some(r);
        }
        let mut m = self.two_adicity;
        let mut c = self.pow(self.nonresidue, self.odd);
        let mut t = self.pow(a, self.odd);
        let mut r = self.pow(a, self.odd.div_ceil(2));
        while t != self.one {
            let mut i = 0;
            let mut t2 = t;
            while t2 != self.one {
                t2 = self.sqr(t2);
                i += 1;
                if i == m {
                    return None;
                }
            }
            let mut b = c;
            for _ in 0..m - i - 1 {
                b = self.sqr(b);
            }
            m = i;
            c = self.sqr(b);
            t = self.mul(t, c);
            r = self.mul(r, b);
        }
        Some(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn legendre_mod_5() {
        let f = Fp::new(5);
        assert_eq!(f.legendre(f.from_u64(4)), 1);
        assert_eq!(f.legendre(f.from_u64(3)), -1);
        assert_eq!(f.legendre(f.from_u64(0)), 0);
        let r = f.to_u64(f.sqrt(f.from_u64(4)).unwrap());
        assert!(r == 2 || r == 3);
        assert!(f.sqrt(f.from_u64(3)).is_none());
    }

    #[test]
    fn legendre_matches_square_table() {
        for p in [3u64, 5, 7, 13, 17, 41, 97, 257, 7681] {
            let f = Fp::new(p);
            let mut square = vec![false; p as usize];
            for x in 1..p {
                square[(x * x % p) as usize] = true;
            }
            for a in 1..p {
                let want = if square[a as usize] { 1 } else { -1 };
                let e = f.from_u64(a);
                assert_eq!(f.legendre(e), want, "p={p} a={a}");
                match f.sqrt(e) {
                    Some(r) => assert_eq!(f.sqr(r), e),
                    None => assert_eq!(want, -1),
                }
            }
        }
    }

    proptest! {
        #[test]
        fn field_ops_agree_with_u128(a in any::<u64>(), b in any::<u64>(),
                                     idx in 0usize..4) {
            let p = [1_000_003u64, 998_244_353, (1u64 << 61) - 1, 4_611_686_018_427_387_847][idx];
            let f = Fp::new(p);
            let (x, y) = (f.from_u64(a), f.from_u64(b));
            let (a, b) = ((a % p) as u128, (b % p) as u128);
            let p128 = p as u128;
            prop_assert_eq!(f.to_u64(f.mul(x, y)) as u128, a * b % p128);
            prop_assert_eq!(f.to_u64(f.add(x, y)) as u128, (a + b) % p128);
            prop_assert_eq!(f.to_u64(f.sub(x, y)) as u128, (a + p128 - b) % p128);
            if a != 0 {
                prop_assert_eq!(f.mul(x, f.inv(x).unwrap()), f.one());
            }
            let s = f.sqr(x);
            let r = f.sqrt(s).unwrap();
            prop_assert_eq!(f.sqr(r), s);
        }
    }
}
