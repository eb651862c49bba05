//! Classical arithmetic functions.

use super::factor::factorize;
use super::rational::Rational;

pub fn mobius(m: u64) -> i64 {
    let f = factorize(m);
    if f.is_squarefree() {
        if f.factors().len() % 2 == 0 {
            1
        } else {
            -1
        }
    } else {
        0
    }
}

pub fn euler_phi(m: u64) -> u64 {
    factorize(m)
        .factors()
        .iter()
        .map(|&(p, e)| (p - 1) * p.pow(e - 1))
        .product()
}

/// Number of positive divisors.
pub fn tau2(m: u64) -> u64 {
    factorize(m)
        .factors()
        .iter()
        .map(|&(_, e)| e as u64 + 1)
        .product()
}

/// Number of distinct prime divisors.
pub fn omega(m: u64) -> u32 {
    factorize(m).factors().len() as u32
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn lcm(a: u64, b: u64) -> u64 {
    a / gcd(a, b) * b
}

/// `H(n) = sum_{d | n} #{1 <= k <= d : d | k^2}`, via the multiplicative
/// closed form `H(l^e) = sum_{j=0}^{e} l^{floor(j/2)}`.
pub fn big_h(n: u64) -> u64 {
    factorize(n)
        .factors()
        .iter()
        .map(|&(l, e)| (0..=e).map(|j| l.pow(j / 2)).sum::<u64>())
        .product()
}

/// `H(n)` by the defining double sum. Quadratic cost; for validation.
pub fn big_h_direct(n: u64) -> u64 {
    let mut total = 0;
    for d in 1..=n {
        if n % d != 0 {
            continue;
        }
        total += (1..=d).filter(|&k| (k * k) % d == 0).count() as u64;
    }
    total
}

/// `sum over pairs (d, e) with de | m of mu(d)/e`, evaluated term by term.
/// Equals `1/m`.
pub fn inner_mu_sum(m: u64) -> Rational {
    let divs = factorize(m).divisors();
    let mut total = Rational::ZERO;
    for &k in &divs {
        for &d in &divs {
            if k % d != 0 {
                continue;
            }
            let mu = mobius(d);
            if mu != 0 {
                total += Rational::new(mu as i128, (k / d) as i128);
            }
        }
    }
    total
}

/// `c(m) = sum_{de = m} mu(d)/e`, the Dirichlet convolution of `mu` with
/// `1/n`. Satisfies `sum_{m | n} c(m) = 1/n`.
pub fn pair_coefficient(m: u64) -> Rational {
    factorize(m)
        .squarefree_divisors()
        .into_iter()
        .map(|d| Rational::new(mobius(d) as i128, (m / d) as i128))
        .sum()
}
