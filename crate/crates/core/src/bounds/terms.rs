//! Arithmetic quantities appearing inside the error terms.

use crate::arith::{euler_phi, factorize, gcd, omega, tau2, Rational};

/// `(q1, q2)` with `q2` the largest divisor of `q` coprime to `m_e`.
pub fn q_split(q: u64, m_e: u64) -> (u64, u64) {
    let mut q2 = q;
    for l in factorize(m_e).primes() {
        while q2 % l == 0 {
            q2 /= l;
        }
    }
    (q / q2, q2)
}

/// `R_{E,q1} = sum_{d | M_E} phi((d, q1)) d^3 / phi(d)`, exactly.
pub fn r_e_q1_exact(m_e: u64, q1: u64) -> Rational {
    factorize(m_e)
        .divisors()
        .into_iter()
        .map(|d| {
            let num = euler_phi(gcd(d, q1)) as i128 * (d as i128).pow(3);
            Rational::new(num, euler_phi(d) as i128)
        })
        .sum()
}

pub fn r_e_q1(m_e: u64, q1: u64) -> f64 {
    r_e_q1_exact(m_e, q1).to_f64()
}

/// The constant `c` in the bound for `G_D(a, q)`: 2 when `D ≡ 1, 2 (mod 4)`
/// or when `D ≡ 3 (mod 4)` with `q` odd, 49 otherwise.
pub fn g_d_constant(d: u64, q: u64) -> u64 {
    match d % 4 {
        1 | 2 => 2,
        3 if q % 2 == 1 => 2,
        _ => 49,
    }
}

/// `c * 4^omega(q) * tau_2(q) * q^2`, an upper bound for `G_D(a, q)`.
pub fn g_d_bound(d: u64, q: u64) -> f64 {
    let c = g_d_constant(d, q) as f64;
    c * 4f64.powi(omega(q) as i32) * tau2(q) as f64 * (q as f64).powi(2)
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct SeriesValue {
    pub value: f64,
    /// Upper bound for the omitted part of the series.
    pub tail_bound: f64,
    pub terms: usize,
}

/// `S_E = sum_{d | M_E^inf} B_E / (d phi(d))` over `d <= d_cap`.
///
/// The tail over `d > d_cap` is bounded by Rankin's trick:
/// `sum_{d > D} 1/(d phi(d)) <= D^{-1} sum_d 1/phi(d)
///  = D^{-1} prod_{l | M_E} (1 + l/(l - 1)^2)`.
pub fn s_e(m_e: u64, b_e: u64, d_cap: u64) -> SeriesValue {
    let primes: Vec<u64> = factorize(m_e).primes().collect();
    let mut ds = Vec::new();
    let mut stack = vec![(0usize, 1u64)];
    while let Some((i, d)) = stack.pop() {
        ds.push(d);
        for (j, &l) in primes.iter().enumerate().skip(i) {
            if let Some(next) = d.checked_mul(l).filter(|&n| n <= d_cap) {
                stack.push((j, next));
            }
        }
    }
    ds.sort_unstable();
    let b = b_e as f64;
    // Smallest terms first.
    let value = ds
        .iter()
        .rev()
        .map(|&d| b / (d as f64 * euler_phi(d) as f64))
        .sum();
    let rankin: f64 = primes
        .iter()
        .map(|&l| {
            let l = l as f64;
            1.0 + l / ((l - 1.0) * (l - 1.0))
        })
        .product();
    SeriesValue {
        value,
        tail_bound: b * rankin / d_cap as f64,
        terms: ds.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_split_examples() {
        assert_eq!(q_split(1, 30), (1, 1));
        assert_eq!(q_split(12, 30), (12, 1));
        assert_eq!(q_split(35, 6), (1, 35));
        assert_eq!(q_split(60, 14), (4, 15));
    }

    #[test]
    fn r_e_q1_examples() {
        assert_eq!(r_e_q1(2, 1), 9.0);
        assert_eq!(r_e_q1_exact(30, 1), Rational::new(33669, 8));
        assert_eq!(r_e_q1(30, 1), 4208.625);
        assert_eq!(r_e_q1(30, 30), 31752.0);
    }

    #[test]
    fn r_e_q1_is_sandwiched() {
        for m_e in [2u64, 6, 30, 210, 2310] {
            let sum_cubes: f64 = factorize(m_e).divisors().iter().map(|&d| (d as f64).powi(3)).sum();
            let lo = r_e_q1(m_e, 1);
            for q1 in 1..=200 {
                let r = r_e_q1(m_e, q1);
                assert!(lo <= r && r <= sum_cubes, "M_E={m_e} q1={q1}");
            }
        }
    }

    #[test]
    fn g_d_bound_examples_and_table() {
        assert_eq!(g_d_bound(1, 1), 2.0);
        assert_eq!(g_d_bound(3, 2), 1568.0);
        assert_eq!(g_d_bound(2, 6), 4608.0);
        for d in 1..=40u64 {
            for q in 1..=40u64 {
                let want = match (d % 4, q % 2) {
                    (1, _) | (2, _) | (3, 1) => 2,
                    _ => 49,
                };
                assert_eq!(g_d_constant(d, q), want, "D={d} q={q}");
            }
        }
    }

    #[test]
    fn s_e_geometric_series() {
        // 1 + sum_k 1/(2^k phi(2^k)) = 1 + (1/2)/(1 - 1/4).
        let s = s_e(2, 1, 1_000_000);
        assert!((s.value - 5.0 / 3.0).abs() < 1e-11);
        assert!(5.0 / 3.0 - s.value <= s.tail_bound);
        // Closed form prod_{l | M} (1 + l / ((l - 1)(l^2 - 1))).
        let closed: f64 = [2.0f64, 3.0, 5.0]
            .iter()
            .map(|&l| 1.0 + l / ((l - 1.0) * (l * l - 1.0)))
            .product();
        let s = s_e(30, 3, 1_000_000);
        let gap = 3.0 * closed - s.value;
        assert!(gap >= 0.0 && gap <= s.tail_bound);
        assert!(gap < 1e-9);
    }
}
