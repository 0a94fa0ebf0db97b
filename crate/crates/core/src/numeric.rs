//! Integer and floating-point primitives shared by the other modules.
//!
//! Everything here is a pure function. The only subtle piece is the
//! canonical float reduction: sums are taken over a sorted copy of the
//! inputs so that the result does not depend on insertion order or on how
//! a parallel computation was chunked.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{arg, Result};

pub type C64 = Complex64;

/// gcd of the absolute values; the gcd of all zeros is 0.
pub fn gcd_many(values: &[i64]) -> Result<u64> {
    if values.is_empty() {
        return arg("gcd_many needs at least one value");
    }
    Ok(values
        .iter()
        .fold(0u64, |g, &v| num_integer::gcd(g, v.unsigned_abs())))
}

pub fn gcd_u64(a: u64, b: u64) -> u64 {
    num_integer::gcd(a, b)
}

pub fn lcm_u64(a: u64, b: u64) -> u64 {
    num_integer::lcm(a, b)
}

/// Number of positive divisors of `q`.
pub fn tau(q: u64) -> Result<u64> {
    if q == 0 {
        return arg("tau is undefined at 0");
    }
    Ok(factorize(q).iter().map(|&(_, e)| e as u64 + 1).product())
}

/// Prime factorization by trial division, primes in increasing order.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn is_prime(n: u64) -> bool {
    n >= 2 && factorize(n) == vec![(n, 1)]
}

pub fn primes_up_to(n: u64) -> Vec<u64> {
    (2..=n).filter(|&p| is_prime(p)).collect()
}

/// If `q` is a prime power p^t with t ≥ 1, returns (p, t).
pub fn prime_power(q: u64) -> Option<(u64, u32)> {
    match factorize(q).as_slice() {
        [(p, t)] => Some((*p, *t)),
        _ => None,
    }
}

/// Exponent of the prime `p` in `n` (n ≠ 0).
pub fn valuation(p: u64, mut n: u64) -> u32 {
    let mut v = 0;
    while n != 0 && n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// e(x) = exp(2πix), with x reduced to [−1/2, 1/2] first.
#[inline]
pub fn e(x: f64) -> C64 {
    let r = x - x.round();
    let (s, c) = (2.0 * PI * r).sin_cos();
    C64::new(c, s)
}

/// exp(2πik/q). The residue is reduced exactly before any float work, and
/// the eight points where the answer is a signed unit or zero-component are
/// returned exactly.
pub fn root_of_unity(q: u64, k: i64) -> C64 {
    assert!(q >= 1, "root_of_unity needs q >= 1");
    let qi = q as i128;
    let mut r = (k as i128).rem_euclid(qi);
    if r == 0 {
        return C64::new(1.0, 0.0);
    }
    if 2 * r == qi {
        return C64::new(-1.0, 0.0);
    }
    if 4 * r == qi {
        return C64::new(0.0, 1.0);
    }
    if 4 * r == 3 * qi {
        return C64::new(0.0, -1.0);
    }
    if 2 * r > qi {
        r -= qi;
    }
    let (s, c) = (2.0 * PI * (r as f64) / (q as f64)).sin_cos();
    C64::new(c, s)
}

/// Table of exp(2πik/q) for k = 0..q.
pub fn roots_table(q: u64) -> Vec<C64> {
    (0..q as i64).map(|k| root_of_unity(q, k)).collect()
}

/// The triple (|x|², 2x·y, |y|²) in 128-bit arithmetic.
pub fn quadratic_triple(x: &[i64], y: &[i64]) -> Result<(i128, i128, i128)> {
    if x.len() != y.len() {
        return arg(format!(
            "dimension mismatch: {} vs {}",
            x.len(),
            y.len()
        ));
    }
    let mut a = 0i128;
    let mut b = 0i128;
    let mut c = 0i128;
    for (&xi, &yi) in x.iter().zip(y) {
        let (xi, yi) = (xi as i128, yi as i128);
        a += xi * xi;
        b += xi * yi;
        c += yi * yi;
    }
    Ok((a, 2 * b, c))
}

pub fn norm2(x: &[i64]) -> i128 {
    x.iter().map(|&v| (v as i128) * (v as i128)).sum()
}

pub fn dot(x: &[i64], y: &[i64]) -> i128 {
    x.iter().zip(y).map(|(&a, &b)| a as i128 * b as i128).sum()
}

/// Exact integer component sum.
pub fn sum_components_int(x: &[i64]) -> i128 {
    x.iter().map(|&v| v as i128).sum()
}

/// Component sum of a real vector using the canonical reduction.
pub fn sum_components(x: &[f64]) -> f64 {
    canonical_sum(x)
}

/// Order-independent float sum: sort by (magnitude, sign, bit pattern),
/// then add along a balanced binary tree.
pub fn canonical_sum(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| {
        a.abs()
            .total_cmp(&b.abs())
            .then(a.is_sign_negative().cmp(&b.is_sign_negative()))
            .then(a.to_bits().cmp(&b.to_bits()))
    });
    pairwise(&v)
}

fn pairwise(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        2 => v[0] + v[1],
        n => {
            let h = n / 2;
            pairwise(&v[..h]) + pairwise(&v[h..])
        }
    }
}

/// Canonical sum applied to real and imaginary parts separately.
pub fn canonical_sum_complex(values: &[C64]) -> C64 {
    let re: Vec<f64> = values.iter().map(|z| z.re).collect();
    let im: Vec<f64> = values.iter().map(|z| z.im).collect();
    C64::new(canonical_sum(&re), canonical_sum(&im))
}

/// Inner plateau of the cutoff Φ.
pub const PHI_INNER: f64 = 0.125;
/// Outer edge of the support of Φ.
pub const PHI_OUTER: f64 = 0.25;

fn bump_sigma(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// The one-variable profile of Φ as a function of t = max_j |ξ_j|.
pub fn cutoff_profile(t: f64) -> f64 {
    let t = t.abs();
    if t <= PHI_INNER {
        return 1.0;
    }
    if t >= PHI_OUTER {
        return 0.0;
    }
    let s = (PHI_OUTER - t) / (PHI_OUTER - PHI_INNER);
    let a = bump_sigma(s);
    let b = bump_sigma(1.0 - s);
    a / (a + b)
}

/// Smooth cutoff Φ(ξ), equal to 1 for max|ξ_j| ≤ 1/8 and 0 for max|ξ_j| ≥ 1/4.
pub fn cutoff_phi(xi: &[f64]) -> f64 {
    cutoff_profile(xi.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// Γ(k/2) for k ≥ 1, from Γ(1/2) = √π and Γ(1) = 1.
pub fn gamma_half(k: u32) -> f64 {
    assert!(k >= 1);
    let (mut g, mut x) = if k % 2 == 0 {
        (1.0, 1.0)
    } else {
        (PI.sqrt(), 0.5)
    };
    while 2.0 * x < k as f64 {
        g *= x;
        x += 1.0;
    }
    g
}

/// Surface area of the unit sphere in R^m, 2π^{m/2}/Γ(m/2).
pub fn unit_sphere_area(m: u32) -> f64 {
    assert!(m >= 1);
    2.0 * PI.powf(m as f64 / 2.0) / gamma_half(m)
}

/// Nearest integer with ties to even.
pub fn round_half_even(x: f64) -> i64 {
    let r = x.round();
    if (x - x.trunc()).abs() == 0.5 && (r as i64) % 2 != 0 {
        (r - x.signum()) as i64
    } else {
        r as i64
    }
}

/// Integer square root (floor).
pub fn isqrt(n: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Gauss–Legendre nodes and weights on [−1, 1], by Newton iteration on P_n.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, z);
            dp = d;
            let dz = p / d;
            z -= dz;
            if dz.abs() < 1e-16 {
                let (_, d) = legendre_with_derivative(n, z);
                dp = d;
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = z;
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gcd_examples() {
        assert_eq!(gcd_many(&[4, 6, 10]).unwrap(), 2);
        assert_eq!(gcd_many(&[0, 0]).unwrap(), 0);
        assert_eq!(gcd_many(&[7, 13, 1]).unwrap(), 1);
        assert_eq!(gcd_many(&[-12, 18]).unwrap(), 6);
        assert!(gcd_many(&[]).is_err());
    }

    #[test]
    fn tau_examples() {
        assert_eq!(tau(1).unwrap(), 1);
        assert_eq!(tau(12).unwrap(), 6);
        assert_eq!(tau(49).unwrap(), 3);
        assert!(tau(0).is_err());
    }

    #[test]
    fn roots() {
        assert_eq!(root_of_unity(4, 1), C64::new(0.0, 1.0));
        assert_eq!(root_of_unity(2, 1), C64::new(-1.0, 0.0));
        assert_eq!(root_of_unity(1, 17), C64::new(1.0, 0.0));
        for q in 1..40u64 {
            for k in -50..50i64 {
                for l in [-7i64, 0, 3, 11] {
                    let lhs = root_of_unity(q, k) * root_of_unity(q, l);
                    assert!((lhs - root_of_unity(q, k + l)).norm() < 1e-12);
                }
                assert!((root_of_unity(q, k).norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn triples() {
        assert_eq!(quadratic_triple(&[1, 1, 0], &[1, 0, 1]).unwrap(), (2, 2, 2));
        assert_eq!(quadratic_triple(&[0, 0], &[0, 0]).unwrap(), (0, 0, 0));
        assert_eq!(quadratic_triple(&[3, -4], &[4, 3]).unwrap(), (25, 0, 25));
        assert!(quadratic_triple(&[1], &[1, 2]).is_err());
    }

    #[test]
    fn sums() {
        assert_eq!(sum_components_int(&[1, 2, 3]), 6);
        assert_eq!(sum_components(&[0.5, -0.5, 2.0]), 2.0);
        assert_eq!(sum_components(&[0.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn cutoff() {
        assert_eq!(cutoff_phi(&[0.0, 0.0]), 1.0);
        assert_eq!(cutoff_phi(&[0.3, 0.1]), 0.0);
        let mid = cutoff_phi(&[3.0 / 16.0]);
        assert!(mid > 0.0 && mid < 1.0);
        assert!((mid - 0.5).abs() < 1e-12);
        let mut prev = 1.0;
        for i in 0..=400 {
            let v = cutoff_profile(i as f64 / 1000.0);
            assert!(v <= prev && (0.0..=1.0).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn gamma_and_areas() {
        assert!((gamma_half(1) - PI.sqrt()).abs() < 1e-15);
        assert!((gamma_half(7) - 15.0 * PI.sqrt() / 8.0).abs() < 1e-13);
        assert!((unit_sphere_area(7) - 16.0 * PI.powi(3) / 15.0).abs() < 1e-12);
        assert!((unit_sphere_area(3) - 4.0 * PI).abs() < 1e-12);
        assert!((unit_sphere_area(2) - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn rounding() {
        assert_eq!(round_half_even(0.5), 0);
        assert_eq!(round_half_even(1.5), 2);
        assert_eq!(round_half_even(-0.5), 0);
        assert_eq!(round_half_even(-1.5), -2);
        assert_eq!(round_half_even(2.4), 2);
        assert_eq!(round_half_even(-2.6), -3);
    }

    #[test]
    fn legendre_rules_integrate_polynomials() {
        for n in [1usize, 2, 5, 16, 64, 150] {
            let (x, w) = gauss_legendre(n);
            let total: f64 = w.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "n={n}");
            let k = (2 * n - 2).min(40) as i32;
            let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum();
            assert!((m - 2.0 / (k as f64 + 1.0)).abs() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn factor_helpers() {
        assert_eq!(factorize(360), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(prime_power(27), Some((3, 3)));
        assert_eq!(prime_power(12), None);
        assert_eq!(valuation(2, 40), 3);
        assert_eq!(primes_up_to(20), vec![2, 3, 5, 7, 11, 13, 17, 19]);
        assert_eq!(isqrt(99), 9);
    }
}
