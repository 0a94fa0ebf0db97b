//! Complete quadratic Gauss sums
//!
//!   g(q; a, m, n) = q^{-2} Σ_{r,s mod q} e_q(a₁r² + 2a₂rs + a₃s² + mr + ns),
//!
//! the congruence counts that bound them, and the sums G_λ(q; m, n) built
//! from them. Phases are reduced mod q in integer arithmetic and collected
//! into a histogram over Z_q, so the only float work is one pass over q
//! roots of unity.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::numeric::{canonical_sum_complex, factorize, gcd_u64, prime_power, roots_table, tau, C64};
use crate::report::VerificationReport;
use crate::rng::stream;

/// Largest modulus accepted by the q³ scans in [`big_g`].
pub const BIG_G_MAX_Q: u64 = 128;

fn residue(x: i64, q: u64) -> u64 {
    (x as i128).rem_euclid(q as i128) as u64
}

/// Modulus, coefficient triple and linear frequencies of one Gauss sum.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GaussSumKey {
    pub q: u64,
    /// Coefficients reduced into 1..=q.
    pub a: [u64; 3],
    pub m: u64,
    pub n: u64,
    pub primitive: bool,
}

impl GaussSumKey {
    pub fn new(q: u64, a: [i64; 3], m: i64, n: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::Argument("modulus must be positive".into()));
        }
        let red = a.map(|x| match residue(x, q) {
            0 => q,
            r => r,
        });
        let g = red.iter().fold(q, |g, &x| gcd_u64(g, x));
        Ok(Self {
            q,
            a: red,
            m: residue(m, q),
            n: residue(n, q),
            primitive: g == 1,
        })
    }
}

/// Phase histograms of the Gauss sum for several (m, n) at once: entry
/// `[k][j]` counts the (r, s) whose phase with frequencies `freqs[k]` is j mod q.
pub fn phase_histograms(q: u64, a: [u64; 3], freqs: &[(u64, u64)]) -> Vec<Vec<u64>> {
    let qs = q as usize;
    let q32 = q as u32;
    let [a1, a2, a3] = a.map(|x| x % q);
    // n·s mod q for each frequency, shared by every r.
    let ns: Vec<Vec<u32>> = freqs
        .iter()
        .map(|&(_, n)| (0..q).map(|s| (n * s % q) as u32).collect())
        .collect();
    let mut hist = vec![vec![0u64; qs]; freqs.len()];
    let mut quad = vec![0u32; qs];
    // Reduction table for sums of three residues, to keep the loop branch-free.
    let reduce: Vec<u32> = (0..3 * q32).map(|v| v % q32).collect();
    let step2 = (2 * a3) % q;
    for r in 0..q {
        // Quadratic phase a₁r² + 2a₂rs + a₃s² along s, by second differences.
        let mut p = (a1 * r % q) * r % q;
        let mut delta = (2 * a2 % q * r % q + a3) % q;
        for slot in quad.iter_mut() {
            *slot = p as u32;
            p += delta;
            if p >= q {
                p -= q;
            }
            delta += step2;
            if delta >= q {
                delta -= q;
            }
        }
        for (k, &(m, _)) in freqs.iter().enumerate() {
            let c = (m * r % q) as u32;
            let h = &mut hist[k];
            for (&ph, &lin) in quad.iter().zip(&ns[k]) {
                h[reduce[(ph + lin + c) as usize] as usize] += 1;
            }
        }
    }
    hist
}

fn histogram_value(hist: &[u64], roots: &[C64], q: u64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for (c, z) in hist.iter().zip(roots) {
        if *c != 0 {
            acc += z * (*c as f64);
        }
    }
    acc / ((q * q) as f64)
}

/// g(q; a, m, n) by direct double summation.
pub fn gauss_g(key: &GaussSumKey) -> C64 {
    let roots = roots_table(key.q);
    let h = phase_histograms(key.q, key.a, &[(key.m, key.n)]);
    histogram_value(&h[0], &roots, key.q)
}

/// Convenience form of [`gauss_g`] taking unreduced integers.
pub fn gauss_g_at(q: u64, a: [i64; 3], m: i64, n: i64) -> Result<C64> {
    Ok(gauss_g(&GaussSumKey::new(q, a, m, n)?))
}

/// The one-variable sums K[a₃][c] = Σ_{s mod q} e_q(a₃s² + cs) for one q.
///
/// Summing over s first gives
///   g(q; a, m, n) = q⁻² Σ_r e_q(a₁r² + mr) K[a₃][2a₂r + n],
/// which costs O(q) per key once the table exists, instead of O(q²).
#[derive(Clone, Debug)]
pub struct InnerSums {
    pub q: u64,
    table: Vec<C64>,
    roots: Vec<C64>,
}

impl InnerSums {
    pub fn new(q: u64) -> Self {
        let roots = roots_table(q);
        let qs = q as usize;
        let mut table = vec![C64::new(0.0, 0.0); qs * qs];
        let mut hist = vec![0u64; qs];
        for a3 in 0..q {
            for c in 0..q {
                hist.iter_mut().for_each(|h| *h = 0);
                for s in 0..q {
                    hist[((a3 * s % q * s + c * s) % q) as usize] += 1;
                }
                table[(a3 * q + c) as usize] = histogram_value(&hist, &roots, 1);
            }
        }
        Self { q, table, roots }
    }

    /// g(q; a, m, n) for residues a, m, n.
    pub fn g(&self, a: [u64; 3], m: u64, n: u64) -> C64 {
        let q = self.q;
        let [a1, a2, a3] = a.map(|x| x % q);
        let row = &self.table[(a3 * q) as usize..((a3 + 1) * q) as usize];
        let mut acc = C64::new(0.0, 0.0);
        let mut outer = 0u64;
        let mut outer_step = (a1 + m) % q;
        let mut lin = n % q;
        let lin_step = 2 * a2 % q;
        for _ in 0..q {
            acc += self.roots[outer as usize] * row[lin as usize];
            // a₁r² + mr advances by a₁(2r + 1) + m.
            outer += outer_step;
            if outer >= q {
                outer -= q;
            }
            outer_step += 2 * a1 % q;
            if outer_step >= q {
                outer_step -= q;
            }
            lin += lin_step;
            if lin >= q {
                lin -= q;
            }
        }
        acc / ((q * q) as f64)
    }
}

/// Number of (h, k) ∈ Z_q² with a₁h + a₂k ≡ a₂h + a₃k ≡ 0 (mod q).
pub fn congruence_count_nu(q: u64, a: [i64; 3]) -> u64 {
    let [a1, a2, a3] = a.map(|x| residue(x, q));
    let mut count = 0;
    for h in 0..q {
        let mut u = a1 * h % q;
        let mut v = a2 * h % q;
        for _ in 0..q {
            count += (u == 0 && v == 0) as u64;
            u += a2;
            u -= q * (u >= q) as u64;
            v += a3;
            v -= q * (v >= q) as u64;
        }
    }
    count
}

/// [`congruence_count_nu`] in O(q·(q, a₂)) time: for each h the first
/// congruence pins k to a coset of (q/(q,a₂))Z, and only that coset is tested.
pub fn congruence_count_fast(q: u64, a: [i64; 3]) -> u64 {
    let [a1, a2, a3] = a.map(|x| residue(x, q) as i128);
    let qi = q as i128;
    let g1 = num_integer::gcd(a2, qi);
    let step = qi / g1;
    // Inverse of a₂/g₁ modulo q/g₁.
    let inv = {
        let e = num_integer::Integer::extended_gcd(&(a2 / g1), &step);
        e.x.rem_euclid(step)
    };
    let mut count = 0;
    for h in 0..qi {
        let beta = (-a1 * h).rem_euclid(qi);
        if beta % g1 != 0 {
            continue;
        }
        let k0 = (beta / g1 * inv).rem_euclid(step);
        let target = (-a2 * h).rem_euclid(qi);
        for t in 0..g1 {
            let k = k0 + t * step;
            if (a3 * k).rem_euclid(qi) == target {
                count += 1;
            }
        }
    }
    count
}

/// w_q(a) = (q, a₁a₃ − a₂²)^{1/2}.
pub fn weight_w(q: u64, a: [i64; 3]) -> f64 {
    (weight_gcd(q, a) as f64).sqrt()
}

fn weight_gcd(q: u64, a: [i64; 3]) -> u64 {
    let det = a[0] as i128 * a[2] as i128 - a[1] as i128 * a[1] as i128;
    let r = det.rem_euclid(q as i128) as u64;
    gcd_u64(q, r)
}

/// Primitive coefficient triples 1 ≤ a_i ≤ q with (q, a₁, a₂, a₃) = 1.
pub fn primitive_triples(q: u64) -> Vec<[u64; 3]> {
    let mut out = Vec::new();
    for a1 in 1..=q {
        let g1 = gcd_u64(q, a1);
        for a2 in 1..=q {
            let g2 = gcd_u64(g1, a2);
            for a3 in 1..=q {
                if gcd_u64(g2, a3) == 1 {
                    out.push([a1, a2, a3]);
                }
            }
        }
    }
    out
}

/// G_λ(q; m, n) = Σ_{a primitive} e_q(−λ s(a)) Π_j g(q; a, m_j, n_j).
pub fn big_g(lambda: u64, q: u64, m: &[i64], n: &[i64]) -> Result<C64> {
    if m.len() != n.len() || m.is_empty() {
        return Err(Error::Argument("m and n must be nonempty vectors of equal length".into()));
    }
    if q == 0 {
        return Err(Error::Argument("modulus must be positive".into()));
    }
    if q > BIG_G_MAX_Q {
        return Err(Error::Resource(format!("big_g: q = {q} exceeds the cap {BIG_G_MAX_Q}")));
    }
    // Distinct residue pairs and, per coordinate, which pair it uses.
    let mut freqs: Vec<(u64, u64)> = Vec::new();
    let slot: Vec<usize> = m
        .iter()
        .zip(n)
        .map(|(&mj, &nj)| {
            let f = (residue(mj, q), residue(nj, q));
            match freqs.iter().position(|&x| x == f) {
                Some(i) => i,
                None => {
                    freqs.push(f);
                    freqs.len() - 1
                }
            }
        })
        .collect();
    let inner = InnerSums::new(q);
    let roots = &inner.roots;
    let lam = lambda % q;
    let terms: Vec<C64> = primitive_triples(q)
        .par_iter()
        .map(|&a| {
            let g: Vec<C64> = freqs.iter().map(|&(m, n)| inner.g(a, m, n)).collect();
            let s = (a[0] + a[1] + a[2]) % q;
            let mut t = roots[((q - lam * s % q) % q) as usize];
            for &k in &slot {
                t *= g[k];
            }
            t
        })
        .collect();
    Ok(canonical_sum_complex(&terms))
}

/// The zero-frequency sums G_λ(q; 0, 0) for one (q, d), for any λ.
///
/// Stores H[k] = Σ_{a primitive, s(a) ≡ k} g(q; a, 0, 0)^d, so that
/// G_λ(q; 0, 0) = Σ_k H[k] e_q(−λk).
#[derive(Clone, Debug)]
pub struct ZeroFrequencyTable {
    pub q: u64,
    pub d: u32,
    by_sum: Vec<C64>,
    roots: Vec<C64>,
}

impl ZeroFrequencyTable {
    pub fn new(q: u64, d: u32) -> Result<Self> {
        if q == 0 || q > BIG_G_MAX_Q {
            return Err(Error::Resource(format!("zero-frequency table: q = {q} out of range")));
        }
        let inner = InnerSums::new(q);
        let roots = inner.roots.clone();
        let powered: Vec<(u64, C64)> = primitive_triples(q)
            .par_iter()
            .map(|&a| {
                let g = inner.g(a, 0, 0);
                ((a[0] + a[1] + a[2]) % q, g.powu(d))
            })
            .collect();
        let mut buckets: Vec<Vec<C64>> = vec![Vec::new(); q as usize];
        for (s, v) in powered {
            buckets[s as usize].push(v);
        }
        let by_sum = buckets.iter().map(|b| canonical_sum_complex(b)).collect();
        Ok(Self { q, d, by_sum, roots })
    }

    pub fn value(&self, lambda: u64) -> C64 {
        let q = self.q;
        let lam = lambda % q;
        let terms: Vec<C64> = self
            .by_sum
            .iter()
            .enumerate()
            .map(|(k, h)| h * self.roots[((q - lam * k as u64 % q) % q) as usize])
            .collect();
        canonical_sum_complex(&terms)
    }
}

/// g(q; a, m, 0) for every primitive a and every m mod q, used when many
/// frequency vectors share a modulus.
#[derive(Clone, Debug)]
pub struct LinearFrequencyTable {
    pub q: u64,
    triples: Vec<[u64; 3]>,
    values: Vec<C64>,
    roots: Vec<C64>,
}

impl LinearFrequencyTable {
    pub fn new(q: u64) -> Result<Self> {
        if q == 0 || q > BIG_G_MAX_Q {
            return Err(Error::Resource(format!("frequency table: q = {q} out of range")));
        }
        let roots = roots_table(q);
        let triples = primitive_triples(q);
        let qs = q as usize;
        let rows: Vec<Vec<C64>> = triples
            .par_iter()
            .map(|&[a1, a2, a3]| {
                // H(r) = Σ_s e_q(2a₂rs + a₃s²), then g(m) = q⁻² Σ_r e_q(a₁r² + mr) H(r).
                let mut inner = vec![C64::new(0.0, 0.0); qs];
                let mut hist = vec![0u64; qs];
                for r in 0..q {
                    hist.iter_mut().for_each(|h| *h = 0);
                    for s in 0..q {
                        hist[((2 * a2 % q * r % q * s + a3 * s % q * s) % q) as usize] += 1;
                    }
                    inner[r as usize] = histogram_value(&hist, &roots, 1);
                }
                (0..q)
                    .map(|m| {
                        let mut acc = C64::new(0.0, 0.0);
                        for r in 0..q {
                            let k = (a1 * r % q * r + m * r) % q;
                            acc += roots[k as usize] * inner[r as usize];
                        }
                        acc / ((q * q) as f64)
                    })
                    .collect()
            })
            .collect();
        Ok(Self {
            q,
            triples,
            values: rows.concat(),
            roots,
        })
    }

    /// g(q; a_i, m, 0) for the i-th primitive triple.
    pub fn g(&self, i: usize, m: i64) -> C64 {
        self.values[i * self.q as usize + residue(m, self.q) as usize]
    }

    /// G_λ(q; m, 0).
    pub fn big_g(&self, lambda: u64, m: &[i64]) -> C64 {
        let q = self.q;
        let lam = lambda % q;
        let terms: Vec<C64> = self
            .triples
            .iter()
            .enumerate()
            .map(|(i, a)| {
                let s = (a[0] + a[1] + a[2]) % q;
                let mut t = self.roots[((q - lam * s % q) % q) as usize];
                for &mj in m {
                    t *= self.g(i, mj);
                }
                t
            })
            .collect();
        canonical_sum_complex(&terms)
    }
}

pub const ANCHOR_GAUSS_SQUARE: &str = "gauss-square-by-congruence-count";
pub const ANCHOR_CONGRUENCE: &str = "congruence-count-by-determinant-gcd";
pub const ANCHOR_WEIGHT_MOMENT: &str = "weight-moment-by-divisor-count";

/// Checks |g(q;a,m,n)|² ≤ q⁻²ν(q;2a) over primitive a, with five seeded
/// (m, n) per a, and for prime powers ν(q;a) ≤ (q, a₁a₃ − a₂²).
/// Beyond `sample_budget` primitive triples, a seeded sample is used.
pub fn verify_gauss_bound(q: u64, sample_budget: usize, seed: u64) -> VerificationReport {
    let mut report = VerificationReport::new(
        "gauss-bound",
        json!({"q": q, "sample_budget": sample_budget, "seed": seed}),
    );
    if q == 0 {
        report.hard("modulus", "q >= 1", 0.0, 1.0, 0.0, false);
        return report;
    }
    let all = primitive_triples(q);
    let chosen: Vec<[u64; 3]> = if all.len() <= sample_budget {
        all
    } else {
        let mut rng = stream(seed, u64::MAX);
        (0..sample_budget).map(|_| all[rng.gen_range(0..all.len())]).collect()
    };
    let inner = InnerSums::new(q);
    let is_pp = prime_power(q).is_some();
    struct Acc {
        excess: f64,
        violations: u64,
        nu_violations: u64,
        nu_ratio: f64,
        constant: f64,
    }
    let per: Vec<Acc> = chosen
        .par_iter()
        .enumerate()
        .map(|(i, &a)| {
            let mut rng = stream(seed, i as u64);
            let freqs: Vec<(u64, u64)> = (0..5).map(|_| (rng.gen_range(0..q), rng.gen_range(0..q))).collect();
            let ai = a.map(|x| x as i64);
            let bound = congruence_count_fast(q, ai.map(|x| 2 * x)) as f64 / (q * q) as f64;
            let w = weight_w(q, ai);
            let mut acc = Acc {
                excess: f64::NEG_INFINITY,
                violations: 0,
                nu_violations: 0,
                nu_ratio: 0.0,
                constant: 0.0,
            };
            for &(m, n) in &freqs {
                let g2 = inner.g(a, m, n).norm_sqr();
                let ex = g2 - bound;
                acc.excess = acc.excess.max(ex);
                if ex > 1e-9 {
                    acc.violations += 1;
                }
                acc.constant = acc.constant.max(g2.sqrt() * q as f64 / w);
            }
            if is_pp {
                let nu = congruence_count_fast(q, ai);
                let cap = weight_gcd(q, ai);
                acc.nu_ratio = nu as f64 / cap as f64;
                if nu > cap {
                    acc.nu_violations += 1;
                }
            }
            acc
        })
        .collect();
    let excess = per.iter().map(|a| a.excess).fold(f64::NEG_INFINITY, f64::max);
    let violations: u64 = per.iter().map(|a| a.violations).sum();
    report
        .hard("max |g|^2 - nu(q;2a)/q^2", ANCHOR_GAUSS_SQUARE, excess, 0.0, 1e-9, violations == 0)
        .with_note(format!("{violations} violations over {} triples x 5 frequencies", per.len()));
    if is_pp {
        let nv: u64 = per.iter().map(|a| a.nu_violations).sum();
        let ratio = per.iter().map(|a| a.nu_ratio).fold(0.0, f64::max);
        report
            .hard("max nu(q;a)/(q, a1a3-a2^2)", ANCHOR_CONGRUENCE, ratio, 1.0, 0.0, nv == 0)
            .with_note(format!("{nv} violations"));
    }
    let c = per.iter().map(|a| a.constant).fold(0.0, f64::max);
    report.soft("max q|g|/w_q(a)", ANCHOR_GAUSS_SQUARE, c, 1.0, 0.0, c <= 1.01);
    report.data = json!({"triples": per.len(), "violations": violations, "max_excess": excess, "max_constant": c});
    report
}

/// Counts of primitive a mod p^e by k = min(e, v_p(a₁a₃ − a₂²)), memoized.
fn weight_histogram(p: u64, e: u32) -> Vec<u64> {
    static CACHE: OnceLock<Mutex<HashMap<(u64, u32), Vec<u64>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(h) = cache.lock().unwrap().get(&(p, e)) {
        return h.clone();
    }
    let q = p.pow(e);
    let hist = (0..q)
        .into_par_iter()
        .map(|a1| {
            let mut h = vec![0u64; e as usize + 1];
            for a2 in 0..q {
                for a3 in 0..q {
                    if a1 % p == 0 && a2 % p == 0 && a3 % p == 0 {
                        continue;
                    }
                    let mut det = ((a1 * a3 + q * q - a2 * a2 % q) % q) as u64;
                    let mut k = 0;
                    while k < e && det % p == 0 {
                        det /= p;
                        k += 1;
                    }
                    // det == 0 mod q leaves k = e through the loop above.
                    h[k as usize] += 1;
                }
            }
            h
        })
        .reduce(
            || vec![0u64; e as usize + 1],
            |mut x, y| {
                x.iter_mut().zip(y).for_each(|(a, b)| *a += b);
                x
            },
        );
    cache.lock().unwrap().insert((p, e), hist.clone());
    hist
}

/// Σ_{a primitive mod q} w_q(a)^s, assembled over the prime powers of q:
/// primitivity and (q, a₁a₃ − a₂²) both split along the CRT decomposition.
pub fn weight_moment(q: u64, s: f64) -> f64 {
    factorize(q)
        .iter()
        .map(|&(p, e)| {
            weight_histogram(p, e)
                .iter()
                .enumerate()
                .map(|(k, &c)| c as f64 * (p as f64).powf(k as f64 * s / 2.0))
                .sum::<f64>()
        })
        .product()
}

/// The same moment by a direct scan over all triples, as an oracle.
pub fn weight_moment_direct(q: u64, s: f64) -> f64 {
    primitive_triples(q)
        .iter()
        .map(|a| weight_w(q, a.map(|x| x as i64)).powf(s))
        .sum()
}

/// Checks Σ_a w_q(a)^s ≤ τ(q)² q^{s/2 + 2}.
pub fn verify_weight_moment(q: u64, s: f64) -> VerificationReport {
    let mut report = VerificationReport::new("weight-moment", json!({"q": q, "s": s}));
    if q == 0 {
        report.hard("modulus", "q >= 1", 0.0, 1.0, 0.0, false);
        return report;
    }
    let lhs = weight_moment(q, s);
    let t = tau(q).unwrap() as f64;
    let rhs = t * t * (q as f64).powf(s / 2.0 + 2.0);
    report.hard("sum w^s vs tau^2 q^(s/2+2)", ANCHOR_WEIGHT_MOMENT, lhs, rhs, 1e-9, lhs <= rhs * (1.0 + 1e-9));
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_examples() {
        for a in [[1, 2, 3], [5, 0, 7], [0, 0, 0]] {
            assert_eq!(gauss_g_at(1, a, 4, -3).unwrap(), C64::new(1.0, 0.0));
        }
        assert!(gauss_g_at(2, [1, 0, 0], 0, 0).unwrap().norm() < 1e-15);
        let key = GaussSumKey::new(6, [12, -1, 3], -1, 7).unwrap();
        assert_eq!(key.a, [6, 5, 3]);
        assert_eq!((key.m, key.n), (5, 1));
        assert!(!GaussSumKey::new(4, [2, 4, 6], 0, 0).unwrap().primitive);
    }

    /// Literal double sum with float phases, as an independent oracle.
    fn naive_g(q: u64, a: [i64; 3], m: i64, n: i64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for r in 1..=q as i64 {
            for s in 1..=q as i64 {
                let ph = a[0] * r * r + 2 * a[1] * r * s + a[2] * s * s + m * r + n * s;
                acc += crate::numeric::e(ph.rem_euclid(q as i64) as f64 / q as f64);
            }
        }
        acc / (q * q) as f64
    }

    #[test]
    fn histogram_matches_naive() {
        for q in 1..14u64 {
            for (a, m, n) in [([1, 2, 3], 0, 0), ([4, 1, 9], 3, -2), ([2, 2, 2], 1, 5)] {
                let fast = gauss_g_at(q, a, m, n).unwrap();
                assert!((fast - naive_g(q, a, m, n)).norm() < 1e-12, "q={q}");
            }
        }
    }

    #[test]
    fn factored_sum_matches_histogram() {
        for q in 1..30u64 {
            let inner = InnerSums::new(q);
            for (a, m, n) in [([1u64, 2, 3], 0u64, 0u64), ([4, 1, 9], 3, 2), ([2, 2, 2], 1, 5), ([7, 0, 5], 11, 13)] {
                let key = GaussSumKey::new(q, a.map(|x| x as i64), m as i64, n as i64).unwrap();
                assert!((inner.g(key.a, key.m, key.n) - gauss_g(&key)).norm() < 1e-13, "q={q}");
            }
        }
    }

    #[test]
    fn fast_congruence_count_matches_scan() {
        for q in 1..40u64 {
            for a in [[1i64, 2, 3], [2, 4, 6], [0, 6, 9], [5, 5, 5], [12, 0, 8], [0, 0, 0]] {
                assert_eq!(congruence_count_fast(q, a), congruence_count_nu(q, a), "q={q} a={a:?}");
            }
        }
    }

    #[test]
    fn congruence_examples() {
        assert_eq!(congruence_count_nu(1, [3, 4, 5]), 1);
        for p in [2u64, 3, 5, 7, 11] {
            assert_eq!(congruence_count_nu(p, [1, 0, 0]), p);
        }
        for (q1, q2) in [(3u64, 4u64), (5, 8), (7, 9)] {
            for a in [[1, 2, 3], [2, 1, 2], [6, 3, 9]] {
                assert_eq!(
                    congruence_count_nu(q1 * q2, a),
                    congruence_count_nu(q1, a) * congruence_count_nu(q2, a)
                );
            }
        }
    }

    #[test]
    fn weight_examples() {
        assert!((weight_w(6, [1, 1, 1]) - 6f64.sqrt()).abs() < 1e-15);
        assert_eq!(weight_w(5, [1, 2, 3]), 1.0);
        assert_eq!(weight_w(4, [2, 0, 2]), 2.0);
    }

    #[test]
    fn weight_moment_routes_agree() {
        for q in 1..=40u64 {
            for s in [2.0, 3.0, 4.0] {
                let a = weight_moment(q, s);
                let b = weight_moment_direct(q, s);
                assert!((a - b).abs() <= 1e-9 * b, "q={q} s={s}: {a} vs {b}");
            }
        }
        assert_eq!(weight_moment(1, 2.0), 1.0);
        let r = verify_weight_moment(1, 2.0);
        assert!(r.pass);
        assert_eq!(r.checks[0].rhs, 1.0);
        for k in 0..=8 {
            assert!(verify_weight_moment(1 << k, 3.0).pass);
        }
    }

    #[test]
    fn big_g_basics() {
        assert_eq!(big_g(5, 1, &[3, 1], &[0, 2]).unwrap(), C64::new(1.0, 0.0));
        let a = big_g(4, 6, &[1, 2, 0], &[0, 0, 5]).unwrap();
        let b = big_g(4, 6, &[7, 2, -6], &[0, 6, 5]).unwrap();
        assert!((a - b).norm() < 1e-12);
        assert!(big_g(2, 2, &[0], &[0, 0]).is_err());
        assert!(big_g(2, 1000, &[0], &[0]).is_err());
        for q in 1..12 {
            let t = ZeroFrequencyTable::new(q, 7).unwrap();
            for lambda in [1u64, 2, 6, 10] {
                let direct = big_g(lambda, q, &[0; 7], &[0; 7]).unwrap();
                assert!((t.value(lambda) - direct).norm() < 1e-12);
            }
        }
        let lt = LinearFrequencyTable::new(10).unwrap();
        let m = [1i64, 0, 3, 9, 2, 2, 5];
        let direct = big_g(8, 10, &m, &[0; 7]).unwrap();
        assert!((lt.big_g(8, &m) - direct).norm() < 1e-12);
    }

    #[test]
    fn bound_verifier_small_q() {
        assert!(verify_gauss_bound(1, 1000, 1).pass);
        for q in [4u64, 9, 25, 12] {
            let r = verify_gauss_bound(q, 100_000, 3);
            assert!(r.pass, "{}", r.to_json());
        }
    }

    proptest! {
        #[test]
        fn conjugation_and_swap(q in 1u64..20, a1 in -30i64..30, a2 in -30i64..30, a3 in -30i64..30, m in -30i64..30, n in -30i64..30) {
            let g = gauss_g_at(q, [a1, a2, a3], m, n).unwrap();
            let neg = gauss_g_at(q, [-a1, -a2, -a3], -m, -n).unwrap();
            prop_assert!((g.conj() - neg).norm() < 1e-12);
            let swapped = gauss_g_at(q, [a3, a2, a1], n, m).unwrap();
            prop_assert!((g - swapped).norm() < 1e-12);
            prop_assert!(g.norm() <= 1.0 + 1e-12);
        }
    }
}
