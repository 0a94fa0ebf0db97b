//! The triangle averaging operator, its multiplier and the main-term approximation.
//!
//! T_λ(f, g)(x) = λ^{3−d} Σ_{(u,v) ∈ V_λ} f(x−u) g(x−v), and
//! T̂_λ(ξ, η) = λ^{3−d} Σ_{(u,v) ∈ V_λ} e(ξ·u + η·v). The main-term
//! multiplier is
//! M̂_λ(ξ) = c_d Σ_{q ≤ q_max} Σ_m G_λ(q; m, 0) Φ(qξ − m) dS̃(λ^{1/2}(ξ − m/q)).

use std::collections::{BTreeMap, HashMap};

use num_rational::Ratio;
use rand::Rng;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::gauss::{LinearFrequencyTable, BIG_G_MAX_Q};
pub use crate::grid::GridFunction;
use crate::lattice::{completion_counts, count_triangle_pairs};
use crate::numeric::{canonical_sum, canonical_sum_complex, cutoff_phi, e, round_half_even, C64};
use crate::oscillatory::{compute_c_d, sphere_ft_radial};
use crate::report::VerificationReport;
use crate::rng::stream;

fn normalization(lambda: u64, d: usize) -> f64 {
    (lambda as f64).powi(3 - d as i32)
}

/// Merge per-chunk accumulators in chunk order, so the result does not
/// depend on how chunks were scheduled.
fn merge_chunks(d: usize, chunks: Vec<HashMap<Vec<i64>, C64>>, scale: f64) -> Result<GridFunction> {
    let mut total: BTreeMap<Vec<i64>, C64> = BTreeMap::new();
    for chunk in chunks {
        for (k, v) in chunk {
            *total.entry(k).or_default() += v;
        }
    }
    GridFunction::from_entries(d, total.into_iter().map(|(k, v)| (k, v * scale)))
}

const CHUNK: usize = 4096;

/// T_λ(f, g) by direct summation over the materialized pairs.
pub fn triangle_average_t(lambda: u64, f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    f.same_dim(g)?;
    let d = f.dim();
    if lambda % 2 == 1 || f.is_empty() || g.is_empty() {
        return Ok(GridFunction::zero(d));
    }
    let pairs = count_triangle_pairs(lambda, d, true)?.pairs.unwrap_or_default();
    let fe: Vec<(&Vec<i64>, &C64)> = f.iter().collect();
    let chunks: Vec<HashMap<Vec<i64>, C64>> = pairs
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc: HashMap<Vec<i64>, C64> = HashMap::new();
            let mut y = vec![0i64; d];
            for (u, v) in chunk {
                for (a, fa) in &fe {
                    for i in 0..d {
                        y[i] = a[i] + u[i] - v[i];
                    }
                    let gv = g.get(&y);
                    if gv != C64::default() {
                        let x: Vec<i64> = a.iter().zip(u).map(|(s, t)| s + t).collect();
                        *acc.entry(x).or_default() += **fa * gv;
                    }
                }
            }
            acc
        })
        .collect();
    merge_chunks(d, chunks, normalization(lambda, d))
}

/// T_λ f = T_λ(f, 1) = λ^{3−d} Σ_u c_λ(u) f(x − u).
pub fn linearized_t(lambda: u64, f: &GridFunction) -> Result<GridFunction> {
    let d = f.dim();
    if lambda % 2 == 1 || f.is_empty() {
        return Ok(GridFunction::zero(d));
    }
    let weights = completion_counts(lambda, d)?;
    let fe: Vec<(&Vec<i64>, &C64)> = f.iter().collect();
    let chunks: Vec<HashMap<Vec<i64>, C64>> = weights
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc: HashMap<Vec<i64>, C64> = HashMap::new();
            for (u, c) in chunk {
                for (a, fa) in &fe {
                    let x: Vec<i64> = a.iter().zip(u).map(|(s, t)| s + t).collect();
                    *acc.entry(x).or_default() += **fa * *c as f64;
                }
            }
            acc
        })
        .collect();
    merge_chunks(d, chunks, normalization(lambda, d))
}

/// sup over even λ ∈ [Λ/2, Λ) of |T_λ(f, g)|, or of |T_λ f| when g is absent.
pub fn dyadic_maximal(big_lambda: u64, f: &GridFunction, g: Option<&GridFunction>) -> Result<GridFunction> {
    if big_lambda < 2 {
        return Err(Error::Argument("Λ must be at least 2".into()));
    }
    let lambdas: Vec<u64> = (big_lambda.div_ceil(2)..big_lambda).filter(|l| l % 2 == 0).collect();
    maximal_over(&lambdas, f, g)
}

/// Pointwise sup of |T_λ(f, g)| (or |T_λ f|) over the given λ.
pub fn maximal_over(lambdas: &[u64], f: &GridFunction, g: Option<&GridFunction>) -> Result<GridFunction> {
    let mut sup: BTreeMap<Vec<i64>, f64> = BTreeMap::new();
    for &lambda in lambdas {
        let t = match g {
            Some(g) => triangle_average_t(lambda, f, g)?,
            None => linearized_t(lambda, f)?,
        };
        for (k, v) in t.iter() {
            let s = sup.entry(k.clone()).or_insert(0.0);
            *s = s.max(v.norm());
        }
    }
    GridFunction::from_entries(f.dim(), sup.into_iter().map(|(k, v)| (k, C64::new(v, 0.0))))
}

/// ‖f‖_p, p ≥ 1 or ∞.
pub fn lp_norm(f: &GridFunction, p: f64) -> Result<f64> {
    f.lp_norm(p)
}

/// T̂_λ(ξ, η). With η = 0 the sum runs over u weighted by c_λ(u); otherwise
/// the pairs are materialized.
pub fn multiplier_t_hat(lambda: u64, xi: &[f64], eta: &[f64]) -> Result<C64> {
    let d = xi.len();
    if eta.len() != d || d == 0 {
        return Err(Error::Argument("ξ and η must have the same positive dimension".into()));
    }
    if lambda % 2 == 1 {
        return Ok(C64::new(0.0, 0.0));
    }
    let frac: Vec<f64> = xi.iter().map(|v| v - v.floor()).collect();
    let terms: Vec<C64> = if eta.iter().all(|&v| v == 0.0) {
        completion_counts(lambda, d)?
            .par_iter()
            .map(|(u, c)| e(phase(&frac, u)) * *c as f64)
            .collect()
    } else {
        let fe: Vec<f64> = eta.iter().map(|v| v - v.floor()).collect();
        count_triangle_pairs(lambda, d, true)?
            .pairs
            .unwrap_or_default()
            .par_iter()
            .map(|(u, v)| e(phase(&frac, u) + phase(&fe, v)))
            .collect()
    };
    Ok(canonical_sum_complex(&terms) * normalization(lambda, d))
}

/// ξ·u mod 1.
fn phase(xi: &[f64], u: &[i64]) -> f64 {
    let s: f64 = xi.iter().zip(u).map(|(a, &b)| {
        let v = a * b as f64;
        v - v.floor()
    }).sum();
    s - s.floor()
}

/// M̂_λ with the per-q frequency tables kept for repeated evaluation. The
/// approximation property needs d ≥ 7; smaller d is accepted for testing
/// the machinery.
pub struct MainTermMultiplier {
    pub lambda: u64,
    pub d: usize,
    pub q_max: u64,
    pub c_d: f64,
    tables: Vec<LinearFrequencyTable>,
}

impl MainTermMultiplier {
    pub fn new(lambda: u64, d: usize, q_max: u64) -> Result<Self> {
        if d < 3 {
            return Err(Error::Argument("the main-term multiplier needs d >= 3".into()));
        }
        if q_max == 0 || q_max > BIG_G_MAX_Q {
            return Err(Error::Argument(format!("q_max must lie in 1..={BIG_G_MAX_Q}")));
        }
        let tables = (1..=q_max).map(LinearFrequencyTable::new).collect::<Result<_>>()?;
        Ok(Self { lambda, d, q_max, c_d: compute_c_d(d as u32)?, tables })
    }

    /// Contribution of one modulus q (before the factor c_d).
    pub fn term(&self, q: u64, xi: &[f64]) -> C64 {
        let qf = q as f64;
        let m: Vec<i64> = xi.iter().map(|&x| round_half_even(qf * x)).collect();
        let offsets: Vec<f64> = xi.iter().zip(&m).map(|(&x, &mj)| qf * x - mj as f64).collect();
        let phi = cutoff_phi(&offsets);
        if phi == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let rho = (self.lambda as f64).sqrt()
            * xi.iter().zip(&m).map(|(&x, &mj)| (x - mj as f64 / qf).powi(2)).sum::<f64>().sqrt();
        self.tables[q as usize - 1].big_g(self.lambda, &m) * phi * sphere_ft_radial(self.d as u32, rho)
    }

    pub fn value(&self, xi: &[f64]) -> Result<C64> {
        if xi.len() != self.d {
            return Err(Error::Argument(format!("frequency has {} components, expected {}", xi.len(), self.d)));
        }
        let terms: Vec<C64> = (1..=self.q_max).map(|q| self.term(q, xi)).collect();
        Ok(canonical_sum_complex(&terms) * self.c_d)
    }
}

/// M̂_λ(ξ) for a single frequency.
pub fn main_term_multiplier_m_hat(lambda: u64, xi: &[f64], q_max: u64) -> Result<C64> {
    MainTermMultiplier::new(lambda, xi.len(), q_max)?.value(xi)
}

/// Largest L^d box accepted by [`apply_main_term_m`].
pub const BOX_BUDGET: usize = 1 << 22;

/// M_λ f on the torus (Z/L)^d: periodize f, multiply its DFT by M̂_λ(k/L),
/// invert. Values are reported at the representatives in [−L/2, L/2)^d.
pub fn apply_main_term_m(m_hat: &MainTermMultiplier, f: &GridFunction, l: usize) -> Result<GridFunction> {
    let d = f.dim();
    if d != m_hat.d {
        return Err(Error::Argument("dimension mismatch".into()));
    }
    let guard = 2 * f.diameter() as usize + 4 * (m_hat.lambda as f64).sqrt().ceil() as usize;
    if l <= guard {
        return Err(Error::Argument(format!("box size {l} must exceed {guard} to avoid wraparound")));
    }
    let size = l.checked_pow(d as u32).filter(|&s| s <= BOX_BUDGET).ok_or_else(|| Error::Resource(format!("box {l}^{d} exceeds the budget")))?;
    let index = |x: &[i64]| x.iter().rev().fold(0usize, |acc, &c| acc * l + c.rem_euclid(l as i64) as usize);
    let mut data = vec![C64::new(0.0, 0.0); size];
    for (x, v) in f.iter() {
        data[index(x)] += *v;
    }
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(l);
    let inv = planner.plan_fft_inverse(l);
    let along = |data: &mut [C64], plan: &std::sync::Arc<dyn rustfft::Fft<f64>>| {
        let mut stride = 1;
        for _ in 0..d {
            let mut line = vec![C64::new(0.0, 0.0); l];
            for start in 0..size {
                if (start / stride) % l != 0 {
                    continue;
                }
                for k in 0..l {
                    line[k] = data[start + k * stride];
                }
                plan.process(&mut line);
                for k in 0..l {
                    data[start + k * stride] = line[k];
                }
            }
            stride *= l;
        }
    };
    along(&mut data, &fwd);
    let coords = |mut i: usize| -> Vec<i64> {
        (0..d)
            .map(|_| {
                let c = (i % l) as i64;
                i /= l;
                if c >= (l / 2) as i64 { c - l as i64 } else { c }
            })
            .collect()
    };
    let mults: Vec<C64> = (0..size)
        .into_par_iter()
        .map(|i| {
            let k: Vec<f64> = coords(i).iter().map(|&c| c as f64 / l as f64).collect();
            m_hat.value(&k).unwrap()
        })
        .collect();
    for (v, m) in data.iter_mut().zip(&mults) {
        *v *= m;
    }
    along(&mut data, &inv);
    let norm = 1.0 / size as f64;
    GridFunction::from_entries(d, data.iter().enumerate().map(|(i, v)| (coords(i), v * norm)))
}

pub const ANCHOR_MAIN_TERM: &str = "main-term-multiplier-approximates-operator";
pub const ANCHOR_PARSEVAL: &str = "multiplier-at-zero-counts-pairs";
pub const ANCHOR_DOMINATION: &str = "T*(f,g) <= |g|_inf T*(|f|,1)";

/// Largest denominator whose neighbourhoods the discrepancy sampler targets.
pub const SAMPLER_Q: u64 = 8;

/// Defensive importance sampler on (Z/L)^d: with probability ½ a uniform
/// point, otherwise a uniform point of the box of half-width ⌈L/4q⌉ around
/// round(L·m/q), for q uniform in 1..=SAMPLER_Q and m uniform in (Z/q)^d.
/// Both T̂ and M̂ concentrate near rationals with small denominator, so
/// uniform sampling alone leaves the estimate at the mercy of rare hits.
struct RationalSampler {
    l: i64,
    d: usize,
}

impl RationalSampler {
    fn width(&self, q: i64) -> i64 {
        (self.l + 4 * q - 1) / (4 * q)
    }

    fn center(&self, q: i64, m: i64) -> i64 {
        (self.l * m + q / 2).div_euclid(q).rem_euclid(self.l)
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> Vec<i64> {
        if rng.gen::<bool>() {
            return (0..self.d).map(|_| rng.gen_range(0..self.l)).collect();
        }
        let q = rng.gen_range(1..=SAMPLER_Q as i64);
        let w = self.width(q);
        (0..self.d)
            .map(|_| (self.center(q, rng.gen_range(0..q)) + rng.gen_range(-w..=w)).rem_euclid(self.l))
            .collect()
    }

    /// L^{−d} divided by the proposal probability of k; at most 2.
    fn weight(&self, k: &[i64]) -> f64 {
        let (l, d) = (self.l, self.d as i32);
        let mut near = 0.0;
        for q in 1..=SAMPLER_Q as i64 {
            let w = self.width(q);
            let mut hits = 1.0;
            for &kj in k {
                let n = (0..q)
                    .filter(|&m| {
                        let gap = (kj - self.center(q, m)).rem_euclid(l);
                        gap.min(l - gap) <= w
                    })
                    .count();
                hits *= n as f64;
                if n == 0 {
                    break;
                }
            }
            let box_prob = ((q * (2 * w + 1)) as f64).powi(-d);
            near += hits * box_prob * (l as f64).powi(d);
        }
        1.0 / (0.5 + 0.5 * near / SAMPLER_Q as f64)
    }
}

/// Relative ℓ² distance between T_λδ₀ and M_λδ₀ on the torus (Z/L)^d.
///
/// By Parseval, ‖T_λδ₀ − M_λδ₀‖² = L^{−d}Σ_k |T̂_λ(k/L) − M̂_λ(k/L)|², while
/// ‖T_λδ₀‖² = λ^{6−2d}Σ_u c_λ(u)² exactly. The numerator is estimated by
/// importance sampling k near rationals of small denominator (see
/// [`RationalSampler`]); the report carries the standard error.
pub fn main_term_discrepancy(lambda: u64, d: usize, l: u64, q_max: u64, samples: usize, seed: u64) -> Result<VerificationReport> {
    if l < 2 || samples == 0 {
        return Err(Error::Argument("need L >= 2 and at least one sample".into()));
    }
    let weights = completion_counts(lambda, d)?;
    let norm = normalization(lambda, d);
    let denom = canonical_sum(&weights.iter().map(|(_, c)| (*c as f64 * norm).powi(2)).collect::<Vec<_>>());
    let m_hat = MainTermMultiplier::new(lambda, d, q_max)?;
    let sampler = RationalSampler { l: l as i64, d };
    let sq: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(seed, i as u64);
            let k = sampler.draw(&mut rng);
            let w = sampler.weight(&k);
            let xi: Vec<f64> = k.iter().map(|&v| v as f64 / l as f64).collect();
            let t: f64 = canonical_sum(&weights.iter().map(|(u, c)| *c as f64 * (2.0 * std::f64::consts::PI * phase(&xi, u)).cos()).collect::<Vec<_>>()) * norm;
            let centered: Vec<f64> = xi.iter().map(|&v| if v >= 0.5 { v - 1.0 } else { v }).collect();
            w * (m_hat.value(&centered).unwrap() - t).norm_sqr()
        })
        .collect();
    let mean = canonical_sum(&sq) / samples as f64;
    let var = canonical_sum(&sq.iter().map(|v| (v - mean).powi(2)).collect::<Vec<_>>()) / (samples.max(2) - 1) as f64;
    let rel = (mean / denom).sqrt();
    let stderr = 0.5 * (var / samples as f64).sqrt() / (mean * denom).sqrt().max(1e-300);
    let mut r = VerificationReport::new(
        "main-term-discrepancy",
        json!({"lambda": lambda, "d": d, "L": l, "q_max": q_max, "samples": samples, "seed": seed}),
    );
    r.hard("relative l2 discrepancy is finite", ANCHOR_MAIN_TERM, rel, 0.0, 0.0, rel.is_finite())
        .with_note(format!("standard error {stderr:.3e}"));
    r.data = json!({"relative_discrepancy": rel, "standard_error": stderr, "norm_T_sq": denom, "mean_sq_gap": mean});
    Ok(r)
}

/// p₀(d) = max(32/(d+8), (d+4)/(d−2)) and δ₂(d) = min(1/4, (d−8)/8).
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct TheoryConstants {
    pub d: u32,
    pub p0: f64,
    pub delta2: f64,
    /// p₀ is only meaningful for d ≥ 9.
    pub p0_applies: bool,
}

pub fn theory_constants(d: u32) -> Result<TheoryConstants> {
    if d < 7 {
        return Err(Error::Argument("theory constants need d >= 7".into()));
    }
    let d = d as i64;
    let p0 = Ratio::new(32, d + 8).max(Ratio::new(d + 4, d - 2));
    let delta2 = Ratio::new(1, 4).min(Ratio::new(d - 8, 8));
    let f = |r: Ratio<i64>| *r.numer() as f64 / *r.denom() as f64;
    Ok(TheoryConstants { d: d as u32, p0: f(p0), delta2: f(delta2), p0_applies: d >= 9 })
}

/// Random complex function on the box [−r, r]^d with `points` entries.
pub fn random_function<R: Rng>(rng: &mut R, d: usize, r: i64, points: usize, unit: bool) -> GridFunction {
    let entries: Vec<(Vec<i64>, C64)> = (0..points)
        .map(|_| {
            let x = (0..d).map(|_| rng.gen_range(-r..=r)).collect();
            let v = if unit {
                e(rng.gen::<f64>()) * rng.gen::<f64>()
            } else {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            };
            (x, v)
        })
        .collect();
    GridFunction::from_entries(d, entries).expect("finite entries")
}

/// Pointwise T*(f, g) ≤ ‖g‖_∞ T*(|f|, 1) over a dyadic window, on random pairs.
pub fn check_domination(big_lambda: u64, d: usize, pairs: usize, seed: u64) -> Result<VerificationReport> {
    let mut worst = f64::NEG_INFINITY;
    for i in 0..pairs {
        let mut rng = stream(seed, i as u64);
        let f = random_function(&mut rng, d, 2, 4, false);
        let g = random_function(&mut rng, d, 3, 40, true);
        let lhs = dyadic_maximal(big_lambda, &f, Some(&g))?;
        let rhs = dyadic_maximal(big_lambda, &f.abs(), None)?;
        let gi = g.sup_norm();
        for (x, v) in lhs.iter() {
            let bound = gi * rhs.get(x).re;
            worst = worst.max(v.re - bound * (1.0 + 1e-12));
        }
    }
    let mut r = VerificationReport::new("domination", json!({"Lambda": big_lambda, "d": d, "pairs": pairs, "seed": seed}));
    let worst = worst.max(0.0);
    r.hard("max pointwise excess", ANCHOR_DOMINATION, worst, 0.0, 0.0, worst <= 0.0);
    Ok(r)
}
