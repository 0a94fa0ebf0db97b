//! Convolution counting for the mean-value systems.
//!
//! J_{s,2,2}(N) counts solutions of the five equations Σx = Σx', Σy = Σy',
//! Σx² = Σx'², Σxy = Σx'y', Σy² = Σy'² in s + s points of [−N,N]²; T(N) is
//! the same count for the three quadratic equations with s = 3. Both are
//! Σ_n r(n)² where r is an s-fold additive convolution of the point
//! distribution of the monomial vector.

use rayon::prelude::*;
use rustc_hash::FxHashMap;

use crate::error::{Error, Result};

/// Largest product of support sizes a single convolution may touch.
pub const CONVOLUTION_BUDGET: u128 = 20_000_000_000;

/// A finitely supported measure on Z^K with exact multiplicities.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MomentDistribution<const K: usize> {
    pub support: FxHashMap<[i64; K], u128>,
}

impl<const K: usize> MomentDistribution<K> {
    /// The point mass at the origin, neutral for convolution.
    pub fn unit() -> Self {
        let mut support = FxHashMap::default();
        support.insert([0; K], 1);
        Self { support }
    }

    pub fn from_points(points: impl IntoIterator<Item = [i64; K]>) -> Self {
        let mut support = FxHashMap::default();
        for p in points {
            *support.entry(p).or_insert(0) += 1;
        }
        Self { support }
    }

    pub fn total_mass(&self) -> u128 {
        self.support.values().sum()
    }

    /// Σ_n r(n)².
    pub fn sum_of_squares(&self) -> Result<u128> {
        self.support.values().try_fold(0u128, |acc, &m| {
            m.checked_mul(m)
                .and_then(|sq| acc.checked_add(sq))
                .ok_or_else(overflow)
        })
    }

    pub fn convolve(&self, other: &Self) -> Result<Self> {
        check_budget(self.support.len(), other.support.len())?;
        let mut support: FxHashMap<[i64; K], u128> = FxHashMap::default();
        for (ka, &ma) in &self.support {
            for (kb, &mb) in &other.support {
                let mut k = [0i64; K];
                for i in 0..K {
                    k[i] = ka[i] + kb[i];
                }
                let m = ma.checked_mul(mb).ok_or_else(overflow)?;
                let slot = support.entry(k).or_insert(0);
                *slot = slot.checked_add(m).ok_or_else(overflow)?;
            }
        }
        Ok(Self { support })
    }

    /// s-fold convolution power.
    pub fn power(&self, s: u32) -> Result<Self> {
        let mut acc = Self::unit();
        for _ in 0..s {
            acc = acc.convolve(self)?;
        }
        Ok(acc)
    }
}

fn overflow() -> Error {
    Error::Resource("exact count overflowed 128 bits".into())
}

fn check_budget(a: usize, b: usize) -> Result<()> {
    if a as u128 * b as u128 > CONVOLUTION_BUDGET {
        return Err(Error::Resource(format!(
            "convolution of supports {a} x {b} exceeds budget"
        )));
    }
    Ok(())
}

/// Distribution of (x, y, x², xy, y²) over the grid [−N,N]².
pub fn vinogradov_points(n: i64) -> MomentDistribution<5> {
    MomentDistribution::from_points(
        (-n..=n).flat_map(|x| (-n..=n).map(move |y| [x, y, x * x, x * y, y * y])),
    )
}

/// Distribution of (x², xy, y²) over the grid [−N,N]².
pub fn quadratic_points(n: i64) -> MomentDistribution<3> {
    MomentDistribution::from_points(
        (-n..=n).flat_map(|x| (-n..=n).map(move |y| [x * x, x * y, y * y])),
    )
}

/// J_{s,2,2}(N), exactly.
///
/// r_s is split as r_{s₁} * r_{s₂} and Σ r_s² is accumulated one value of
/// the linear part (Σx, Σy) at a time, so only one slice of r_s is ever
/// held in memory. The maps (x,y) → (−x,y) and (x,y) → (y,x) permute the
/// solutions and act on the linear part as the dihedral group of the
/// square, so only slices with 0 ≤ Σy ≤ Σx are formed.
pub fn vinogradov_count(s: u32, n: u32) -> Result<u128> {
    if s == 0 || n == 0 {
        return Ok(1);
    }
    let base = vinogradov_points(n as i64);
    let s1 = s / 2;
    let a = base.power(s1)?;
    let b = base.power(s - s1)?;
    check_budget(a.support.len(), b.support.len())?;
    type Groups = FxHashMap<(i64, i64), Vec<([i64; 3], u128)>>;
    let group = |m: &MomentDistribution<5>| -> Groups {
        let mut g: Groups = FxHashMap::default();
        let mut keys: Vec<_> = m.support.iter().collect();
        keys.sort();
        for (k, &v) in keys {
            g.entry((k[0], k[1])).or_default().push(([k[2], k[3], k[4]], v));
        }
        g
    };
    let ga = group(&a);
    let gb = group(&b);
    let reach = (s * n) as i64;
    // Pack the quadratic part of a slice key into one integer.
    let qm = reach * n as i64;
    let pack = |q: [i64; 3]| -> u64 { ((q[0] * (2 * qm + 1) + q[1] + qm) * (qm + 1) + q[2]) as u64 };
    let targets: Vec<(i64, i64)> = (0..=reach)
        .flat_map(|x| (0..=x).map(move |y| (x, y)))
        .collect();
    let slices: Result<Vec<u128>> = targets
        .par_iter()
        .map(|&(tx, ty)| {
            let mut local: FxHashMap<u64, u128> = FxHashMap::default();
            for (&(x1, y1), la) in &ga {
                let Some(lb) = gb.get(&(tx - x1, ty - y1)) else {
                    continue;
                };
                for (qa, ma) in la {
                    for (qb, mb) in lb {
                        let key = pack([qa[0] + qb[0], qa[1] + qb[1], qa[2] + qb[2]]);
                        let m = ma.checked_mul(*mb).ok_or_else(overflow)?;
                        let slot = local.entry(key).or_insert(0);
                        *slot = slot.checked_add(m).ok_or_else(overflow)?;
                    }
                }
            }
            let slice = local.values().try_fold(0u128, |acc, &m| {
                m.checked_mul(m)
                    .and_then(|sq| acc.checked_add(sq))
                    .ok_or_else(overflow)
            })?;
            slice
                .checked_mul(dihedral_orbit(tx, ty))
                .ok_or_else(overflow)
        })
        .collect();
    slices?
        .into_iter()
        .try_fold(0u128, |acc, v| acc.checked_add(v).ok_or_else(overflow))
}

fn dihedral_orbit(x: i64, y: i64) -> u128 {
    let mut images = vec![
        (x, y),
        (-x, y),
        (x, -y),
        (-x, -y),
        (y, x),
        (-y, x),
        (y, -x),
        (-y, -x),
    ];
    images.sort();
    images.dedup();
    images.len() as u128
}

/// T(N): solutions of the three quadratic equations in 3 + 3 points of [−N,N]².
///
/// Σ r₃(n)² is accumulated per value of Σx², on a dense plane over the
/// remaining two coordinates.
pub fn sixth_moment_count(n: u32) -> Result<u128> {
    if n == 0 {
        return Ok(1);
    }
    if n > 24 {
        return Err(Error::Resource(format!("sixth_moment_count: N = {n} is beyond budget")));
    }
    let n = n as i64;
    let one = quadratic_points(n);
    let two = one.convolve(&one)?;
    let by_first = |m: &MomentDistribution<3>| -> Vec<Vec<(i64, i64, u128)>> {
        let top = m.support.keys().map(|k| k[0]).max().unwrap_or(0) as usize;
        let mut out = vec![Vec::new(); top + 1];
        let mut keys: Vec<_> = m.support.iter().collect();
        keys.sort();
        for (k, &v) in keys {
            out[k[0] as usize].push((k[1], k[2], v));
        }
        out
    };
    let g1 = by_first(&one);
    let g2 = by_first(&two);
    let m = 3 * n * n;
    let width = (2 * m + 1) as usize;
    let height = (m + 1) as usize;
    let total: Result<Vec<u128>> = (0..=m)
        .into_par_iter()
        .map(|t1| {
            let mut plane = vec![0u128; width * height];
            for (q1, la) in g2.iter().enumerate() {
                let rest = t1 - q1 as i64;
                if rest < 0 || rest as usize >= g1.len() {
                    continue;
                }
                for &(b2, c2, ma) in la {
                    for &(b1, c1, mb) in &g1[rest as usize] {
                        let idx = (b1 + b2 + m) as usize * height + (c1 + c2) as usize;
                        plane[idx] += ma * mb;
                    }
                }
            }
            plane.iter().try_fold(0u128, |acc, &v| {
                v.checked_mul(v)
                    .and_then(|sq| acc.checked_add(sq))
                    .ok_or_else(overflow)
            })
        })
        .collect();
    Ok(total?.iter().sum())
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}
