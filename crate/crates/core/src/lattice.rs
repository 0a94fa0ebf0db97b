//! Exact enumeration of lattice configurations.
//!
//! The central object is the set of pairs (u, v) in Z^d × Z^d with
//! |u|² = |v|² = 2u·v = λ, i.e. the pinned equilateral triangles
//! {0, u, v} of squared side λ. Counting goes through the representation
//! list of λ as a sum of d squares, reduced by the hyperoctahedral group
//! (coordinate permutations and sign changes), which acts on pairs
//! diagonally and preserves the defining equations.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{dot, isqrt};

/// Maximum number of stored coordinates (count · d) in a representation list.
pub const REP_COORD_BUDGET: usize = 200_000_000;
/// Maximum number of materialized pairs.
pub const PAIR_BUDGET: usize = 20_000_000;

/// All u ∈ Z^d with |u|² = λ, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RepList {
    pub lambda: u64,
    pub d: usize,
    pub coords: Vec<i64>,
}

impl RepList {
    pub fn len(&self) -> usize {
        if self.d == 0 {
            0
        } else {
            self.coords.len() / self.d
        }
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn get(&self, i: usize) -> &[i64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[i64]> {
        self.coords.chunks_exact(self.d)
    }
}

/// Representations of λ as an ordered sum of d squares, in lexicographic order.
pub fn sum_of_squares_reps(lambda: u64, d: usize) -> Result<Vec<Vec<i64>>> {
    let list = rep_list(lambda, d)?;
    Ok(list.iter().map(|u| u.to_vec()).collect())
}

/// Flat form of [`sum_of_squares_reps`].
pub fn rep_list(lambda: u64, d: usize) -> Result<RepList> {
    if d == 0 {
        return Err(Error::Argument("dimension must be at least 1".into()));
    }
    let mut out = Vec::new();
    let mut cur = vec![0i64; d];
    fill_reps(lambda, 0, &mut cur, &mut out)?;
    Ok(RepList {
        lambda,
        d,
        coords: out,
    })
}

fn fill_reps(rem: u64, pos: usize, cur: &mut Vec<i64>, out: &mut Vec<i64>) -> Result<()> {
    let d = cur.len();
    if pos + 1 == d {
        let r = isqrt(rem);
        if r * r != rem {
            return Ok(());
        }
        let choices: &[i64] = if r == 0 { &[0] } else { &[-(r as i64), r as i64] };
        for &x in choices {
            cur[pos] = x;
            if out.len() + d > REP_COORD_BUDGET {
                return Err(Error::Resource(format!(
                    "representation list exceeds {REP_COORD_BUDGET} coordinates"
                )));
            }
            out.extend_from_slice(cur);
        }
        return Ok(());
    }
    let r = isqrt(rem) as i64;
    for x in -r..=r {
        cur[pos] = x;
        fill_reps(rem - (x * x) as u64, pos + 1, cur, out)?;
    }
    Ok(())
}

/// Number of x ∈ Z³ with |x|² = n.
pub fn r3(n: u64) -> u64 {
    let r = isqrt(n) as i64;
    let mut count = 0u64;
    for x in -r..=r {
        let rem = n - (x * x) as u64;
        let s = isqrt(rem) as i64;
        for y in -s..=s {
            let z2 = rem - (y * y) as u64;
            let z = isqrt(z2);
            if z * z == z2 {
                count += if z == 0 { 1 } else { 2 };
            }
        }
    }
    count
}

/// Number of pairs x, y ∈ Z³ with |x|² = a, x·y = b, |y|² = c.
pub fn nu_gram(a: u64, b: i64, c: u64) -> u128 {
    if (b as i128) * (b as i128) > (a as i128) * (c as i128) {
        return 0;
    }
    let xs = rep_list(a, 3).expect("small rep list");
    let ys = rep_list(c, 3).expect("small rep list");
    let mut count = 0u128;
    for x in xs.iter() {
        for y in ys.iter() {
            if dot(x, y) == b as i128 {
                count += 1;
            }
        }
    }
    count
}

/// The pinned triangles of squared side λ in dimension d.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrianglePairSet {
    pub lambda: u64,
    pub d: usize,
    pub count: u128,
    pub pairs: Option<Vec<(Vec<i64>, Vec<i64>)>>,
}

/// Whether u is the orbit representative: nonnegative, nonincreasing.
fn is_canonical(u: &[i64]) -> bool {
    u.iter().all(|&x| x >= 0) && u.windows(2).all(|w| w[0] >= w[1])
}

/// Size of the orbit of a canonical vector under permutations and sign flips.
fn orbit_size(u: &[i64]) -> u128 {
    let d = u.len();
    let mut size: u128 = (1..=d as u128).product();
    let mut i = 0;
    while i < d {
        let mut j = i;
        while j < d && u[j] == u[i] {
            j += 1;
        }
        size /= (1..=(j - i) as u128).product::<u128>();
        i = j;
    }
    size << u.iter().filter(|&&x| x != 0).count()
}

/// Group element taking the canonical form of u to u: `perm[k]` is the
/// coordinate of u holding the k-th largest magnitude, `sign[i]` its sign.
fn to_canonical(u: &[i64]) -> (Vec<i64>, Vec<usize>, Vec<i64>) {
    let mut perm: Vec<usize> = (0..u.len()).collect();
    perm.sort_by(|&a, &b| u[b].abs().cmp(&u[a].abs()).then(a.cmp(&b)));
    let canon = perm.iter().map(|&i| u[i].abs()).collect();
    let sign = u.iter().map(|&x| if x < 0 { -1 } else { 1 }).collect();
    (canon, perm, sign)
}

/// Completion lists for each canonical representative: for each canonical
/// u0, the indices of all v in `reps` with 2u0·v = λ.
fn canonical_completions(reps: &RepList) -> Vec<(Vec<i64>, Vec<u32>)> {
    let half = (reps.lambda / 2) as i128;
    let canon: Vec<&[i64]> = reps.iter().filter(|u| is_canonical(u)).collect();
    canon
        .par_iter()
        .map(|u0| {
            let vs = reps
                .iter()
                .enumerate()
                .filter(|(_, v)| dot(u0, v) == half)
                .map(|(i, _)| i as u32)
                .collect();
            (u0.to_vec(), vs)
        })
        .collect()
}

/// Exact #V_λ, optionally materializing the pairs in lexicographic order of u.
///
/// Pairs are counted per orbit of u: the number of completions v is the
/// same for every u in an orbit, so each canonical u contributes its orbit
/// size times its completion count.
pub fn count_triangle_pairs(lambda: u64, d: usize, materialize: bool) -> Result<TrianglePairSet> {
    if d == 0 {
        return Err(Error::Argument("dimension must be at least 1".into()));
    }
    let empty = |count| TrianglePairSet {
        lambda,
        d,
        count,
        pairs: materialize.then(Vec::new),
    };
    if lambda % 2 == 1 {
        return Ok(empty(0));
    }
    if lambda == 0 {
        let mut s = empty(1);
        if let Some(p) = s.pairs.as_mut() {
            p.push((vec![0; d], vec![0; d]));
        }
        return Ok(s);
    }
    let reps = crate::cache::rep_list_cached(lambda, d)?;
    let comps = canonical_completions(&reps);
    let count: u128 = comps
        .iter()
        .map(|(u0, vs)| orbit_size(u0) * vs.len() as u128)
        .sum();
    if !materialize {
        return Ok(empty(count));
    }
    if count > PAIR_BUDGET as u128 {
        return Err(Error::Resource(format!(
            "#V_λ = {count} exceeds the materialization budget {PAIR_BUDGET}"
        )));
    }
    let lookup: std::collections::HashMap<Vec<i64>, Vec<Vec<i64>>> = comps
        .into_iter()
        .map(|(u0, idx)| {
            let vs = idx.iter().map(|&i| reps.get(i as usize).to_vec()).collect();
            (u0, vs)
        })
        .collect();
    let mut pairs = Vec::with_capacity(count as usize);
    for u in reps.iter() {
        let (canon, perm, sign) = to_canonical(u);
        let mut block: Vec<Vec<i64>> = lookup[&canon]
            .iter()
            .map(|v0| {
                let mut v = vec![0i64; d];
                for (k, &i) in perm.iter().enumerate() {
                    v[i] = sign[i] * v0[k];
                }
                v
            })
            .collect();
        block.sort();
        pairs.extend(block.into_iter().map(|v| (u.to_vec(), v)));
    }
    Ok(TrianglePairSet {
        lambda,
        d,
        count,
        pairs: Some(pairs),
    })
}

/// c_λ(u) = #{v : (u,v) ∈ V_λ} for every u with |u|² = λ, in lexicographic order.
pub fn completion_counts(lambda: u64, d: usize) -> Result<Vec<(Vec<i64>, u64)>> {
    if lambda % 2 == 1 {
        return Ok(Vec::new());
    }
    if lambda == 0 {
        return Ok(vec![(vec![0; d], 1)]);
    }
    let reps = crate::cache::rep_list_cached(lambda, d)?;
    let comps: std::collections::HashMap<Vec<i64>, u64> = canonical_completions(&reps)
        .into_iter()
        .map(|(u0, vs)| (u0, vs.len() as u64))
        .collect();
    Ok(reps
        .iter()
        .map(|u| (u.to_vec(), comps[&to_canonical(u).0]))
        .collect())
}

/// #V_λ by plain ordered pair scan, no symmetry reduction. Quadratic in r_d(λ).
pub fn count_triangle_pairs_naive(lambda: u64, d: usize) -> Result<u128> {
    if lambda % 2 == 1 {
        return Ok(0);
    }
    let reps = rep_list(lambda, d)?;
    let half = (lambda / 2) as i128;
    Ok(reps
        .iter()
        .map(|u| reps.iter().filter(|v| dot(u, v) == half).count() as u128)
        .sum())
}

/// #V_λ by dynamic programming over coordinates.
///
/// The state after i coordinates is the partial triple
/// (Σx_k², Σx_k y_k, Σy_k²) in [0,λ] × [−λ,λ] × [0,λ]; partial sums of
/// squares can only grow, and the partial dot product stays in range by
/// Cauchy–Schwarz. The answer is the mass at (λ, λ/2, λ).
pub fn count_triangle_pairs_dp(lambda: u64, d: usize) -> u128 {
    if lambda % 2 == 1 || d == 0 {
        return if lambda == 0 && d == 0 { 1 } else { 0 };
    }
    let l = lambda as i64;
    let r = isqrt(lambda) as i64;
    // Transitions grouped by their (x², xy, y²) increment.
    let mut tmap: std::collections::BTreeMap<(i64, i64, i64), u128> = Default::default();
    for x in -r..=r {
        for y in -r..=r {
            *tmap.entry((x * x, x * y, y * y)).or_default() += 1;
        }
    }
    let trans: Vec<((i64, i64, i64), u128)> = tmap.into_iter().collect();
    let na = (l + 1) as usize;
    let nb = (2 * l + 1) as usize;
    let idx = |a: i64, b: i64, c: i64| ((a as usize * nb) + (b + l) as usize) * na + c as usize;
    let single = |a: i64, b: i64, c: i64| -> u128 {
        trans
            .iter()
            .find(|(t, _)| *t == (a, b, c))
            .map_or(0, |(_, m)| *m)
    };
    let mut cur = vec![0u128; na * nb * na];
    cur[idx(0, 0, 0)] = 1;
    for _ in 0..d - 1 {
        let mut next = vec![0u128; na * nb * na];
        for a in 0..=l {
            for b in -l..=l {
                for c in 0..=l {
                    let m = cur[idx(a, b, c)];
                    if m == 0 {
                        continue;
                    }
                    for &((ta, tb, tc), tm) in &trans {
                        let (a2, b2, c2) = (a + ta, b + tb, c + tc);
                        if a2 > l || c2 > l || b2.abs() > l {
                            continue;
                        }
                        next[idx(a2, b2, c2)] += m * tm;
                    }
                }
            }
        }
        cur = next;
    }
    let mut total = 0u128;
    for a in 0..=l {
        for b in -l..=l {
            for c in 0..=l {
                let m = cur[idx(a, b, c)];
                if m != 0 {
                    total += m * single(l - a, l / 2 - b, l - c);
                }
            }
        }
    }
    total
}

/// Unordered nondegenerate equilateral triangles with vertices in [0,n]^d.
///
/// Each triangle {A,B,C} is seen from each vertex as a pinned pair
/// (A−B, A−C) ∈ V_λ in both orders, so the pinned count is divided by 6.
pub fn triangles_in_box(n: u64, d: usize) -> Result<u128> {
    if d == 0 {
        return Err(Error::Argument("dimension must be at least 1".into()));
    }
    let n = n as i64;
    let max_lambda = d as u64 * (n * n) as u64;
    let mut pinned = 0u128;
    let mut lambda = 2;
    while lambda <= max_lambda {
        let reps = rep_list(lambda, d)?;
        // Only vectors fitting in the box can appear as edges.
        if reps.iter().any(|u| u.iter().all(|&x| x.abs() <= n)) {
            let set = count_triangle_pairs(lambda, d, true)?;
            for (u, v) in set.pairs.as_deref().unwrap_or(&[]) {
                let mut ways = 1u128;
                for i in 0..d {
                    let lo = 0.max(u[i]).max(v[i]);
                    let hi = n.min(n + u[i]).min(n + v[i]);
                    if hi < lo {
                        ways = 0;
                        break;
                    }
                    ways *= (hi - lo + 1) as u128;
                }
                pinned += ways;
            }
        }
        lambda += 2;
    }
    debug_assert_eq!(pinned % 6, 0);
    Ok(pinned / 6)
}

/// Direct enumeration oracle for [`triangles_in_box`]: all point triples.
pub fn triangles_in_box_direct(n: u64, d: usize) -> u128 {
    let side = n as i64 + 1;
    let total = side.pow(d as u32) as usize;
    let pts: Vec<Vec<i64>> = (0..total)
        .map(|mut k| {
            (0..d)
                .map(|_| {
                    let c = (k as i64) % side;
                    k /= side as usize;
                    c
                })
                .collect()
        })
        .collect();
    let dist = |a: &[i64], b: &[i64]| -> i64 { a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum() };
    let mut count = 0u128;
    for i in 0..total {
        for j in i + 1..total {
            let dij = dist(&pts[i], &pts[j]);
            for k in j + 1..total {
                if dist(&pts[i], &pts[k]) == dij && dist(&pts[j], &pts[k]) == dij {
                    count += 1;
                }
            }
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rep_examples() {
        assert_eq!(sum_of_squares_reps(0, 3).unwrap(), vec![vec![0, 0, 0]]);
        assert_eq!(sum_of_squares_reps(1, 3).unwrap().len(), 6);
        let two = sum_of_squares_reps(2, 3).unwrap();
        assert_eq!(two.len(), 12);
        let mut sorted = two.clone();
        sorted.sort();
        assert_eq!(sorted, two);
    }

    #[test]
    fn r3_examples() {
        assert_eq!(r3(0), 1);
        assert_eq!(r3(1), 6);
        assert_eq!(r3(7), 0);
        assert_eq!(r3(3), 8);
        for n in 0..60 {
            assert_eq!(r3(n) as usize, sum_of_squares_reps(n, 3).unwrap().len());
        }
    }

    #[test]
    fn gram_examples() {
        assert_eq!(nu_gram(1, 1, 1), 6);
        assert_eq!(nu_gram(1, 0, 1), 24);
        assert_eq!(nu_gram(2, 3, 2), 0);
        for a in 0..8u64 {
            for c in 0..8u64 {
                let total: u128 = (-8..=8).map(|b| nu_gram(a, b, c)).sum();
                assert_eq!(total, (r3(a) * r3(c)) as u128);
                for b in -4..=4 {
                    assert_eq!(nu_gram(a, b, c), nu_gram(c, b, a));
                    assert_eq!(nu_gram(a, b, c), nu_gram(a, -b, c));
                }
            }
        }
    }

    #[test]
    fn pair_count_basics() {
        assert_eq!(count_triangle_pairs(7, 5, false).unwrap().count, 0);
        assert_eq!(count_triangle_pairs(2, 2, false).unwrap().count, 0);
        for d in 1..6 {
            assert_eq!(count_triangle_pairs(0, d, false).unwrap().count, 1);
            assert_eq!(count_triangle_pairs_dp(0, d), 1);
        }
        assert_eq!(count_triangle_pairs_dp(1, 7), 0);
        // u ranges over the 12 vectors ±e_i ± e_j; each has 4 completions
        // sharing exactly one signed coordinate with it.
        let s = count_triangle_pairs(2, 3, true).unwrap();
        assert_eq!(s.count, count_triangle_pairs_dp(2, 3));
        assert_eq!(s.count, 48);
        for (u, v) in s.pairs.unwrap() {
            let (a, b, c) = crate::numeric::quadratic_triple(&u, &v).unwrap();
            assert_eq!((a, b, c), (2, 2, 2));
        }
    }

    #[test]
    fn orbit_reduction_matches_naive_scan() {
        for d in 1..6 {
            for lambda in (0..=24).step_by(2) {
                let fast = count_triangle_pairs(lambda, d, false).unwrap().count;
                assert_eq!(fast, count_triangle_pairs_naive(lambda, d).unwrap(), "d={d} λ={lambda}");
                let mat = count_triangle_pairs(lambda, d, true).unwrap();
                assert_eq!(mat.pairs.as_ref().unwrap().len() as u128, fast);
            }
        }
    }

    #[test]
    fn d3_count_is_gram_count() {
        for lambda in (2..=30).step_by(2) {
            assert_eq!(
                count_triangle_pairs(lambda, 3, false).unwrap().count,
                nu_gram(lambda, lambda as i64 / 2, lambda)
            );
        }
    }

    #[test]
    fn completion_counts_sum_to_pair_count() {
        for lambda in [2u64, 4, 6, 8] {
            let cc = completion_counts(lambda, 5).unwrap();
            let total: u128 = cc.iter().map(|(_, c)| *c as u128).sum();
            assert_eq!(total, count_triangle_pairs(lambda, 5, false).unwrap().count);
        }
    }

    #[test]
    fn boxes() {
        for n in 0..=6 {
            assert_eq!(triangles_in_box(n, 2).unwrap(), 0);
        }
        assert_eq!(triangles_in_box(0, 3).unwrap(), 0);
        // The unit cube holds 8 equilateral triangles, one per cut-off corner.
        assert_eq!(triangles_in_box_direct(1, 3), 8);
        for n in 0..=2 {
            assert_eq!(triangles_in_box(n, 3).unwrap(), triangles_in_box_direct(n, 3));
        }
    }
}
