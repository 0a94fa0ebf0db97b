//! Finitely supported complex functions on Z^d.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{canonical_sum, C64};

/// A finitely supported function Z^d → C. Exact zeros are never stored and
/// entries iterate in lexicographic order of their coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    d: usize,
    entries: BTreeMap<Vec<i64>, C64>,
}

#[derive(Serialize, Deserialize)]
struct WireEntry {
    coords: Vec<i64>,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct Wire {
    d: usize,
    entries: Vec<WireEntry>,
}

impl GridFunction {
    pub fn zero(d: usize) -> Self {
        Self { d, entries: BTreeMap::new() }
    }

    /// The point mass at `at`.
    pub fn delta(at: &[i64]) -> Self {
        let mut f = Self::zero(at.len());
        f.entries.insert(at.to_vec(), C64::new(1.0, 0.0));
        f
    }

    pub fn from_entries(d: usize, entries: impl IntoIterator<Item = (Vec<i64>, C64)>) -> Result<Self> {
        let mut f = Self::zero(d);
        for (k, v) in entries {
            if k.len() != d {
                return Err(Error::Argument(format!("point of dimension {} in a {d}-dimensional function", k.len())));
            }
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::Argument("grid values must be finite".into()));
            }
            f.add_at(k, v);
        }
        Ok(f)
    }

    /// Indicator of the box lo ≤ x ≤ hi (coordinatewise).
    pub fn box_indicator(lo: &[i64], hi: &[i64]) -> Self {
        let d = lo.len();
        let mut f = Self::zero(d);
        let mut x = lo.to_vec();
        if lo.iter().zip(hi).any(|(a, b)| a > b) {
            return f;
        }
        loop {
            f.entries.insert(x.clone(), C64::new(1.0, 0.0));
            let mut i = 0;
            while i < d {
                if x[i] < hi[i] {
                    x[i] += 1;
                    break;
                }
                x[i] = lo[i];
                i += 1;
            }
            if i == d {
                return f;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, x: &[i64]) -> C64 {
        self.entries.get(x).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Vec<i64>, &C64)> {
        self.entries.iter()
    }

    /// Adds `v` at `x`, dropping the entry if it becomes exactly zero.
    pub fn add_at(&mut self, x: Vec<i64>, v: C64) {
        use std::collections::btree_map::Entry;
        match self.entries.entry(x) {
            Entry::Occupied(mut o) => {
                *o.get_mut() += v;
                if *o.get() == C64::default() {
                    o.remove();
                }
            }
            Entry::Vacant(slot) => {
                if v != C64::default() {
                    slot.insert(v);
                }
            }
        }
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(k, v)| (k.clone(), f(*v)))
            .filter(|(_, v)| *v != C64::default())
            .collect();
        Self { d: self.d, entries }
    }

    pub fn scale(&self, c: C64) -> Self {
        self.map(|v| v * c)
    }

    pub fn abs(&self) -> Self {
        self.map(|v| C64::new(v.norm(), 0.0))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.same_dim(other)?;
        let mut out = self.clone();
        for (k, v) in &other.entries {
            out.add_at(k.clone(), *v);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(C64::new(-1.0, 0.0)))
    }

    /// x ↦ f(x − w).
    pub fn translate(&self, w: &[i64]) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(k, v)| (k.iter().zip(w).map(|(a, b)| a + b).collect(), *v))
            .collect();
        Self { d: self.d, entries }
    }

    pub fn sup_norm(&self) -> f64 {
        self.entries.values().fold(0.0, |m, v| m.max(v.norm()))
    }

    /// ‖f‖_p for p ≥ 1; p = ∞ gives the sup norm.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        if !(p >= 1.0) {
            return Err(Error::Argument(format!("ℓ^p norm needs p >= 1, got {p}")));
        }
        if p.is_infinite() {
            return Ok(self.sup_norm());
        }
        let m = self.sup_norm();
        if m == 0.0 {
            return Ok(0.0);
        }
        // Scaled by the sup norm so large p neither overflows nor underflows.
        let parts: Vec<f64> = self.entries.values().map(|v| (v.norm() / m).powf(p)).collect();
        Ok(m * canonical_sum(&parts).powf(1.0 / p))
    }

    pub fn same_dim(&self, other: &Self) -> Result<()> {
        if self.d != other.d {
            return Err(Error::Argument(format!("dimension mismatch: {} vs {}", self.d, other.d)));
        }
        Ok(())
    }

    /// Largest coordinatewise extent of the support.
    pub fn diameter(&self) -> i64 {
        let mut best = 0;
        for i in 0..self.d {
            let lo = self.entries.keys().map(|k| k[i]).min();
            let hi = self.entries.keys().map(|k| k[i]).max();
            if let (Some(lo), Some(hi)) = (lo, hi) {
                best = best.max(hi - lo);
            }
        }
        best
    }

    fn wire(&self) -> Wire {
        Wire {
            d: self.d,
            entries: self
                .entries
                .iter()
                .map(|(k, v)| WireEntry { coords: k.clone(), re: v.re, im: v.im })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.wire()).expect("grid function serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let wire: Wire = serde_json::from_str(s).map_err(|e| Error::Argument(format!("bad grid function JSON: {e}")))?;
        Self::from_entries(wire.d, wire.entries.into_iter().map(|e| (e.coords, C64::new(e.re, e.im))))
    }
}

impl Serialize for GridFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.wire().serialize(s)
    }
}

/// Lattice points x with |x|² ≤ `radius_sq`, in lexicographic order.
pub fn ball_points(d: usize, radius_sq: u64) -> Vec<Vec<i64>> {
    let r = crate::numeric::isqrt(radius_sq) as i64;
    let mut out = Vec::new();
    let mut x = vec![-r; d];
    if d == 0 {
        return vec![vec![]];
    }
    loop {
        if x.iter().map(|v| (v * v) as u64).sum::<u64>() <= radius_sq {
            out.push(x.clone());
        }
        let mut i = d;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if x[i] < r {
                x[i] += 1;
                break;
            }
            x[i] = -r;
        }
    }
}
