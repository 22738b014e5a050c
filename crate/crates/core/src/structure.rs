//! Distinct-gap checks, descendant counts and the moment functional built on
//! them, plus exact gap-multiset comparison between sequences.

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::points::{gaps, lcm, ordered_gaps, GapMultiset, PointSet};

/// Smallest gap length that occurs more than once.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DuplicateGap {
    pub n: usize,
    pub gap_num: u64,
    pub den: u64,
    pub multiplicity: usize,
}

/// `Ok(None)` when the `N = |ps|` gaps are pairwise distinct.
pub fn distinct_gaps_check(ps: &PointSet) -> Result<Option<DuplicateGap>> {
    if !ps.is_exact() {
        return Err(Error::NonExact);
    }
    let g = gaps(ps)?;
    let v = g.gaps();
    let mut i = 0;
    while i < v.len() {
        let j = i + v[i..].iter().take_while(|&&x| x == v[i]).count();
        if j - i > 1 {
            return Ok(Some(DuplicateGap {
                n: ps.len(),
                gap_num: v[i],
                den: g.den(),
                multiplicity: j - i,
            }));
        }
        i = j;
    }
    Ok(None)
}

/// Fine-gap counts per coarse gap. Coarse gaps are listed in ascending
/// point order with the wrap gap last.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DescendantIndex {
    pub m: usize,
    pub n: usize,
    pub den: u64,
    pub coarse_gaps: Vec<u64>,
    pub counts: Vec<u64>,
}

impl DescendantIndex {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

fn check_prefixes(ps: &PointSet, m: usize, n: usize) -> Result<()> {
    if m == 0 || m >= n || n > ps.len() {
        return Err(Error::InvalidPrefixes { m, n, len: ps.len() });
    }
    Ok(())
}

/// Each fine interval `[x_{j,N}, x_{j+1,N})` lies in the coarse interval
/// containing its left endpoint, since coarse points are fine points.
pub fn descendants(ps: &PointSet, m: usize, n: usize) -> Result<DescendantIndex> {
    check_prefixes(ps, m, n)?;
    let den = ps.den();
    let mut coarse = ps.nums()[..m].to_vec();
    coarse.sort_unstable();
    let mut counts = vec![0u64; m];
    for &v in &ps.nums()[..n] {
        let idx = coarse.partition_point(|&p| p <= v);
        let cell = if idx == 0 { m - 1 } else { idx - 1 };
        counts[cell] += 1;
    }
    Ok(DescendantIndex {
        m,
        n,
        den,
        coarse_gaps: ordered_gaps(&coarse, den),
        counts,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentReport {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub k: u32,
    /// `sum_i (1/g_i) (c_i/N)^k`
    pub literal: f64,
    /// `sum_i g_i (c_i / (N g_i))^k`
    pub corrected: f64,
}

fn powi_loop(base: f64, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, _| acc * base)
}

/// Moments for each `k` in `ks` from one descendant index.
pub fn moment_table(idx: &DescendantIndex, ks: &[u32]) -> Result<Vec<MomentReport>> {
    if ks.contains(&0) {
        return Err(Error::InvalidMomentOrder);
    }
    if idx.coarse_gaps.contains(&0) {
        return Err(Error::ZeroCoarseGap);
    }
    // canonical order so the sums depend on the (g, c) multiset only
    let mut pairs: Vec<(u64, u64)> = idx
        .coarse_gaps
        .iter()
        .copied()
        .zip(idx.counts.iter().copied())
        .collect();
    pairs.sort_unstable();
    let n = idx.n as f64;
    let den = idx.den as f64;
    Ok(ks
        .iter()
        .map(|&k| {
            let mut literal = 0.0;
            let mut corrected = 0.0;
            for &(g, c) in &pairs {
                let a = powi_loop(c as f64 / n, k);
                let r = den / g as f64;
                literal += a * r;
                corrected += a * powi_loop(r, k - 1);
            }
            if k == 1 {
                let total: u64 = pairs.iter().map(|p| p.1).sum();
                corrected = total as f64 / idx.n as f64;
            }
            MomentReport {
                m: idx.m,
                n: idx.n,
                k,
                literal,
                corrected,
            }
        })
        .collect())
}

pub fn moment_functional(ps: &PointSet, m: usize, n: usize, k: u32) -> Result<MomentReport> {
    let idx = descendants(ps, m, n)?;
    Ok(moment_table(&idx, &[k])?[0])
}

fn common_grid(a: &PointSet, b: &PointSet) -> Result<(PointSet, PointSet)> {
    let den = lcm(a.den(), b.den()).map_err(|_| Error::IncompatibleDenominators(a.den(), b.den()))?;
    Ok((a.lift(den)?, b.lift(den)?))
}

pub fn same_gap_multiset(a: &PointSet, b: &PointSet) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::CardinalityMismatch(a.len(), b.len()));
    }
    if !a.is_exact() || !b.is_exact() {
        return Err(Error::NonExact);
    }
    let (a, b) = common_grid(a, b)?;
    Ok(gaps(&a)? == gaps(&b)?)
}

/// Gap multiset of a growing point set, updated in `O(log N)` per point.
#[derive(Debug, Clone)]
pub struct GapTracker {
    den: u64,
    points: BTreeMap<u64, u32>,
    gaps: BTreeMap<u64, u64>,
    len: usize,
}

/// Gap lengths removed and added by one insertion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GapUpdate {
    pub removed: Option<u64>,
    pub added: [Option<u64>; 2],
}

impl GapTracker {
    pub fn new(den: u64) -> Self {
        Self {
            den,
            points: BTreeMap::new(),
            gaps: BTreeMap::new(),
            len: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn bump(&mut self, g: u64, up: bool) {
        if up {
            *self.gaps.entry(g).or_insert(0) += 1;
        } else {
            let e = self.gaps.get_mut(&g).expect("tracked gap");
            *e -= 1;
            if *e == 0 {
                self.gaps.remove(&g);
            }
        }
    }

    pub fn insert(&mut self, v: u64) -> Result<GapUpdate> {
        if v >= self.den {
            return Err(Error::InvalidGridPoint { num: v, den: self.den });
        }
        let den = self.den;
        let upd = if self.points.is_empty() {
            GapUpdate { removed: None, added: [Some(den), None] }
        } else if self.points.contains_key(&v) {
            GapUpdate { removed: None, added: [Some(0), None] }
        } else {
            let pred = self
                .points
                .range(..v)
                .next_back()
                .or_else(|| self.points.iter().next_back())
                .map(|(&p, _)| p)
                .expect("nonempty");
            let succ = self
                .points
                .range(v..)
                .next()
                .or_else(|| self.points.iter().next())
                .map(|(&p, _)| p)
                .expect("nonempty");
            let old = match (succ + den - pred) % den {
                0 => den,
                g => g,
            };
            GapUpdate {
                removed: Some(old),
                added: [Some((v + den - pred) % den), Some((succ + den - v) % den)],
            }
        };
        *self.points.entry(v).or_insert(0) += 1;
        self.len += 1;
        if let Some(g) = upd.removed {
            self.bump(g, false);
        }
        for g in upd.added.into_iter().flatten() {
            self.bump(g, true);
        }
        Ok(upd)
    }

    pub fn multiset(&self) -> GapMultiset {
        let v: Vec<u64> = self
            .gaps
            .iter()
            .flat_map(|(&g, &c)| std::iter::repeat(g).take(c as usize))
            .collect();
        GapMultiset::from_sorted(self.den, v)
    }
}

/// Smallest `N` at which the gap multisets of the `N`-prefixes differ.
pub fn first_gap_mismatch(a: &PointSet, b: &PointSet) -> Result<Option<usize>> {
    if a.len() != b.len() {
        return Err(Error::CardinalityMismatch(a.len(), b.len()));
    }
    let (a, b) = common_grid(a, b)?;
    let den = a.den();
    let mut ta = GapTracker::new(den);
    let mut tb = GapTracker::new(den);
    let mut diff: HashMap<u64, i64> = HashMap::new();
    let mut nonzero = 0usize;
    let mut apply = |g: u64, d: i64, diff: &mut HashMap<u64, i64>| {
        let e = diff.entry(g).or_insert(0);
        let was = *e != 0;
        *e += d;
        let is = *e != 0;
        if was && !is {
            nonzero -= 1;
        } else if !was && is {
            nonzero += 1;
        }
        nonzero
    };
    for (i, (&x, &y)) in a.nums().iter().zip(b.nums()).enumerate() {
        let mut nz = 0;
        for (t, sign) in [(&mut ta, 1i64), (&mut tb, -1)] {
            let u = t.insert(if sign > 0 { x } else { y })?;
            if let Some(g) = u.removed {
                nz = apply(g, -sign, &mut diff);
            }
            for g in u.added.into_iter().flatten() {
                nz = apply(g, sign, &mut diff);
            }
        }
        if nz != 0 {
            return Ok(Some(i + 1));
        }
    }
    Ok(None)
}
