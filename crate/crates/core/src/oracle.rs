//! Quadratic brute-force references used to cross-check the fast code paths.
//!
//! Everything here favours obviousness over speed: rational arithmetic for
//! thresholds, full pair scans for containment, linear scans for swap lookups.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::construction::classes::GapClassTable;
use crate::construction::run::Record;
use crate::points::{GridPoint, PointSet};

fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn exact(s: f64) -> BigRational {
    BigRational::from_float(s).expect("finite threshold")
}

fn values(ps: &PointSet) -> Vec<BigRational> {
    ps.nums().iter().map(|&v| ratio(v, ps.den())).collect()
}

/// Torus gaps of `ps` as rationals, in ascending point order, wrap last.
fn rational_gaps(ps: &PointSet) -> Vec<BigRational> {
    let mut v = values(ps);
    v.sort();
    let n = v.len();
    (0..n)
        .map(|i| {
            if i + 1 < n {
                &v[i + 1] - &v[i]
            } else {
                BigRational::one() - &v[n - 1] + &v[0]
            }
        })
        .collect()
}

pub fn gap_cdf(ps: &PointSet, s: f64) -> f64 {
    let n = BigRational::from_integer(BigInt::from(ps.len()));
    let s = exact(s);
    let count = rational_gaps(ps).iter().filter(|g| &n * *g <= s).count();
    count as f64 / ps.len() as f64
}

pub fn pair_correlation(ps: &PointSet, s: f64) -> f64 {
    let v = values(ps);
    let n = BigRational::from_integer(BigInt::from(v.len()));
    let s = exact(s);
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    let mut count = 0u64;
    for i in 0..v.len() {
        for j in 0..v.len() {
            if i == j {
                continue;
            }
            let mut d = (&v[i] - &v[j]).abs();
            if d > half {
                d = BigRational::one() - d;
            }
            if &n * d <= s {
                count += 1;
            }
        }
    }
    count as f64 / v.len() as f64
}

/// Per-class membership, in the field order of `GapClass`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassEntry {
    pub ell: u64,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub left_empty: Vec<usize>,
    pub right_occupied: Vec<usize>,
    pub occupancy_left: u64,
    pub occupancy_right: u64,
}

pub fn class_view(t: &GapClassTable) -> Vec<ClassEntry> {
    t.classes()
        .iter()
        .map(|(&ell, c)| ClassEntry {
            ell,
            left: c.left.clone(),
            right: c.right.clone(),
            left_empty: c.left_empty.clone(),
            right_occupied: c.right_occupied.clone(),
            occupancy_left: c.occupancy_left,
            occupancy_right: c.occupancy_right,
        })
        .collect()
}

/// Ordered prefix with ties broken by original index.
fn ordered(prefix: &[u64]) -> Vec<u64> {
    let mut idx: Vec<(u64, usize)> = prefix.iter().copied().zip(0..).collect();
    // insertion sort keeps the reference free of library sort subtleties
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            j -= 1;
        }
    }
    idx.into_iter().map(|(v, _)| v).collect()
}

pub fn gap_classes(prefix: &[u64], second: &[u64], _den: u64) -> Vec<ClassEntry> {
    let p = ordered(prefix);
    let n = p.len();
    let mut out: Vec<ClassEntry> = Vec::new();
    for i in 1..n {
        let (a, b) = (p[i - 1], p[i]);
        let ell = b - a;
        let occ = second.iter().filter(|&&y| a <= y && y < b).count() as u64;
        let pos = match out.iter().position(|e| e.ell == ell) {
            Some(pos) => pos,
            None => {
                out.push(ClassEntry {
                    ell,
                    left: vec![],
                    right: vec![],
                    left_empty: vec![],
                    right_occupied: vec![],
                    occupancy_left: 0,
                    occupancy_right: 0,
                });
                out.len() - 1
            }
        };
        let e = &mut out[pos];
        if 2 * i < n {
            e.left.push(i);
            e.occupancy_left += occ;
            if occ == 0 {
                e.left_empty.push(i);
            }
        } else {
            e.right.push(i);
            e.occupancy_right += occ;
            if occ > 0 {
                e.right_occupied.push(i);
            }
        }
    }
    out.sort_by_key(|e| e.ell);
    out
}

/// `(ell, left start, right start)` in pairing order.
pub fn swap_pairs(prefix: &[u64], second: &[u64], den: u64) -> Vec<(u64, u64, u64)> {
    let p = ordered(prefix);
    let mut out = Vec::new();
    for e in gap_classes(prefix, second, den) {
        if e.ell == 0 {
            continue;
        }
        let rho = e.left_empty.len().min(e.right_occupied.len());
        for s in 0..rho {
            out.push((e.ell, p[e.left_empty[s] - 1], p[e.right_occupied[s] - 1]));
        }
    }
    out
}

/// Swap map as `(a, b, w)` triples over its own denominator.
struct Map {
    den: u64,
    pairs: Vec<(u64, u64, u64)>,
}

impl Map {
    fn apply(&self, v: u64, den: u64) -> u64 {
        let f = den / self.den;
        for &(a, b, w) in &self.pairs {
            if a * f <= v && v < (a + w) * f {
                return v - a * f + b * f;
            }
            if b * f <= v && v < (b + w) * f {
                return v - b * f + a * f;
            }
        }
        v
    }
}

fn splitmix(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Straight-line construction trace: no incremental structures, no binary
/// searches, every stage recomputed from the stored terms.
pub fn reference_trace(seed: u64, stages: &[u64]) -> Vec<Record> {
    let mut state = seed;
    let mut out: Vec<Record> = Vec::new();
    let mut maps: Vec<Map> = Vec::new();
    let mut prev = 0u64;
    for (i, &nk) in stages.iter().enumerate() {
        let k = i as u32 + 1;
        let d = 10u64.pow(k) * nk;
        let mut ys = Vec::new();
        for _ in 2 * prev..2 * nk {
            let y = splitmix(&mut state) >> 11;
            let yt = ((y as u128 * d as u128) >> 53) as u64;
            ys.push((y, yt));
        }
        let compose = |v: u64| maps.iter().rev().fold(v, |acc, m| m.apply(acc, d));
        let first = (nk - 2 * prev) as usize;
        for &(y, yt) in &ys[..first] {
            let n = out.len() as u64 + 1;
            let g = GridPoint { num: yt, den: d };
            out.push(Record {
                n,
                y,
                ytilde: g,
                x: g,
                z: GridPoint { num: compose(yt), den: d },
            });
        }
        let prefix: Vec<u64> = out.iter().map(|r| r.x.num * (d / r.x.den)).collect();
        let second: Vec<u64> = ys[first..].iter().map(|&(_, yt)| yt).collect();
        let pairs = swap_pairs(&prefix, &second, d);
        let map = Map {
            den: d,
            pairs: pairs
                .iter()
                .map(|&(ell, a, b)| (a, b, ell))
                .collect(),
        };
        for &(y, yt) in &ys[first..] {
            let n = out.len() as u64 + 1;
            out.push(Record {
                n,
                y,
                ytilde: GridPoint { num: yt, den: d },
                x: GridPoint { num: map.apply(yt, d), den: d },
                z: GridPoint { num: compose(yt), den: d },
            });
        }
        maps.push(map);
        prev = nk;
    }
    out
}

/// Descendant counts by testing every (fine interval, coarse interval)
/// pair for containment on the torus. Points must be distinct.
pub fn descendants(ps: &PointSet, m: usize, n: usize) -> Vec<u64> {
    let all = values(ps);
    let sorted = |k: usize| {
        let mut v = all[..k].to_vec();
        v.sort();
        v
    };
    let coarse = sorted(m);
    let fine = sorted(n);
    let one = BigRational::one();
    // interval i: [v_i, v_i + len_i) read mod 1
    let intervals = |v: &[BigRational]| -> Vec<(BigRational, BigRational)> {
        (0..v.len())
            .map(|i| {
                let len = if i + 1 < v.len() {
                    &v[i + 1] - &v[i]
                } else {
                    &one - &v[i] + &v[0]
                };
                (v[i].clone(), len)
            })
            .collect()
    };
    let ci = intervals(&coarse);
    let fi = intervals(&fine);
    ci.iter()
        .map(|(c, cl)| {
            fi.iter()
                .filter(|(f, fl)| {
                    let mut off = f - c;
                    if off < BigRational::zero() {
                        off += &one;
                    }
                    off + fl <= *cl
                })
                .count() as u64
        })
        .collect()
}
