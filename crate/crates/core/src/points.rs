//! Exact point sets on the unit torus and their gap multisets.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Denominator of the 53-bit dyadic grid used for uniform variates.
pub const DYADIC_DEN: u64 = 1 << 53;

/// An exact rational `num / den` in `[0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridPoint {
    pub num: u64,
    pub den: u64,
}

impl GridPoint {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 || num >= den {
            return Err(Error::InvalidGridPoint { num, den });
        }
        Ok(Self { num, den })
    }

    /// The same point expressed over `den`, which must be a multiple of `self.den`.
    pub fn lift(self, den: u64) -> Result<Self> {
        if den % self.den != 0 {
            return Err(Error::IncompatibleDenominators(self.den, den));
        }
        Ok(Self {
            num: self.num * (den / self.den),
            den,
        })
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Exact comparison of values, independent of denominators.
    pub fn cmp_value(&self, other: &Self) -> Ordering {
        let a = self.num as u128 * other.den as u128;
        let b = other.num as u128 * self.den as u128;
        a.cmp(&b)
    }
}

impl fmt::Display for GridPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

pub(crate) fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub(crate) fn lcm(a: u64, b: u64) -> Result<u64> {
    (a / gcd(a, b))
        .checked_mul(b)
        .ok_or(Error::DenominatorOverflow(a, b))
}

/// `floor(s * den / n)` computed exactly from the binary expansion of `s`,
/// saturating at `u64::MAX`. `s` must be finite and nonnegative.
///
/// A gap `g / den` satisfies `g / den <= s / n` exactly when
/// `g <= floor_scaled(s, den, n)`.
pub fn floor_scaled(s: f64, den: u64, n: u64) -> u64 {
    debug_assert!(s.is_finite() && s >= 0.0 && n > 0);
    if s == 0.0 {
        return 0;
    }
    let bits = s.to_bits();
    let raw_exp = ((bits >> 52) & 0x7ff) as i32;
    let frac = bits & ((1u64 << 52) - 1);
    // s = mant * 2^exp
    let (mant, exp) = if raw_exp == 0 {
        (frac, -1074)
    } else {
        (frac | (1u64 << 52), raw_exp - 1075)
    };
    let prod = mant as u128 * den as u128;
    let q = if exp >= 0 {
        if exp >= 128 || prod.leading_zeros() < exp as u32 {
            return u64::MAX;
        }
        (prod << exp) / n as u128
    } else {
        let shift = (-exp) as u32;
        if shift >= 128 {
            0
        } else {
            (prod >> shift) / n as u128
        }
    };
    u64::try_from(q).unwrap_or(u64::MAX)
}

/// A finite list of points in `[0, 1)` sharing one denominator, each
/// carrying the index `n` of the sequence term it came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSet {
    den: u64,
    nums: Vec<u64>,
    labels: Vec<u64>,
    exact: bool,
}

impl PointSet {
    /// Points `nums[i] / den` labelled `1..=len`.
    pub fn from_grid(den: u64, nums: Vec<u64>) -> Result<Self> {
        let labels = (1..=nums.len() as u64).collect();
        Self::with_labels(den, nums, labels)
    }

    pub fn with_labels(den: u64, nums: Vec<u64>, labels: Vec<u64>) -> Result<Self> {
        if labels.len() != nums.len() {
            return Err(Error::CardinalityMismatch(nums.len(), labels.len()));
        }
        if den == 0 {
            return Err(Error::InvalidGridPoint { num: 0, den });
        }
        if let Some(&bad) = nums.iter().find(|&&v| v >= den) {
            return Err(Error::InvalidGridPoint { num: bad, den });
        }
        Ok(Self {
            den,
            nums,
            labels,
            exact: true,
        })
    }

    /// The same points with new labels; exactness is kept.
    pub fn relabel(self, labels: Vec<u64>) -> Result<Self> {
        if labels.len() != self.nums.len() {
            return Err(Error::CardinalityMismatch(self.nums.len(), labels.len()));
        }
        Ok(Self { labels, ..self })
    }

    /// Points with possibly different denominators, lifted to their least
    /// common denominator.
    pub fn from_points(points: &[GridPoint]) -> Result<Self> {
        let mut den = 1u64;
        for p in points {
            GridPoint::new(p.num, p.den)?;
            den = lcm(den, p.den)?;
        }
        let nums = points
            .iter()
            .map(|p| p.lift(den).map(|q| q.num))
            .collect::<Result<Vec<_>>>()?;
        Self::from_grid(den, nums)
    }

    /// Reals in `[0, 1)` placed on the 2^53 dyadic grid. Values that are not
    /// already 53-bit dyadic rationals are rounded down and the set is
    /// flagged as inexact.
    pub fn from_reals(values: &[f64]) -> Result<Self> {
        let mut exact = true;
        let mut nums = Vec::with_capacity(values.len());
        for &v in values {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::OutOfUnitInterval(v));
            }
            let num = floor_scaled(v, DYADIC_DEN, 1);
            if num as f64 / DYADIC_DEN as f64 != v {
                exact = false;
            }
            nums.push(num);
        }
        let mut ps = Self::from_grid(DYADIC_DEN, nums)?;
        ps.exact = exact;
        Ok(ps)
    }

    pub fn len(&self) -> usize {
        self.nums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nums.is_empty()
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn nums(&self) -> &[u64] {
        &self.nums
    }

    pub fn labels(&self) -> &[u64] {
        &self.labels
    }

    /// False when some value was rounded onto the dyadic grid.
    pub fn is_exact(&self) -> bool {
        self.exact
    }

    pub fn point(&self, i: usize) -> GridPoint {
        GridPoint {
            num: self.nums[i],
            den: self.den,
        }
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.nums
            .iter()
            .map(|&v| v as f64 / self.den as f64)
            .collect()
    }

    /// The first `n` points.
    pub fn prefix(&self, n: usize) -> Result<Self> {
        if n > self.len() {
            return Err(Error::TooFewPoints {
                needed: n,
                got: self.len(),
            });
        }
        Ok(Self {
            den: self.den,
            nums: self.nums[..n].to_vec(),
            labels: self.labels[..n].to_vec(),
            exact: self.exact,
        })
    }

    /// The same points over a multiple of the current denominator.
    pub fn lift(&self, den: u64) -> Result<Self> {
        if den % self.den != 0 {
            return Err(Error::IncompatibleDenominators(self.den, den));
        }
        let f = den / self.den;
        Ok(Self {
            den,
            nums: self.nums.iter().map(|&v| v * f).collect(),
            labels: self.labels.clone(),
            exact: self.exact,
        })
    }

    /// Translation by `c` modulo 1.
    pub fn shift(&self, c: GridPoint) -> Result<Self> {
        let den = lcm(self.den, c.den)?;
        let me = self.lift(den)?;
        let c = c.lift(den)?.num;
        Ok(Self {
            nums: me.nums.iter().map(|&v| (v + c) % den).collect(),
            ..me
        })
    }
}

/// Sort points ascending, breaking ties by ascending label.
pub fn order_points(ps: &PointSet) -> PointSet {
    let mut idx: Vec<usize> = (0..ps.len()).collect();
    idx.sort_by_key(|&i| (ps.nums[i], ps.labels[i]));
    PointSet {
        den: ps.den,
        nums: idx.iter().map(|&i| ps.nums[i]).collect(),
        labels: idx.iter().map(|&i| ps.labels[i]).collect(),
        exact: ps.exact,
    }
}

/// Sorted multiset of torus gaps, as numerators over a common denominator.
#[derive(Debug, Clone, Eq)]
pub struct GapMultiset {
    den: u64,
    gaps: Vec<u64>,
}

impl GapMultiset {
    pub(crate) fn from_sorted(den: u64, gaps: Vec<u64>) -> Self {
        debug_assert!(gaps.windows(2).all(|w| w[0] <= w[1]));
        Self { den, gaps }
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    /// Gap numerators in ascending order.
    pub fn gaps(&self) -> &[u64] {
        &self.gaps
    }

    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.gaps
            .iter()
            .map(|&g| g as f64 / self.den as f64)
            .collect()
    }
}

impl PartialEq for GapMultiset {
    fn eq(&self, other: &Self) -> bool {
        self.gaps.len() == other.gaps.len()
            && self.gaps.iter().zip(&other.gaps).all(|(&a, &b)| {
                a as u128 * other.den as u128 == b as u128 * self.den as u128
            })
    }
}

/// Torus gaps of sorted numerators, in ordered-index order (the wrap gap last).
pub(crate) fn ordered_gaps(sorted: &[u64], den: u64) -> Vec<u64> {
    let n = sorted.len();
    let mut out = Vec::with_capacity(n);
    for w in sorted.windows(2) {
        out.push(w[1] - w[0]);
    }
    if n > 0 {
        out.push(den + sorted[0] - sorted[n - 1]);
    }
    out
}

/// The `N` gaps `x_{i+1,N} - x_{i,N}` including the wrap gap `1 + x_{1,N} - x_{N,N}`.
pub fn gaps(ps: &PointSet) -> Result<GapMultiset> {
    if ps.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let mut sorted = ps.nums.clone();
    sorted.sort_unstable();
    let mut gaps = ordered_gaps(&sorted, ps.den);
    gaps.sort_unstable();
    Ok(GapMultiset { den: ps.den, gaps })
}
