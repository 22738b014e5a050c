//! Spacing statistics: gap CDF, reference laws, star discrepancy, pair
//! correlation and empirical distribution functions.
//!
//! Every threshold comparison (`gap <= s/N`, `x_n <= x`) is evaluated exactly
//! on the integer numerators via [`floor_scaled`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::points::{floor_scaled, ordered_gaps, PointSet};

/// Default s-grid: `[0, 5]` in 500 steps.
pub const DEFAULT_S_MAX: f64 = 5.0;
pub const DEFAULT_S_STEPS: usize = 500;

/// `steps + 1` equally spaced values from 0 to `s_max`.
pub fn s_grid(s_max: f64, steps: usize) -> Vec<f64> {
    (0..=steps)
        .map(|i| s_max * i as f64 / steps as f64)
        .collect()
}

pub fn default_s_grid() -> Vec<f64> {
    s_grid(DEFAULT_S_MAX, DEFAULT_S_STEPS)
}

fn check_s(s: f64) -> Result<()> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::NegativeArgument(s));
    }
    Ok(())
}

/// `P_N(s) = (1/N) #{i <= N : gap_i <= s/N}` for each `s` of the grid.
pub fn gap_cdf(ps: &PointSet, s_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
    if ps.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    for &s in s_grid {
        check_s(s)?;
    }
    let n = ps.len();
    let mut sorted = ps.nums().to_vec();
    sorted.sort_unstable();
    let mut g = ordered_gaps(&sorted, ps.den());
    g.sort_unstable();
    Ok(s_grid
        .iter()
        .map(|&s| {
            let t = floor_scaled(s, ps.den(), n as u64);
            let count = g.partition_point(|&v| v <= t);
            (s, count as f64 / n as f64)
        })
        .collect())
}

/// Limit laws for rescaled gaps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReferenceKind {
    /// `1 - e^{-s}`
    Exponential,
    /// `1 - (1 + s) e^{-s}`
    Gamma2,
    /// `min(s, 1)`, the law of `N * gap` for equally spaced points.
    Uniform,
}

impl std::str::FromStr for ReferenceKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exponential" => Ok(Self::Exponential),
            "gamma2" => Ok(Self::Gamma2),
            "uniform" => Ok(Self::Uniform),
            other => Err(Error::InvalidParameters(format!(
                "unknown reference law {other:?}"
            ))),
        }
    }
}

pub fn reference_cdf(kind: ReferenceKind, s: f64) -> Result<f64> {
    check_s(s)?;
    Ok(match kind {
        ReferenceKind::Exponential => -(-s).exp_m1(),
        ReferenceKind::Gamma2 => 1.0 - (1.0 + s) * (-s).exp(),
        ReferenceKind::Uniform => s.min(1.0),
    })
}

/// `D*_N = max_i max(i/N - x_(i), x_(i) - (i-1)/N)`, computed exactly and
/// rounded once at the end.
pub fn star_discrepancy(ps: &PointSet) -> Result<f64> {
    if ps.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let n = ps.len() as i128;
    let den = ps.den() as i128;
    let mut sorted = ps.nums().to_vec();
    sorted.sort_unstable();
    // in units of 1 / (N * den)
    let mut best: i128 = 0;
    for (i, &x) in sorted.iter().enumerate() {
        let i = i as i128 + 1;
        let x = x as i128 * n;
        best = best.max(i * den - x).max(x - (i - 1) * den);
    }
    Ok(best as f64 / (n as f64 * den as f64))
}

/// `(1/N) #{(m, n), m != n : ||x_m - x_n|| <= s/N}` with the torus distance.
pub fn pair_correlation(ps: &PointSet, s: f64) -> Result<f64> {
    check_s(s)?;
    let n = ps.len();
    if n < 2 {
        return Err(Error::TooFewPoints { needed: 2, got: n });
    }
    let den = ps.den();
    let t = floor_scaled(s, den, n as u64);
    if t >= den / 2 {
        // every torus distance is at most den/2
        return Ok((n - 1) as f64);
    }
    let mut sorted = ps.nums().to_vec();
    sorted.sort_unstable();
    // three copies: x - den, x, x + den, as signed values
    let d = den as i128;
    let ext: Vec<i128> = sorted
        .iter()
        .map(|&v| v as i128 - d)
        .chain(sorted.iter().map(|&v| v as i128))
        .chain(sorted.iter().map(|&v| v as i128 + d))
        .collect();
    let t = t as i128;
    let mut total: u64 = 0;
    for &v in &sorted {
        let v = v as i128;
        let lo = ext.partition_point(|&e| e < v - t);
        let hi = ext.partition_point(|&e| e <= v + t);
        total += (hi - lo - 1) as u64;
    }
    Ok(total as f64 / n as f64)
}

/// Fraction of points `<= x`.
pub fn empirical_cdf(ps: &PointSet, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfClosedUnitInterval(x));
    }
    if ps.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let t = floor_scaled(x, ps.den(), 1);
    let count = ps.nums().iter().filter(|&&v| v <= t).count();
    Ok(count as f64 / ps.len() as f64)
}

/// A distribution function sampled on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledCdf {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

impl SampledCdf {
    pub fn from_fn(grid: &[f64], f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: grid.to_vec(),
            values: grid.iter().map(|&s| f(s)).collect(),
        }
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        Self {
            grid: pairs.iter().map(|p| p.0).collect(),
            values: pairs.iter().map(|p| p.1).collect(),
        }
    }
}

/// Sup-norm distance between two CDFs sampled on the same grid.
pub fn ks_distance(f: &SampledCdf, g: &SampledCdf) -> Result<f64> {
    if f.grid.len() != g.grid.len()
        || f.values.len() != f.grid.len()
        || g.values.len() != g.grid.len()
        || f.grid.iter().zip(&g.grid).any(|(a, b)| a.to_bits() != b.to_bits())
    {
        return Err(Error::GridMismatch);
    }
    Ok(f.values
        .iter()
        .zip(&g.values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max))
}

/// Two-sample Kolmogorov–Smirnov statistic between the empirical CDFs of
/// two exact point sets, evaluated at every sample point.
pub fn ks_two_sample(a: &PointSet, b: &PointSet) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    let den = crate::points::lcm(a.den(), b.den())?;
    let mut xa = a.lift(den)?.nums().to_vec();
    let mut xb = b.lift(den)?.nums().to_vec();
    xa.sort_unstable();
    xb.sort_unstable();
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xa.len() || j < xb.len() {
        let v = match (xa.get(i), xb.get(j)) {
            (Some(&p), Some(&q)) => p.min(q),
            (Some(&p), None) => p,
            (None, Some(&q)) => q,
            (None, None) => unreachable!(),
        };
        while i < xa.len() && xa[i] == v {
            i += 1;
        }
        while j < xb.len() && xb[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}
