use serde::Serialize;

use crate::construction::run::ConstructionRun;
use crate::error::{Error, Result};
use crate::points::{ordered_gaps, GridPoint};

/// Left-mass report for one stage.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasReport {
    pub stage: usize,
    pub midpoint: GridPoint,
    /// `#{n <= 2 N_k : x_n < m_k}`.
    pub left_count: u64,
    pub left_fraction: f64,
    /// `#{N_k < n <= 2 N_k : x_n != y~_n}`.
    pub swapped_count: u64,
    /// `#{n <= N_k : x_n < m_k}`.
    pub first_half_left: u64,
    /// `#{N_k < n <= 2 N_k : y~_n < m_k}`.
    pub second_half_ytilde_left: u64,
    /// Ordered indices `i < N_k/2` whose point equals `m_k`.
    pub ties_below: u64,
}

impl BiasReport {
    /// `left = (N_k/2 - 1 - ties_below) + second_half_ytilde_left + swapped_count`
    /// and the first-half term equals its ordered count.
    pub fn decomposition_holds(&self, n_k: u64) -> bool {
        let first = n_k / 2 - 1 - self.ties_below;
        self.first_half_left == first
            && self.left_count == first + self.second_half_ytilde_left + self.swapped_count
    }
}

fn check_stage(run: &ConstructionRun, k: usize) -> Result<()> {
    let max = run.schedule().len();
    if k == 0 || k > max {
        return Err(Error::StageOutOfRange { k, max });
    }
    Ok(())
}

pub fn midpoint_and_bias(run: &ConstructionRun, k: usize) -> Result<BiasReport> {
    check_stage(run, k)?;
    let s = run.schedule();
    let n_k = s.n(k) as usize;
    let den = s.den(k);
    let st = run.stage(k);
    let m = st.midpoint.num;

    let x = run.x_prefix(2 * n_k);
    let first_half_left = x.nums()[..n_k].iter().filter(|&&v| v < m).count() as u64;
    let left_count = x.nums().iter().filter(|&&v| v < m).count() as u64;
    let mut swapped = 0;
    let mut second_left = 0;
    for n in n_k + 1..=2 * n_k {
        let r = run.record(n as u64);
        debug_assert_eq!(r.ytilde.den, den);
        if r.x != r.ytilde {
            swapped += 1;
        }
        if r.ytilde.num < m {
            second_left += 1;
        }
    }
    let ord = st.classes.ordered();
    let ties_below = ord[..n_k / 2 - 1].iter().filter(|&&p| p == m).count() as u64;
    Ok(BiasReport {
        stage: k,
        midpoint: st.midpoint,
        left_count,
        left_fraction: left_count as f64 / (2 * n_k) as f64,
        swapped_count: swapped,
        first_half_left,
        second_half_ytilde_left: second_left,
        ties_below,
    })
}

/// One gap-length class `l` of the key-condition window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassRow {
    pub ell: u64,
    /// Gaps of length `l / D_k` among the points `x_n`, `2 N_{k-1} < n <= N_k`,
    /// wrap gap included.
    pub mbar: u64,
    pub m_left: u64,
    pub m_right: u64,
    pub mu: u64,
    pub nu: u64,
    pub t_right: u64,
    /// First `j` in `{2l, 2l+1}` with `mu(j) >= nu(j)`.
    pub key_j: Option<u64>,
    /// `|T_j(R)|` for `key_j`.
    pub key_t_right: Option<u64>,
    /// `(1/4) e^{-l/10^k} N_k/10^k <= mbar <= 4 e^{-l/10^k} N_k/10^k`.
    pub band_holds: bool,
    /// Factor-5 band around `e^{-2l/10^k} N_k/10^k` for `|M_{2l}|` or `|M_{2l+1}|`.
    pub alt_band_holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageDiagnostics {
    pub stage: usize,
    pub a: f64,
    pub b: f64,
    /// `sum_l |M_l|` over every class, `l = 0` included.
    pub classified_gaps: u64,
    pub rows: Vec<ClassRow>,
}

impl StageDiagnostics {
    /// Fraction of window rows with a key-condition witness; `None` for an empty window.
    pub fn key_fraction(&self) -> Option<f64> {
        if self.rows.is_empty() {
            return None;
        }
        let hit = self.rows.iter().filter(|r| r.key_j.is_some()).count();
        Some(hit as f64 / self.rows.len() as f64)
    }
}

/// `{l >= 1 : 1/B <= l/10^k < 1/A}`.
pub fn key_window(k: usize, a: f64, b: f64) -> Result<std::ops::Range<u64>> {
    if !(a > 0.0 && b > a && b.is_finite()) {
        return Err(Error::InvalidParameters(format!(
            "need 0 < A < B, got A = {a}, B = {b}"
        )));
    }
    let p = 10f64.powi(k as i32);
    let mut hi = (p / a).ceil() as u64;
    while hi > 0 && hi as f64 * a >= p {
        hi -= 1;
    }
    let mut lo = ((p / b).floor() as u64).max(1);
    while (lo as f64) * b < p {
        lo += 1;
    }
    Ok(lo..hi + 1)
}

pub fn stage_diagnostics(run: &ConstructionRun, k: usize, a: f64, b: f64) -> Result<StageDiagnostics> {
    check_stage(run, k)?;
    let window = key_window(k, a, b)?;
    let s = run.schedule();
    let n_k = s.n(k);
    let den = s.den(k);
    let table = &run.stage(k).classes;

    // own-stage block of the prefix, all on D_k
    let lo = 2 * s.n(k - 1) as usize;
    let mut block: Vec<u64> = (lo + 1..=n_k as usize)
        .map(|n| run.record(n as u64).x.num)
        .collect();
    block.sort_unstable();
    let mut bar = ordered_gaps(&block, den);
    bar.sort_unstable();
    let count_bar = |ell: u64| {
        let lo = bar.partition_point(|&g| g < ell);
        let hi = bar.partition_point(|&g| g <= ell);
        (hi - lo) as u64
    };

    let scale = 10f64.powi(k as i32);
    let base = n_k as f64 / scale;
    let size = |ell: u64| table.class(ell).map_or(0, |c| c.size() as u64);
    let in_band = |v: u64, centre: f64, f: f64| {
        let v = v as f64;
        centre / f <= v && v <= centre * f
    };

    let rows = window
        .map(|ell| {
            let c = table.class(ell);
            let mu_nu = |j: u64| table.class(j).map_or((0, 0), |c| (c.mu() as u64, c.nu() as u64));
            let key_j = [2 * ell, 2 * ell + 1].into_iter().find(|&j| {
                let (mu, nu) = mu_nu(j);
                mu >= nu
            });
            let mbar = count_bar(ell);
            let e1 = (-(ell as f64) / scale).exp() * base;
            let e2 = (-2.0 * ell as f64 / scale).exp() * base;
            ClassRow {
                ell,
                mbar,
                m_left: c.map_or(0, |c| c.left.len() as u64),
                m_right: c.map_or(0, |c| c.right.len() as u64),
                mu: c.map_or(0, |c| c.mu() as u64),
                nu: c.map_or(0, |c| c.nu() as u64),
                t_right: c.map_or(0, |c| c.occupancy_right),
                key_j,
                key_t_right: key_j.map(|j| table.class(j).map_or(0, |c| c.occupancy_right)),
                band_holds: in_band(mbar, e1, 4.0),
                alt_band_holds: in_band(size(2 * ell), e2, 5.0) || in_band(size(2 * ell + 1), e2, 5.0),
            }
        })
        .collect();

    Ok(StageDiagnostics {
        stage: k,
        a,
        b,
        classified_gaps: table.classes().values().map(|c| c.size() as u64).sum(),
        rows,
    })
}
