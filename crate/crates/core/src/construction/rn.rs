use crate::construction::schedule::{discretize_dyadic, stage_of, StageSchedule};
use crate::error::{Error, Result};
use crate::points::{ordered_gaps, PointSet, DYADIC_DEN};
use crate::rng::SeededStream;

/// The grid model `t_n = r_n + Q_n`: `r_n` uniform on `{i / D_k}` and `Q_n`
/// uniform on `[0, 1/D_k)` for `n` in stage `k`.
///
/// Both are read off one uniform variate `t_n`: `r_n = floor(D_k t_n) / D_k`
/// and `Q_n = t_n - r_n`, which gives the required independent pair. With
/// the same seed `r_n` coincides with `y~_n` of the construction.
#[derive(Debug, Clone)]
pub struct RnSample {
    /// `r_1..r_N` over the grid of the last stage reached.
    pub r: PointSet,
    /// `t_1..t_N` over 2^53.
    pub t: PointSet,
    /// `D_k` of each term.
    pub stage_den: Vec<u64>,
}

impl RnSample {
    /// `0 <= t_n - r_n < 1/D_k` for every term, checked exactly.
    pub fn offsets_within_cells(&self) -> bool {
        let rf = self.r.den();
        self.r
            .nums()
            .iter()
            .zip(self.t.nums())
            .zip(&self.stage_den)
            .all(|((&r, &t), &d)| {
                let r_on_dk = r / (rf / d);
                // t/2^53 - r_on_dk/d in [0, 1/d)  <=>  0 <= t*d - r_on_dk*2^53 < 2^53
                let lhs = t as u128 * d as u128;
                let base = (r_on_dk as u128) << 53;
                lhs >= base && lhs - base < 1u128 << 53
            })
    }
}

pub fn generate_rn(seed: u64, schedule: &StageSchedule, n_max: usize) -> Result<RnSample> {
    if n_max as u64 > schedule.total() {
        return Err(Error::IndexOutOfRange {
            n: n_max as u64,
            max: schedule.total(),
        });
    }
    let last = if n_max == 0 {
        1
    } else {
        stage_of(n_max as u64, schedule)?
    };
    let top = schedule.den(last);
    let mut stream = SeededStream::new(seed);
    let mut r = Vec::with_capacity(n_max);
    let mut t = Vec::with_capacity(n_max);
    let mut dens = Vec::with_capacity(n_max);
    for n in 1..=n_max as u64 {
        let d = schedule.den(stage_of(n, schedule)?);
        let v = stream.next_dyadic();
        t.push(v);
        r.push(discretize_dyadic(v, d) * (top / d));
        dens.push(d);
    }
    Ok(RnSample {
        r: PointSet::from_grid(top, r)?,
        t: PointSet::from_grid(DYADIC_DEN, t)?,
        stage_den: dens,
    })
}

/// Row `N` of the sorted-gap triangular array: `x_n^N = sum_{j <= n} gamma_{j,N}`
/// where `gamma_{1,N} <= ... <= gamma_{N,N}` are the gaps of the first `N`
/// base points. The last partial sum equals 1 and is stored as 0 (mod 1).
pub fn sorted_gap_array(base: &PointSet, n: usize) -> Result<PointSet> {
    if n == 0 {
        return Err(Error::EmptyPointSet);
    }
    if n > base.len() {
        return Err(Error::TooFewPoints {
            needed: n,
            got: base.len(),
        });
    }
    let den = base.den();
    let mut sorted = base.nums()[..n].to_vec();
    sorted.sort_unstable();
    let mut g = ordered_gaps(&sorted, den);
    g.sort_unstable();
    let mut acc = 0u64;
    let row = g
        .iter()
        .map(|&v| {
            acc += v;
            acc % den
        })
        .collect();
    PointSet::from_grid(den, row)
}
