use serde::Serialize;

use crate::construction::classes::{gap_classes, GapClassTable};
use crate::construction::schedule::{discretize_dyadic, stage_of, StageSchedule};
use crate::construction::swap::{build_swap_map, SwapMap};
use crate::error::Result;
use crate::points::{GridPoint, PointSet, DYADIC_DEN};
use crate::rng::SeededStream;

/// One term of the construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Record {
    pub n: u64,
    /// The uniform variate `y_n` as a numerator over 2^53.
    pub y: u64,
    pub ytilde: GridPoint,
    pub x: GridPoint,
    pub z: GridPoint,
}

impl Record {
    pub fn y_f64(&self) -> f64 {
        self.y as f64 / DYADIC_DEN as f64
    }
}

/// Per-stage artefacts: the gap classes at `N_k`, the swap map `f^(k)` and
/// the midpoint `m_k`.
#[derive(Debug, Clone)]
pub struct StageData {
    pub classes: GapClassTable,
    pub map: SwapMap,
    pub midpoint: GridPoint,
}

/// A complete run for `n <= 2 N_K`. Term columns are stored as numerators
/// over the grid `D_k` of each term's stage.
#[derive(Debug, Clone)]
pub struct ConstructionRun {
    schedule: StageSchedule,
    seed: u64,
    y: Vec<u64>,
    ytilde: Vec<u64>,
    x: Vec<u64>,
    z: Vec<u64>,
    stages: Vec<StageData>,
}

/// `(f^(1) o ... o f^(l))(p)` for `p` on grid `den`, a multiple of every `D_j`, `j <= l`.
fn compose(stages: &[StageData], l: usize, num: u64, den: u64) -> u64 {
    stages[..l].iter().rev().fold(num, |v, st| {
        st.map.apply_scaled(v, den / st.map.den())
    })
}

/// Runs the stage recursion for `seed`: draw, discretize, classify the gaps
/// at each `N_k`, build `f^(k)` and map the second half of the stage.
pub fn construct(seed: u64, schedule: &StageSchedule) -> Result<ConstructionRun> {
    let total = schedule.total() as usize;
    let mut stream = SeededStream::new(seed);
    let mut y = Vec::with_capacity(total);
    let mut ytilde = Vec::with_capacity(total);
    let mut x = Vec::with_capacity(total);
    let mut z = Vec::with_capacity(total);
    let mut stages: Vec<StageData> = Vec::with_capacity(schedule.len());

    for k in 1..=schedule.len() {
        let den = schedule.den(k);
        let lo = 2 * schedule.n(k - 1) as usize;
        let mid = schedule.n(k) as usize;
        let hi = 2 * mid;

        for _ in lo..hi {
            let v = stream.next_dyadic();
            y.push(v);
            ytilde.push(discretize_dyadic(v, den));
        }
        for n in lo..mid {
            x.push(ytilde[n]);
            z.push(compose(&stages, k - 1, ytilde[n], den));
        }

        // x_1..x_{N_k} lifted to D_k
        let mut prefix = Vec::with_capacity(mid);
        for j in 1..=k {
            let dj = schedule.den(j);
            let from = 2 * schedule.n(j - 1) as usize;
            let to = (2 * schedule.n(j) as usize).min(mid);
            prefix.extend(x[from..to].iter().map(|&v| v * (den / dj)));
        }
        let prefix = PointSet::from_grid(den, prefix)?;
        let second = PointSet::from_grid(den, ytilde[mid..hi].to_vec())?;
        let classes = gap_classes(k, den, &prefix, &second)?;
        let map = build_swap_map(&classes)?;
        let midpoint = GridPoint {
            num: classes.midpoint(),
            den,
        };

        for n in mid..hi {
            x.push(map.apply_scaled(ytilde[n], 1));
            z.push(compose(&stages, k - 1, ytilde[n], den));
        }
        stages.push(StageData {
            classes,
            map,
            midpoint,
        });
    }

    Ok(ConstructionRun {
        schedule: schedule.clone(),
        seed,
        y,
        ytilde,
        x,
        z,
        stages,
    })
}

impl ConstructionRun {
    pub fn schedule(&self) -> &StageSchedule {
        &self.schedule
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `2 N_K`.
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Data for stage `k` (one-based).
    pub fn stage(&self, k: usize) -> &StageData {
        &self.stages[k - 1]
    }

    pub fn stages(&self) -> &[StageData] {
        &self.stages
    }

    fn den_of(&self, n: u64) -> u64 {
        self.schedule
            .den(stage_of(n, &self.schedule).expect("index within run"))
    }

    /// Term `n` (one-based).
    pub fn record(&self, n: u64) -> Record {
        let i = n as usize - 1;
        let den = self.den_of(n);
        Record {
            n,
            y: self.y[i],
            ytilde: GridPoint { num: self.ytilde[i], den },
            x: GridPoint { num: self.x[i], den },
            z: GridPoint { num: self.z[i], den },
        }
    }

    pub fn records(&self) -> impl Iterator<Item = Record> + '_ {
        (1..=self.len() as u64).map(move |n| self.record(n))
    }

    fn prefix_of(&self, col: &[u64], n: usize) -> PointSet {
        let last = stage_of(n as u64, &self.schedule).expect("index within run");
        let den = self.schedule.den(last);
        let mut nums = Vec::with_capacity(n);
        for j in 1..=last {
            let f = den / self.schedule.den(j);
            let from = 2 * self.schedule.n(j - 1) as usize;
            let to = (2 * self.schedule.n(j) as usize).min(n);
            nums.extend(col[from..to].iter().map(|&v| v * f));
        }
        PointSet::from_grid(den, nums).expect("grid points below denominator")
    }

    /// `x_1..x_N` over the grid of the stage containing `N`.
    pub fn x_prefix(&self, n: usize) -> PointSet {
        self.prefix_of(&self.x, n)
    }

    pub fn z_prefix(&self, n: usize) -> PointSet {
        self.prefix_of(&self.z, n)
    }

    pub fn ytilde_prefix(&self, n: usize) -> PointSet {
        self.prefix_of(&self.ytilde, n)
    }

    /// Raw variates `y_1..y_N` on the 2^53 grid.
    pub fn y_prefix(&self, n: usize) -> PointSet {
        PointSet::from_grid(DYADIC_DEN, self.y[..n].to_vec()).expect("dyadic variates")
    }

    /// `(f^(1) o ... o f^(l))(p)`, applying `f^(l)` first.
    pub fn compose_maps(&self, l: usize, p: GridPoint) -> Result<GridPoint> {
        let mut q = p;
        for st in self.stages[..l].iter().rev() {
            q = st.map.apply(q)?;
        }
        Ok(q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;
    use crate::points::gaps;

    fn small() -> StageSchedule {
        StageSchedule::new(vec![4, 8]).unwrap()
    }

    #[test]
    fn discretization_bound_holds() {
        let s = StageSchedule::new(vec![10, 100, 1000]).unwrap();
        let run = construct(3, &s).unwrap();
        for r in run.records() {
            // 0 <= y - y~ < 1/D_k, checked on integers
            let lhs = r.y as u128 * r.ytilde.den as u128;
            let base = (r.ytilde.num as u128) << 53;
            assert!(lhs >= base && lhs - base < 1u128 << 53, "n = {}", r.n);
        }
    }

    #[test]
    fn x_and_z_follow_definitions() {
        let s = StageSchedule::new(vec![10, 100, 1000]).unwrap();
        let run = construct(11, &s).unwrap();
        for r in run.records() {
            let k = stage_of(r.n, &s).unwrap();
            let nk = s.n(k);
            if r.n <= nk {
                assert_eq!(r.x, r.ytilde);
            } else {
                assert_eq!(r.x, run.stage(k).map.apply(r.ytilde).unwrap());
            }
            assert_eq!(r.z, run.compose_maps(k - 1, r.ytilde).unwrap());
        }
    }

    #[test]
    fn same_gaps_every_prefix() {
        let s = StageSchedule::new(vec![10, 100, 1000]).unwrap();
        for seed in 0..5 {
            let run = construct(seed, &s).unwrap();
            for n in 1..=run.len() {
                assert_eq!(
                    gaps(&run.x_prefix(n)).unwrap(),
                    gaps(&run.z_prefix(n)).unwrap(),
                    "seed {seed}, N = {n}"
                );
            }
        }
    }

    #[test]
    fn matches_straight_line_reference() {
        for seed in [7u64, 8, 9, 10] {
            let run = construct(seed, &small()).unwrap();
            let expected = oracle::reference_trace(seed, small().stages());
            let got: Vec<Record> = run.records().collect();
            assert_eq!(got, expected, "seed {seed}");
        }
        let s = StageSchedule::new(vec![10, 100]).unwrap();
        let run = construct(5, &s).unwrap();
        assert_eq!(run.records().collect::<Vec<_>>(), oracle::reference_trace(5, s.stages()));
    }

    #[test]
    fn deterministic() {
        let a = construct(1, &small()).unwrap();
        let b = construct(1, &small()).unwrap();
        assert_eq!(a.records().collect::<Vec<_>>(), b.records().collect::<Vec<_>>());
    }
}
