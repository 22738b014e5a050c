use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::points::{floor_scaled, GridPoint};

/// First violated schedule constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScheduleViolation {
    NonPositive { k: usize },
    N1Odd,
    /// `N_k` does not divide `N_{k+1}`.
    Divisibility { k: usize },
    /// `N_{k+1} / N_k < k + 1`.
    Growth { k: usize },
}

impl fmt::Display for ScheduleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NonPositive { k } => write!(f, "N_{k} is not positive"),
            Self::N1Odd => write!(f, "N_1 odd"),
            Self::Divisibility { k } => write!(f, "divisibility: N_{k} does not divide N_{}", k + 1),
            Self::Growth { k } => write!(f, "growth: N_{}/N_{k} < {}", k + 1, k + 1),
        }
    }
}

/// Checks the stage constraints in order, returning the first violation.
pub fn validate_schedule(stages: &[u64]) -> Result<std::result::Result<(), ScheduleViolation>> {
    if stages.is_empty() {
        return Err(Error::EmptySchedule);
    }
    if let Some(i) = stages.iter().position(|&v| v == 0) {
        return Ok(Err(ScheduleViolation::NonPositive { k: i + 1 }));
    }
    if stages[0] % 2 != 0 {
        return Ok(Err(ScheduleViolation::N1Odd));
    }
    for (i, w) in stages.windows(2).enumerate() {
        let k = i + 1;
        if w[1] % w[0] != 0 {
            return Ok(Err(ScheduleViolation::Divisibility { k }));
        }
        if w[1] / w[0] < k as u64 + 1 {
            return Ok(Err(ScheduleViolation::Growth { k }));
        }
    }
    Ok(Ok(()))
}

/// A validated stage schedule `(N_1, ..., N_K)`, with the convention `N_0 = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct StageSchedule {
    stages: Vec<u64>,
    dens: Vec<u64>,
}

impl StageSchedule {
    pub fn new(stages: Vec<u64>) -> Result<Self> {
        if let Err(v) = validate_schedule(&stages)? {
            return Err(Error::InvalidSchedule(v.to_string()));
        }
        let mut dens = Vec::with_capacity(stages.len());
        for (i, &nk) in stages.iter().enumerate() {
            let k = i + 1;
            let d = 10u64
                .checked_pow(k as u32)
                .and_then(|p| p.checked_mul(nk))
                .ok_or(Error::ArithmeticOverflow { stage: k })?;
            // 2 N_k must also be representable as an index
            nk.checked_mul(2).ok_or(Error::ArithmeticOverflow { stage: k })?;
            dens.push(d);
        }
        Ok(Self { stages, dens })
    }

    /// Number of stages `K`.
    pub fn len(&self) -> usize {
        self.stages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn stages(&self) -> &[u64] {
        &self.stages
    }

    /// `N_k` for `k` in `0..=K` (`N_0 = 0`).
    pub fn n(&self, k: usize) -> u64 {
        if k == 0 {
            0
        } else {
            self.stages[k - 1]
        }
    }

    /// Grid denominator `D_k = 10^k N_k`, `k >= 1`.
    pub fn den(&self, k: usize) -> u64 {
        self.dens[k - 1]
    }

    /// Total number of terms `2 N_K`.
    pub fn total(&self) -> u64 {
        2 * self.n(self.len())
    }

    fn check_stage(&self, k: usize) -> Result<()> {
        if k == 0 || k > self.len() {
            return Err(Error::StageOutOfRange { k, max: self.len() });
        }
        Ok(())
    }
}

impl TryFrom<Vec<u64>> for StageSchedule {
    type Error = Error;
    fn try_from(v: Vec<u64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<StageSchedule> for Vec<u64> {
    fn from(s: StageSchedule) -> Self {
        s.stages
    }
}

impl FromStr for StageSchedule {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let stages = s
            .split(',')
            .map(|t| {
                t.trim().parse::<u64>().map_err(|e| {
                    Error::InvalidSchedule(format!("bad stage size {t:?}: {e}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(stages)
    }
}

impl fmt::Display for StageSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.stages.iter().map(|v| v.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// The unique `k` with `2 N_{k-1} < n <= 2 N_k`.
pub fn stage_of(n: u64, s: &StageSchedule) -> Result<usize> {
    if n == 0 || n > s.total() {
        return Err(Error::IndexOutOfRange { n, max: s.total() });
    }
    Ok((1..=s.len()).find(|&k| n <= 2 * s.n(k)).expect("n <= 2 N_K"))
}

/// `floor(D_k y) / D_k` for `y` in `[0, 1)`.
pub fn discretize(y: f64, k: usize, s: &StageSchedule) -> Result<GridPoint> {
    s.check_stage(k)?;
    if !(0.0..1.0).contains(&y) {
        return Err(Error::OutOfUnitInterval(y));
    }
    let den = s.den(k);
    Ok(GridPoint {
        num: floor_scaled(y, den, 1),
        den,
    })
}

/// Discretization of a dyadic variate `y = num / 2^53`.
pub(crate) fn discretize_dyadic(num: u64, den: u64) -> u64 {
    ((num as u128 * den as u128) >> 53) as u64
}
