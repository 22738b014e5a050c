//! Classification of the stage-`k` gaps by exact length.
//!
//! Ordered-gap indices are one-based: gap `i` is the interval
//! `[x_{i,N_k}, x_{i+1,N_k})`. Index `i` is on the left when `i < N_k/2`
//! and on the right otherwise. The wrap gap `i = N_k` is never classified.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::points::{order_points, PointSet};

/// Members of one length class `l / D_k`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GapClass {
    /// Left member indices, ascending.
    pub left: Vec<usize>,
    /// Right member indices, ascending.
    pub right: Vec<usize>,
    /// Left members whose interval holds none of the second-half points.
    pub left_empty: Vec<usize>,
    /// Right members whose interval holds at least one second-half point.
    pub right_occupied: Vec<usize>,
    /// Second-half points (with multiplicity) inside left members.
    pub occupancy_left: u64,
    /// Second-half points (with multiplicity) inside right members.
    pub occupancy_right: u64,
}

impl GapClass {
    pub fn size(&self) -> usize {
        self.left.len() + self.right.len()
    }

    pub fn mu(&self) -> usize {
        self.left_empty.len()
    }

    pub fn nu(&self) -> usize {
        self.right_occupied.len()
    }

    pub fn rho(&self) -> usize {
        self.mu().min(self.nu())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapClassTable {
    stage: usize,
    den: u64,
    /// `x_{1,N_k} <= ... <= x_{N_k,N_k}` as numerators over `den`.
    ordered: Vec<u64>,
    /// Second-half occupancy of each ordered gap (index `i - 1`).
    occupancy: Vec<u64>,
    classes: BTreeMap<u64, GapClass>,
}

impl GapClassTable {
    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    /// `N_k`.
    pub fn n_k(&self) -> usize {
        self.ordered.len()
    }

    pub fn ordered(&self) -> &[u64] {
        &self.ordered
    }

    /// Left endpoint `x_{i,N_k}` of gap `i` (one-based).
    pub fn start(&self, i: usize) -> u64 {
        self.ordered[i - 1]
    }

    /// Second-half points inside gap `i` (one-based, `i < N_k`).
    pub fn occupancy(&self, i: usize) -> u64 {
        self.occupancy[i - 1]
    }

    /// Classes keyed by length numerator `l`; lengths that do not occur
    /// are absent.
    pub fn classes(&self) -> &BTreeMap<u64, GapClass> {
        &self.classes
    }

    pub fn class(&self, ell: u64) -> Option<&GapClass> {
        self.classes.get(&ell)
    }

    /// `m_k = x_{N_k/2, N_k}`.
    pub fn midpoint(&self) -> u64 {
        self.ordered[self.n_k() / 2 - 1]
    }
}

/// Builds the gap classes of stage `k` from the prefix `x_1..x_{N_k}` and the
/// discretized second-half points `y~_{N_k+1..2N_k}`, all on grids dividing
/// `den` (`D_k`).
pub fn gap_classes(
    stage: usize,
    den: u64,
    prefix: &PointSet,
    second_half: &PointSet,
) -> Result<GapClassTable> {
    let n_k = prefix.len();
    if n_k < 2 || n_k % 2 != 0 {
        return Err(Error::InvalidParameters(format!(
            "stage prefix must have a positive even size, got {n_k}"
        )));
    }
    if second_half.len() != n_k {
        return Err(Error::CardinalityMismatch(n_k, second_half.len()));
    }
    for ps in [prefix, second_half] {
        if den % ps.den() != 0 {
            return Err(Error::OffGrid {
                num: ps.nums().first().copied().unwrap_or(0),
                den: ps.den(),
                grid: den,
            });
        }
    }
    let ordered = order_points(&prefix.lift(den)?).nums().to_vec();
    let mut occupancy = vec![0u64; n_k];
    for &y in second_half.lift(den)?.nums() {
        // number of ordered points <= y; y lies in gap `idx` when 1 <= idx < N_k
        let idx = ordered.partition_point(|&p| p <= y);
        if idx >= 1 && idx < n_k {
            occupancy[idx - 1] += 1;
        }
    }
    let mut classes: BTreeMap<u64, GapClass> = BTreeMap::new();
    for i in 1..n_k {
        let ell = ordered[i] - ordered[i - 1];
        let occ = occupancy[i - 1];
        let c = classes.entry(ell).or_default();
        if 2 * i < n_k {
            c.left.push(i);
            c.occupancy_left += occ;
            if occ == 0 {
                c.left_empty.push(i);
            }
        } else {
            c.right.push(i);
            c.occupancy_right += occ;
            if occ > 0 {
                c.right_occupied.push(i);
            }
        }
    }
    Ok(GapClassTable {
        stage,
        den,
        ordered,
        occupancy,
        classes,
    })
}
