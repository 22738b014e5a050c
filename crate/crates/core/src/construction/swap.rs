//! Interval swap maps.
//!
//! A [`SwapMap`] exchanges pairs of disjoint, equal-width, grid-aligned
//! half-open intervals by translation and fixes everything else. It is an
//! involution and a bijection of `[0, 1)` and of every grid refining its own.

use serde::{Deserialize, Serialize};

use crate::construction::classes::GapClassTable;
use crate::error::{Error, Result};
use crate::points::GridPoint;

/// `[left, left + width)` exchanged with `[right, right + width)`, as
/// numerators over the map's denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwapPair {
    /// Gap length class the pair was built from.
    pub ell: u64,
    pub left: u64,
    pub right: u64,
    pub width: u64,
}

/// One translated piece: `[start, start + width) -> [target, target + width)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Piece {
    start: u64,
    width: u64,
    target: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwapMap {
    stage: usize,
    den: u64,
    pairs: Vec<SwapPair>,
    /// Both directions of every pair, sorted by `start`.
    pieces: Vec<Piece>,
}

impl SwapMap {
    pub fn identity(stage: usize, den: u64) -> Self {
        Self {
            stage,
            den,
            pairs: Vec::new(),
            pieces: Vec::new(),
        }
    }

    /// Validates widths, range and pairwise disjointness.
    pub fn from_pairs(stage: usize, den: u64, pairs: Vec<SwapPair>) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidSwapPair("zero denominator".into()));
        }
        let mut pieces = Vec::with_capacity(2 * pairs.len());
        for p in &pairs {
            if p.width == 0 {
                return Err(Error::InvalidSwapPair(format!("zero width at {}", p.left)));
            }
            for (a, b) in [(p.left, p.right), (p.right, p.left)] {
                if a.checked_add(p.width).map_or(true, |end| end > den) {
                    return Err(Error::InvalidSwapPair(format!(
                        "interval at {a} of width {} leaves [0, 1)",
                        p.width
                    )));
                }
                pieces.push(Piece {
                    start: a,
                    width: p.width,
                    target: b,
                });
            }
        }
        pieces.sort_by_key(|p| p.start);
        for w in pieces.windows(2) {
            if w[0].start + w[0].width > w[1].start {
                return Err(Error::OverlappingIntervals(w[1].start));
            }
        }
        Ok(Self {
            stage,
            den,
            pairs,
            pieces,
        })
    }

    pub fn stage(&self) -> usize {
        self.stage
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn pairs(&self) -> &[SwapPair] {
        &self.pairs
    }

    pub fn is_identity(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Image of `num / (den * factor)`, a point on a grid `factor` times finer.
    #[inline]
    pub fn apply_scaled(&self, num: u64, factor: u64) -> u64 {
        let cell = num / factor;
        let i = self.pieces.partition_point(|p| p.start <= cell);
        if i == 0 {
            return num;
        }
        let p = &self.pieces[i - 1];
        if cell < p.start + p.width {
            num - p.start * factor + p.target * factor
        } else {
            num
        }
    }

    /// Image of a grid point whose denominator is a multiple of the map's.
    pub fn apply(&self, p: GridPoint) -> Result<GridPoint> {
        if p.den % self.den != 0 {
            return Err(Error::IncompatibleDenominators(self.den, p.den));
        }
        Ok(GridPoint {
            num: self.apply_scaled(p.num, p.den / self.den),
            den: p.den,
        })
    }

    /// The single-class maps `f_l`, in ascending `l`.
    pub fn class_maps(&self) -> Vec<SwapMap> {
        let mut out: Vec<SwapMap> = Vec::new();
        let mut start = 0;
        while start < self.pairs.len() {
            let ell = self.pairs[start].ell;
            let end = start
                + self.pairs[start..]
                    .iter()
                    .take_while(|p| p.ell == ell)
                    .count();
            out.push(
                SwapMap::from_pairs(self.stage, self.den, self.pairs[start..end].to_vec())
                    .expect("sub-map of a valid map"),
            );
            start = end;
        }
        out
    }

    /// Total swapped width per class, left and right side.
    pub fn widths_by_class(&self) -> Vec<(u64, u64, u64)> {
        let mut out: Vec<(u64, u64, u64)> = Vec::new();
        for p in &self.pairs {
            match out.last_mut() {
                Some(last) if last.0 == p.ell => {
                    last.1 += p.width;
                    last.2 += p.width;
                }
                _ => out.push((p.ell, p.width, p.width)),
            }
        }
        out
    }
}

/// Image of `p` under `m`.
pub fn apply_swap(m: &SwapMap, p: GridPoint) -> Result<GridPoint> {
    m.apply(p)
}

/// For every class `l >= 1`, pairs the first `rho` empty left gaps with the
/// first `rho` occupied right gaps, both in ascending ordered index.
pub fn build_swap_map(t: &GapClassTable) -> Result<SwapMap> {
    let mut pairs = Vec::new();
    for (&ell, c) in t.classes().range(1..) {
        for (&i, &j) in c.left_empty.iter().zip(&c.right_occupied) {
            pairs.push(SwapPair {
                ell,
                left: t.start(i),
                right: t.start(j),
                width: ell,
            });
        }
    }
    SwapMap::from_pairs(t.stage(), t.den(), pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::classes::gap_classes;
    use crate::oracle;
    use crate::points::PointSet;
    use crate::rng::SeededStream;

    fn tenths() -> SwapMap {
        SwapMap::from_pairs(
            1,
            10,
            vec![SwapPair {
                ell: 1,
                left: 1,
                right: 7,
                width: 1,
            }],
        )
        .unwrap()
    }

    fn gp(num: u64, den: u64) -> GridPoint {
        GridPoint::new(num, den).unwrap()
    }

    #[test]
    fn identity_fixes_points() {
        let m = SwapMap::identity(1, 10);
        for v in 0..100 {
            assert_eq!(m.apply(gp(v, 100)).unwrap(), gp(v, 100));
        }
    }

    #[test]
    fn single_pair_translation() {
        let m = tenths();
        assert_eq!(m.apply(gp(15, 100)).unwrap(), gp(75, 100));
        assert_eq!(m.apply(gp(75, 100)).unwrap(), gp(15, 100));
        assert_eq!(m.apply(gp(50, 100)).unwrap(), gp(50, 100));
        assert_eq!(m.apply(gp(73, 100)).unwrap(), gp(13, 100));
        // half-open: the right endpoint is fixed
        assert_eq!(m.apply(gp(20, 100)).unwrap(), gp(20, 100));
        assert_eq!(m.apply(gp(10, 100)).unwrap(), gp(70, 100));
    }

    #[test]
    fn involution_on_grid() {
        let m = tenths();
        for v in 0..1000 {
            let p = gp(v, 1000);
            assert_eq!(m.apply(m.apply(p).unwrap()).unwrap(), p);
        }
    }

    #[test]
    fn incompatible_denominator() {
        assert!(tenths().apply(gp(1, 15)).is_err());
    }

    #[test]
    fn overlap_detected() {
        let pairs = vec![
            SwapPair { ell: 2, left: 0, right: 5, width: 2 },
            SwapPair { ell: 2, left: 1, right: 8, width: 2 },
        ];
        assert!(matches!(SwapMap::from_pairs(1, 10, pairs), Err(Error::OverlappingIntervals(_))));
        let outside = vec![SwapPair { ell: 3, left: 0, right: 8, width: 3 }];
        assert!(SwapMap::from_pairs(1, 10, outside).is_err());
    }

    #[test]
    fn empty_table_gives_identity() {
        // every left gap occupied, so mu = 0 for all classes
        let den = 100;
        let p = PointSet::from_grid(den, vec![0, 10, 20, 30]).unwrap();
        let q = PointSet::from_grid(den, vec![5, 15, 95, 99]).unwrap();
        let t = gap_classes(1, den, &p, &q).unwrap();
        assert!(build_swap_map(&t).unwrap().is_identity());
    }

    #[test]
    fn matches_brute_force_pairing() {
        for seed in 0..300 {
            let n_k = 10usize;
            let den = 100u64;
            let mut s = SeededStream::new(1000 + seed);
            let mut draw = || (s.next_dyadic() as u128 * den as u128 >> 53) as u64;
            let prefix: Vec<u64> = (0..n_k).map(|_| draw()).collect();
            let second: Vec<u64> = (0..n_k).map(|_| draw()).collect();
            let t = gap_classes(
                1,
                den,
                &PointSet::from_grid(den, prefix.clone()).unwrap(),
                &PointSet::from_grid(den, second.clone()).unwrap(),
            )
            .unwrap();
            let m = build_swap_map(&t).unwrap();
            let got: Vec<(u64, u64, u64)> = m.pairs().iter().map(|p| (p.ell, p.left, p.right)).collect();
            assert_eq!(got, oracle::swap_pairs(&prefix, &second, den), "seed {seed}");
        }
    }
}
