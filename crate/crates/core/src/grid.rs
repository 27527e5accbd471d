//! The forecast grid: midpoints of an even partition of `[0,1]` into `N` cells.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{ratio, Scalar};

/// Which neighbour wins when a probability sits exactly halfway between two
/// consecutive grid points (that is, at `k/N`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TieBreak {
    Down,
    Up,
}

/// Midpoint ties round to the lower grid point.
pub const TIE_BREAK: TieBreak = TieBreak::Down;

/// The grid `{1/(2N), 3/(2N), ..., (2N-1)/(2N)}`.
///
/// Points are addressed by index `k = 0..N`, with value `(2k+1)/(2N)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct Grid {
    n: u32,
}

impl TryFrom<u32> for Grid {
    type Error = Error;

    fn try_from(n: u32) -> Result<Self> {
        Grid::new(n)
    }
}

impl From<Grid> for u32 {
    fn from(g: Grid) -> u32 {
        g.n
    }
}

impl Grid {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::arg("grid size N must be at least 1"));
        }
        Ok(Grid { n })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.n as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point<S: Scalar>(&self, k: usize) -> S {
        debug_assert!(k < self.len());
        S::from_ratio(2 * k as i64 + 1, 2 * self.n as i64)
    }

    pub fn exact_point(&self, k: usize) -> BigRational {
        ratio(2 * k as i64 + 1, 2 * self.n as i64)
    }

    pub fn points<S: Scalar>(&self) -> Vec<S> {
        (0..self.len()).map(|k| self.point(k)).collect()
    }

    /// Half the spacing, `1/(2N)`: the worst-case rounding distance.
    pub fn half_spacing<S: Scalar>(&self) -> S {
        S::from_ratio(1, 2 * self.n as i64)
    }

    /// Index of `x` if it is exactly a grid point.
    pub fn index_of<S: Scalar>(&self, x: &S) -> Option<usize> {
        if *x <= S::zero() || *x >= S::one() {
            return None;
        }
        let c = x.ceil_scaled(2 * self.n as u64);
        if c % 2 == 0 {
            return None;
        }
        let k = ((c - 1) / 2) as usize;
        (k < self.len() && self.point::<S>(k) == *x).then_some(k)
    }

    /// Index of the grid point nearest to `p`, ties resolved by [`TIE_BREAK`].
    pub fn round_index<S: Scalar>(&self, p: &S) -> Result<usize> {
        if *p < S::zero() || *p > S::one() {
            return Err(Error::arg(format!(
                "probability {:?} outside [0,1]",
                p.to_f64()
            )));
        }
        let n = self.n as u64;
        // Cell k is (k/N, (k+1)/N]; ties at k/N fall to the cell below.
        let k = match TIE_BREAK {
            TieBreak::Down => p.ceil_scaled(n) - 1,
            TieBreak::Up => {
                let c = p.ceil_scaled(n);
                let on_boundary = S::from_ratio(c, n as i64) == *p;
                if on_boundary {
                    c
                } else {
                    c - 1
                }
            }
        };
        Ok(k.clamp(0, n as i64 - 1) as usize)
    }

    /// Renders a point as `"num/den"`.
    pub fn label(&self, k: usize) -> String {
        crate::scalar::format_rational(&self.exact_point(k))
    }

    /// Index of the point labelled `s` (a rational or decimal string).
    pub fn parse_point(&self, s: &str) -> Option<usize> {
        let r = crate::scalar::parse_rational(s)?;
        self.index_of(&r)
    }
}

pub fn make_grid(n: u32) -> Result<Grid> {
    Grid::new(n)
}

/// Nearest grid point to `p` (ties round down). Always within `1/(2N)`.
pub fn round_to_grid<S: Scalar>(p: &S, grid: &Grid) -> Result<S> {
    grid.round_index(p).map(|k| grid.point(k))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;
    use num_traits::Signed;

    fn exact_points(n: u32) -> Vec<Exact> {
        Grid::new(n).unwrap().points()
    }

    #[test]
    fn small_grids() {
        assert_eq!(exact_points(1), vec![ratio(1, 2)]);
        assert_eq!(exact_points(2), vec![ratio(1, 4), ratio(3, 4)]);
        assert_eq!(exact_points(3), vec![ratio(1, 6), ratio(1, 2), ratio(5, 6)]);
    }

    #[test]
    fn zero_rejected() {
        assert!(matches!(make_grid(0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn grid_invariants() {
        for n in 1..40 {
            let g = Grid::new(n).unwrap();
            let pts: Vec<Exact> = g.points();
            for w in pts.windows(2) {
                assert_eq!(&w[1] - &w[0], ratio(1, n as i64));
            }
            assert!(pts[0] > ratio(0, 1) && pts[pts.len() - 1] < ratio(1, 1));
            for k in 0..g.len() {
                assert_eq!(g.index_of(&pts[k]), Some(k));
            }
        }
    }

    #[test]
    fn rounding_examples() {
        let g5 = Grid::new(5).unwrap();
        assert_eq!(round_to_grid(&ratio(7, 10), &g5).unwrap(), ratio(7, 10));
        let g2 = Grid::new(2).unwrap();
        assert_eq!(round_to_grid(&ratio(1, 2), &g2).unwrap(), ratio(1, 4));
        assert_eq!(round_to_grid(&ratio(0, 1), &g2).unwrap(), ratio(1, 4));
        assert_eq!(round_to_grid(&ratio(1, 1), &g2).unwrap(), ratio(3, 4));
        assert_eq!(round_to_grid(&0.7f64, &g5).unwrap(), 0.7);
        assert!(round_to_grid(&ratio(11, 10), &g2).is_err());
        assert!(round_to_grid(&-0.1f64, &g2).is_err());
    }

    #[test]
    fn rounding_distance_and_ties_against_brute_force() {
        // Brute force: scan all points, keep the first strictly closer one.
        for n in 1..12u32 {
            let g = Grid::new(n).unwrap();
            let pts: Vec<Exact> = g.points();
            for num in 0..=(4 * n as i64) {
                let p = ratio(num, 4 * n as i64);
                let mut best = 0;
                for k in 1..pts.len() {
                    let dk = (&pts[k] - &p).abs();
                    let db = (&pts[best] - &p).abs();
                    if dk < db {
                        best = k;
                    }
                }
                assert_eq!(g.round_index(&p).unwrap(), best, "n={n} p={p}");
                assert!((&pts[best] - &p).abs() <= g.half_spacing::<Exact>());
            }
        }
    }

    #[test]
    fn off_grid_detection() {
        let g = Grid::new(2).unwrap();
        assert_eq!(g.parse_point("1/4"), Some(0));
        assert_eq!(g.parse_point("0.75"), Some(1));
        assert_eq!(g.parse_point("0.5"), None);
        assert_eq!(g.parse_point("0"), None);
    }
}
