//! Per-grid-point usage and rain counts.
//!
//! The terminal score depends on a history only through `(n(d), r(d))` for
//! every grid point, since `G(d) = r(d) - n(d) d`. The solver indexes its
//! state space by these counts and strategies are keyed on them.

use serde::{Deserialize, Serialize};

use crate::grid::Grid;
use crate::scalar::Scalar;

/// `(n, r)`: periods that used a grid point and how many of them rained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub uses: u32,
    pub rain: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CountState {
    cells: Vec<Cell>,
}

impl CountState {
    pub fn empty(grid: &Grid) -> Self {
        CountState {
            cells: vec![Cell::default(); grid.len()],
        }
    }

    /// Returns `None` when some `rain > uses`.
    pub fn from_cells(cells: Vec<Cell>) -> Option<Self> {
        cells
            .iter()
            .all(|c| c.rain <= c.uses)
            .then_some(CountState { cells })
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn time(&self) -> u32 {
        self.cells.iter().map(|c| c.uses).sum()
    }

    pub fn record(&mut self, forecast: usize, rain: bool) {
        let cell = &mut self.cells[forecast];
        cell.uses += 1;
        cell.rain += u32::from(rain);
    }

    pub(crate) fn unrecord(&mut self, forecast: usize, rain: bool) {
        let cell = &mut self.cells[forecast];
        cell.uses -= 1;
        cell.rain -= u32::from(rain);
    }

    pub fn successor(&self, forecast: usize, rain: bool) -> Self {
        let mut next = self.clone();
        next.record(forecast, rain);
        next
    }

    /// `G(d) = r(d) - n(d) d` for grid index `k`.
    pub fn gap<S: Scalar>(&self, grid: &Grid, k: usize) -> S {
        let c = self.cells[k];
        // r - n(2k+1)/(2N) = (2N r - (2k+1) n) / (2N)
        let num = 2 * grid.n() as i64 * c.rain as i64 - (2 * k as i64 + 1) * c.uses as i64;
        S::from_ratio(num, 2 * grid.n() as i64)
    }

    /// `(1/T) sum_d |r_d - n_d d|` with `T` the elapsed time.
    pub fn terminal_score<S: Scalar>(&self, grid: &Grid) -> S {
        let t = self.time();
        if t == 0 {
            return S::zero();
        }
        let two_n = 2 * grid.n() as i64;
        let total: i64 = self
            .cells
            .iter()
            .enumerate()
            .map(|(k, c)| (two_n * c.rain as i64 - (2 * k as i64 + 1) * c.uses as i64).abs())
            .sum();
        S::from_ratio(total, two_n * t as i64)
    }

    /// Grid index used most often so far, lowest index on ties; `None` before
    /// the first period.
    pub fn most_frequent(&self) -> Option<usize> {
        if self.time() == 0 {
            return None;
        }
        let mut best = 0;
        for (k, c) in self.cells.iter().enumerate() {
            if c.uses > self.cells[best].uses {
                best = k;
            }
        }
        Some(best)
    }

    /// Compact key: `(n, r)` per grid index.
    pub fn key(&self) -> Vec<(u32, u32)> {
        self.cells.iter().map(|c| (c.uses, c.rain)).collect()
    }

    /// Serialized form: `[[d, n_d, r_d], ...]` sorted by `d`.
    pub fn to_json(&self, grid: &Grid) -> serde_json::Value {
        serde_json::Value::Array(
            self.cells
                .iter()
                .enumerate()
                .map(|(k, c)| serde_json::json!([grid.label(k), c.uses, c.rain]))
                .collect(),
        )
    }

    pub fn from_json(value: &serde_json::Value, grid: &Grid) -> Option<Self> {
        let rows = value.as_array()?;
        if rows.len() != grid.len() {
            return None;
        }
        let mut cells = vec![Cell::default(); grid.len()];
        let mut seen = vec![false; grid.len()];
        for row in rows {
            let row = row.as_array()?;
            if row.len() != 3 {
                return None;
            }
            let d = match &row[0] {
                serde_json::Value::String(s) => grid.parse_point(s)?,
                serde_json::Value::Number(x) => grid.parse_point(&x.to_string())?,
                _ => return None,
            };
            let uses = u32::try_from(row[1].as_u64()?).ok()?;
            let rain = u32::try_from(row[2].as_u64()?).ok()?;
            if seen[d] {
                return None;
            }
            seen[d] = true;
            cells[d] = Cell { uses, rain };
        }
        CountState::from_cells(cells)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Exact};

    #[test]
    fn terminal_score_matches_gaps() {
        let g = Grid::new(2).unwrap();
        let mut s = CountState::empty(&g);
        s.record(0, true);
        s.record(1, false);
        assert_eq!(s.gap::<Exact>(&g, 0), ratio(3, 4));
        assert_eq!(s.gap::<Exact>(&g, 1), ratio(-3, 4));
        assert_eq!(s.terminal_score::<Exact>(&g), ratio(3, 4));
    }

    #[test]
    fn json_round_trip() {
        let g = Grid::new(3).unwrap();
        let mut s = CountState::empty(&g);
        s.record(2, true);
        s.record(2, false);
        s.record(0, true);
        let v = s.to_json(&g);
        assert_eq!(v[2], serde_json::json!(["5/6", 2, 1]));
        assert_eq!(CountState::from_json(&v, &g), Some(s));
        assert_eq!(CountState::from_json(&serde_json::json!([["1/6", 1, 2]]), &g), None);
    }

    #[test]
    fn most_frequent_ties_low() {
        let g = Grid::new(3).unwrap();
        let mut s = CountState::empty(&g);
        assert_eq!(s.most_frequent(), None);
        s.record(2, true);
        s.record(1, true);
        assert_eq!(s.most_frequent(), Some(1));
        s.record(2, false);
        assert_eq!(s.most_frequent(), Some(2));
    }
}
