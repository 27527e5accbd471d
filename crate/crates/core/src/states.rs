//! Dense indexing of count states, one layer per elapsed time.
//!
//! A layer at time `t` holds every assignment of `(n_d, r_d)` with
//! `0 <= r_d <= n_d` and `sum n_d = t`. Since there are `n + 1` choices of `r`
//! for each `n`, the layer size is the coefficient of `z^t` in
//! `(1 - z)^(-2N)`, namely `C(t + 2N - 1, 2N - 1)`.

use std::collections::HashMap;

use crate::counts::{Cell, CountState};
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Default cap on the number of states held at once.
pub const DEFAULT_STATE_BUDGET: u128 = 50_000_000;

#[derive(Clone, Debug)]
pub struct Layer {
    time: u32,
    states: Vec<CountState>,
    index: HashMap<CountState, usize>,
}

impl Layer {
    /// Enumerates layer `t` in lexicographic order of `(n_1, r_1, n_2, r_2, ...)`.
    pub fn build(grid: &Grid, t: u32) -> Self {
        let mut states = Vec::with_capacity(layer_size(grid, t).min(1 << 24) as usize);
        let mut cells = vec![Cell::default(); grid.len()];
        fill(&mut cells, 0, t, &mut states);
        let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        Layer { time: t, states, index }
    }

    pub fn time(&self) -> u32 {
        self.time
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[CountState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &CountState {
        &self.states[i]
    }

    pub fn index_of(&self, state: &CountState) -> Option<usize> {
        self.index.get(state).copied()
    }
}

fn fill(cells: &mut Vec<Cell>, k: usize, remaining: u32, out: &mut Vec<CountState>) {
    let last = k + 1 == cells.len();
    let uses_range = if last { remaining..=remaining } else { 0..=remaining };
    for uses in uses_range {
        for rain in 0..=uses {
            cells[k] = Cell { uses, rain };
            if last {
                out.push(CountState::from_cells(cells.clone()).expect("rain <= uses"));
            } else {
                fill(cells, k + 1, remaining - uses, out);
            }
        }
    }
    cells[k] = Cell::default();
}

/// `C(t + 2N - 1, 2N - 1)`, saturating.
pub fn layer_size(grid: &Grid, t: u32) -> u128 {
    binomial(t as u128 + 2 * grid.n() as u128 - 1, 2 * grid.n() as u128 - 1)
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step.
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Layer sizes for `t = 0..=T`, computed without allocating.
pub fn estimate(grid: &Grid, horizon: u32) -> Vec<u128> {
    (0..=horizon).map(|t| layer_size(grid, t)).collect()
}

/// Rough bytes per stored state in a full solve (key, index entry, value,
/// strategies), used for the estimate printed before allocation.
pub fn estimated_bytes(grid: &Grid, states: u128, exact: bool) -> u128 {
    let key = 8 * grid.len() as u128 + 48;
    let scalar = if exact { 64 } else { 8 };
    states.saturating_mul(2 * key + scalar * (2 * grid.len() as u128 + 2))
}

#[derive(Clone, Debug)]
pub struct StateSpace {
    grid: Grid,
    horizon: u32,
    layers: Vec<Layer>,
}

impl StateSpace {
    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn layer(&self, t: u32) -> &Layer {
        &self.layers[t as usize]
    }

    pub fn layers(&self) -> &[Layer] {
        &self.layers
    }

    pub fn layer_sizes(&self) -> Vec<usize> {
        self.layers.iter().map(Layer::len).collect()
    }

    pub fn total(&self) -> usize {
        self.layers.iter().map(Layer::len).sum()
    }

    /// `(t, index)` of a state.
    pub fn locate(&self, state: &CountState) -> Option<(u32, usize)> {
        let t = state.time();
        let layer = self.layers.get(t as usize)?;
        layer.index_of(state).map(|i| (t, i))
    }
}

pub(crate) fn check_budget(what: &str, needed: u128, budget: u128) -> Result<()> {
    if needed > budget {
        return Err(Error::Resource {
            what: what.to_string(),
            needed,
            budget,
        });
    }
    Ok(())
}

/// Every layer `0..=T` with its index. Fails before allocating when the
/// total exceeds `budget`.
pub fn enumerate_states(grid: &Grid, horizon: u32, budget: u128) -> Result<StateSpace> {
    let sizes = estimate(grid, horizon);
    let total = sizes.iter().fold(0u128, |a, &b| a.saturating_add(b));
    log::info!(
        "state space N={} T={horizon}: {total} states, largest layer {}",
        grid.n(),
        sizes.iter().max().copied().unwrap_or(0)
    );
    check_budget("count-state enumeration", total, budget)?;
    let layers = (0..=horizon).map(|t| Layer::build(grid, t)).collect();
    Ok(StateSpace {
        grid: *grid,
        horizon,
        layers,
    })
}
