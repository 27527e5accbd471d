//! Exact value of the `T`-period calibration game by backward induction.
//!
//! The state after `t` periods is the count state; the terminal payoff is
//! `K_T` of that state. In simultaneous order each state is a 2xN stage game
//! (rainmaker rows `a = 0, 1`, forecaster columns `d`) whose entries are the
//! successor values. In forecast-first order the rainmaker reacts to the
//! realized forecast, so the forecaster minimizes over pure columns of
//! `max_a V(state + (a, c))`.

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::counts::CountState;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::matrix::{solve_two_row, MatrixGame};
use crate::scalar::Scalar;
use crate::states::{check_budget, enumerate_states, estimate, Layer, StateSpace, DEFAULT_STATE_BUDGET};
use crate::strategy::{ForecasterSpec, MarkovPolicy, MoveOrder, Prob};

#[derive(Clone, Debug)]
pub struct SolveOptions {
    pub state_budget: u128,
    /// Keep every layer's values and both players' strategies. Without it
    /// only two layers are resident and the table carries just the value.
    pub keep_tables: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            state_budget: DEFAULT_STATE_BUDGET,
            keep_tables: true,
        }
    }
}

/// Forecaster Markov strategy: a distribution over grid points per state.
/// `None` marks a state the strategy does not cover.
#[derive(Clone, Debug, PartialEq)]
pub struct ForecastTable<S> {
    pub layers: Vec<Vec<Option<Vec<S>>>>,
}

/// Rainmaker Markov strategy as rain probabilities per state: one entry in
/// simultaneous order, one per forecast in forecast-first order.
#[derive(Clone, Debug, PartialEq)]
pub struct RainTable<S> {
    pub order: MoveOrder,
    pub layers: Vec<Vec<Option<Vec<S>>>>,
}

impl<S: Scalar> ForecastTable<S> {
    /// Always forecast grid index `k`, for the states of layers `0..T`.
    pub fn constant(space: &StateSpace, k: usize) -> Self {
        let n = space.grid().len();
        let dist: Vec<S> = (0..n).map(|j| if j == k { S::one() } else { S::zero() }).collect();
        ForecastTable {
            layers: playable_layers(space)
                .map(|l| vec![Some(dist.clone()); l.len()])
                .collect(),
        }
    }

    /// Dense form of a serialized policy; uncovered states become `None`.
    pub fn from_policy(space: &StateSpace, policy: &MarkovPolicy) -> Result<Self> {
        if policy.grid() != space.grid() {
            return Err(Error::InvalidStrategy("policy grid differs from the state space".into()));
        }
        Ok(ForecastTable {
            layers: playable_layers(space)
                .map(|l| {
                    l.states()
                        .iter()
                        .map(|s| policy.get(s).map(|d| d.iter().map(Prob::value).collect()))
                        .collect()
                })
                .collect(),
        })
    }

    pub fn to_policy(&self, space: &StateSpace) -> MarkovPolicy {
        let mut policy = MarkovPolicy::new(space.grid());
        for (t, layer) in self.layers.iter().enumerate() {
            for (i, dist) in layer.iter().enumerate() {
                if let Some(dist) = dist {
                    let probs = dist
                        .iter()
                        .map(|q| Prob::new(q.to_exact()).expect("solver mixes are probabilities"))
                        .collect();
                    policy
                        .insert(space.layer(t as u32).state(i).clone(), probs)
                        .expect("solver mixes sum to one");
                }
            }
        }
        policy
    }
}

fn playable_layers(space: &StateSpace) -> impl Iterator<Item = &Layer> {
    space.layers().iter().take(space.horizon() as usize)
}

#[derive(Clone, Debug)]
pub struct ValueTable<S> {
    pub grid: Grid,
    pub horizon: u32,
    pub order: MoveOrder,
    /// `V_0` at the empty state.
    pub value: S,
    pub layer_sizes: Vec<usize>,
    /// Present when solved with `keep_tables`.
    pub space: Option<StateSpace>,
    pub values: Option<Vec<Vec<S>>>,
    pub forecaster: Option<ForecastTable<S>>,
    pub rainmaker: Option<RainTable<S>>,
}

struct StageOutcome<S> {
    value: S,
    rain: Vec<S>,
    forecast: Vec<S>,
}

/// Solves one state given the next layer's values.
fn solve_state<S: Scalar>(
    grid: &Grid,
    order: MoveOrder,
    state: &CountState,
    next: &Layer,
    next_values: &[S],
) -> StageOutcome<S> {
    let n = grid.len();
    let succ = |c: usize, rain: bool| {
        let idx = next
            .index_of(&state.successor(c, rain))
            .expect("successor lies in the next layer");
        next_values[idx].clone()
    };
    match order {
        MoveOrder::Simultaneous => {
            let mut payoff = Vec::with_capacity(2 * n);
            payoff.extend((0..n).map(|c| succ(c, false)));
            payoff.extend((0..n).map(|c| succ(c, true)));
            let game = MatrixGame::new(2, n, payoff).expect("finite 2xN stage game");
            let sol = solve_two_row(&game);
            StageOutcome {
                value: sol.value,
                rain: vec![sol.row_mix[1].clone()],
                forecast: sol.col_mix,
            }
        }
        MoveOrder::ForecastFirst => {
            let mut rain = Vec::with_capacity(n);
            let mut best: Option<(usize, S)> = None;
            for c in 0..n {
                let (dry, wet) = (succ(c, false), succ(c, true));
                let (hi, rains) = if wet >= dry { (wet, true) } else { (dry, false) };
                rain.push(if rains { S::one() } else { S::zero() });
                if best.as_ref().is_none_or(|(_, b)| hi < *b) {
                    best = Some((c, hi));
                }
            }
            let (c, value) = best.expect("non-empty grid");
            let forecast = (0..n).map(|j| if j == c { S::one() } else { S::zero() }).collect();
            StageOutcome { value, rain, forecast }
        }
    }
}

fn terminal_values<S: Scalar>(grid: &Grid, layer: &Layer) -> Vec<S> {
    layer.states().par_iter().map(|s| s.terminal_score(grid)).collect()
}

fn solve_layer<S: Scalar>(
    grid: &Grid,
    order: MoveOrder,
    layer: &Layer,
    next: &Layer,
    next_values: &[S],
) -> Vec<StageOutcome<S>> {
    // Results come back in state-index order regardless of scheduling.
    layer
        .states()
        .par_iter()
        .map(|s| solve_state(grid, order, s, next, next_values))
        .collect()
}

/// Minimax value of `E[K_T]` (rainmaker maximizing, forecaster minimizing)
/// together with Markov strategies for both players.
pub fn backward_induction<S: Scalar>(
    grid: &Grid,
    horizon: u32,
    order: MoveOrder,
    options: &SolveOptions,
) -> Result<ValueTable<S>> {
    if horizon == 0 {
        return Err(Error::arg("horizon must be at least 1"));
    }
    let sizes = estimate(grid, horizon);
    if options.keep_tables {
        solve_full(grid, horizon, order, options.state_budget)
    } else {
        let peak = sizes.windows(2).map(|w| w[0].saturating_add(w[1])).max().unwrap_or(sizes[0]);
        check_budget("two resident layers", peak, options.state_budget)?;
        solve_value_only(grid, horizon, order, sizes)
    }
}

fn solve_full<S: Scalar>(grid: &Grid, horizon: u32, order: MoveOrder, budget: u128) -> Result<ValueTable<S>> {
    let space = enumerate_states(grid, horizon, budget)?;
    let mut values: Vec<Vec<S>> = vec![Vec::new(); horizon as usize + 1];
    let mut fore_layers = vec![Vec::new(); horizon as usize];
    let mut rain_layers = vec![Vec::new(); horizon as usize];
    values[horizon as usize] = terminal_values(grid, space.layer(horizon));
    for t in (0..horizon).rev() {
        let outcomes = solve_layer(grid, order, space.layer(t), space.layer(t + 1), &values[t as usize + 1]);
        let mut layer_values = Vec::with_capacity(outcomes.len());
        let mut fore = Vec::with_capacity(outcomes.len());
        let mut rain = Vec::with_capacity(outcomes.len());
        for o in outcomes {
            layer_values.push(o.value);
            fore.push(Some(o.forecast));
            rain.push(Some(o.rain));
        }
        values[t as usize] = layer_values;
        fore_layers[t as usize] = fore;
        rain_layers[t as usize] = rain;
        log::debug!("solved layer t={t}");
    }
    Ok(ValueTable {
        grid: *grid,
        horizon,
        order,
        value: values[0][0].clone(),
        layer_sizes: space.layer_sizes(),
        space: Some(space),
        values: Some(values),
        forecaster: Some(ForecastTable { layers: fore_layers }),
        rainmaker: Some(RainTable {
            order,
            layers: rain_layers,
        }),
    })
}

fn solve_value_only<S: Scalar>(grid: &Grid, horizon: u32, order: MoveOrder, sizes: Vec<u128>) -> Result<ValueTable<S>> {
    let mut next = Layer::build(grid, horizon);
    let mut next_values = terminal_values::<S>(grid, &next);
    for t in (0..horizon).rev() {
        let layer = Layer::build(grid, t);
        let values: Vec<S> = solve_layer(grid, order, &layer, &next, &next_values)
            .into_iter()
            .map(|o| o.value)
            .collect();
        next = layer;
        next_values = values;
    }
    Ok(ValueTable {
        grid: *grid,
        horizon,
        order,
        value: next_values[0].clone(),
        layer_sizes: sizes.into_iter().map(|s| s as usize).collect(),
        space: None,
        values: None,
        forecaster: None,
        rainmaker: None,
    })
}

impl<S: Scalar> ValueTable<S> {
    /// The stored forecaster strategy as a playable spec.
    pub fn forecaster_spec(&self) -> Option<ForecasterSpec> {
        let space = self.space.as_ref()?;
        Some(ForecasterSpec::MarkovTable(self.forecaster.as_ref()?.to_policy(space)))
    }

    /// Main upper bound `1/(2N) + (1/2) sqrt(N/T)` for comparison.
    pub fn bound(&self) -> f64 {
        crate::bounds::main_bound(self.grid.n(), self.horizon as u64)
    }

    /// CSV header matching [`ValueTable::summary_record`].
    pub const SUMMARY_HEADER: [&'static str; 6] = ["N", "T", "order", "value", "value_decimal", "bound"];

    pub fn summary_record(&self) -> [String; 6] {
        [
            self.grid.n().to_string(),
            self.horizon.to_string(),
            self.order.to_string(),
            self.value.to_plain_string(),
            crate::scalar::format_sig(self.value.to_f64(), 12),
            crate::scalar::format_sig(self.bound(), 12),
        ]
    }

    /// JSON layout:
    ///
    /// ```text
    /// { "grid": N, "horizon": T, "order": "...", "value": {...},
    ///   "layer_sizes": [...],
    ///   "forecaster": {"kind": "markov_table", "params": {"grid": N, "entries": [...]}},
    ///   "layers": [ { "t": t, "states": [ { "state": [[d, n_d, r_d], ...],
    ///                 "value": {...}, "rain": [...], "forecast": [...] } ] } ] }
    /// ```
    ///
    /// `rain` holds one rain probability in simultaneous order and one per
    /// forecast in forecast-first order. Terminal states carry no strategies.
    pub fn to_json(&self) -> Value {
        let mut out = json!({
            "grid": self.grid.n(),
            "horizon": self.horizon,
            "order": self.order,
            "value": self.value.to_json(),
            "bound": self.bound(),
            "layer_sizes": self.layer_sizes,
        });
        if let Some(spec) = self.forecaster_spec() {
            out["forecaster"] = serde_json::to_value(spec).expect("spec serializes");
        }
        if let (Some(space), Some(values)) = (&self.space, &self.values) {
            let strings = |v: &Option<Vec<S>>| -> Value {
                match v {
                    Some(v) => v.iter().map(|q| Value::String(q.to_plain_string())).collect(),
                    None => Value::Null,
                }
            };
            let layers: Vec<Value> = space
                .layers()
                .iter()
                .enumerate()
                .map(|(t, layer)| {
                    let states: Vec<Value> = layer
                        .states()
                        .iter()
                        .enumerate()
                        .map(|(i, s)| {
                            let mut entry = json!({
                                "state": s.to_json(&self.grid),
                                "value": values[t][i].to_json(),
                            });
                            if t < self.horizon as usize {
                                if let Some(r) = &self.rainmaker {
                                    entry["rain"] = strings(&r.layers[t][i]);
                                }
                                if let Some(f) = &self.forecaster {
                                    entry["forecast"] = strings(&f.layers[t][i]);
                                }
                            }
                            entry
                        })
                        .collect();
                    json!({ "t": t, "states": states })
                })
                .collect();
            out["layers"] = Value::Array(layers);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Exact};

    fn solve(n: u32, t: u32, order: MoveOrder) -> ValueTable<Exact> {
        backward_induction(&Grid::new(n).unwrap(), t, order, &SolveOptions::default()).unwrap()
    }

    #[test]
    fn single_point_grid_is_one_half() {
        for t in 1..=16 {
            assert_eq!(solve(1, t, MoveOrder::Simultaneous).value, ratio(1, 2), "T={t}");
        }
    }

    #[test]
    fn two_points_one_period() {
        let table = solve(2, 1, MoveOrder::Simultaneous);
        assert_eq!(table.value, ratio(1, 2));
        let f = table.forecaster.as_ref().unwrap();
        assert_eq!(f.layers[0][0], Some(vec![ratio(1, 2), ratio(1, 2)]));
        let r = table.rainmaker.as_ref().unwrap();
        assert_eq!(r.layers[0][0], Some(vec![ratio(1, 2)]));
    }

    #[test]
    fn terminal_layer_is_the_score() {
        let table = solve(2, 3, MoveOrder::Simultaneous);
        let space = table.space.as_ref().unwrap();
        let values = table.values.as_ref().unwrap();
        for (i, s) in space.layer(3).states().iter().enumerate() {
            assert_eq!(values[3][i], s.terminal_score::<Exact>(&table.grid));
        }
    }

    #[test]
    fn value_only_matches_full() {
        let g = Grid::new(2).unwrap();
        let lean = SolveOptions {
            keep_tables: false,
            ..Default::default()
        };
        for order in [MoveOrder::Simultaneous, MoveOrder::ForecastFirst] {
            let a: ValueTable<Exact> = backward_induction(&g, 5, order, &lean).unwrap();
            assert_eq!(a.value, solve(2, 5, order).value);
            assert!(a.forecaster.is_none());
        }
    }

    #[test]
    fn zero_horizon_rejected() {
        let g = Grid::new(1).unwrap();
        assert!(backward_induction::<Exact>(&g, 0, MoveOrder::Simultaneous, &SolveOptions::default()).is_err());
    }

    #[test]
    fn budget_exceeded_is_a_resource_error() {
        let g = Grid::new(2).unwrap();
        let tiny = SolveOptions {
            state_budget: 10,
            keep_tables: true,
        };
        let err = backward_induction::<f64>(&g, 4, MoveOrder::Simultaneous, &tiny).unwrap_err();
        assert!(err.is_resource());
    }

    #[test]
    fn json_layout() {
        let table = solve(2, 2, MoveOrder::Simultaneous);
        let v = table.to_json();
        assert_eq!(v["value"]["rational"], table.value.to_plain_string());
        assert_eq!(v["layers"][0]["states"][0]["state"], serde_json::json!([["1/4", 0, 0], ["3/4", 0, 0]]));
        let spec: ForecasterSpec = serde_json::from_value(v["forecaster"].clone()).unwrap();
        assert!(matches!(spec, ForecasterSpec::MarkovTable(ref p) if p.len() == 1 + 4));
    }
}
