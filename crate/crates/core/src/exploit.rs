//! Best-response values against fixed Markov strategies.
//!
//! At an exact saddle point neither player gains by deviating, so both gains
//! reported here are zero for the solver's own strategies. For arbitrary
//! strategies both gains are nonnegative.

use crate::error::{Error, Result};
use crate::matrix::is_distribution;
use crate::scalar::Scalar;
use crate::solver::{ForecastTable, RainTable, ValueTable};
use crate::states::StateSpace;
use crate::strategy::MoveOrder;

#[derive(Clone, Debug, PartialEq)]
pub struct Exploitability<S> {
    /// Reference value `V_0`.
    pub value: S,
    /// Rainmaker's best-response value against the fixed forecaster.
    pub rainmaker_best_response: S,
    /// Forecaster's best-response value against the fixed rainmaker.
    pub forecaster_best_response: S,
    /// `rainmaker_best_response - value`
    pub rainmaker_gain: S,
    /// `value - forecaster_best_response`
    pub forecaster_gain: S,
}

impl<S: Scalar> Exploitability<S> {
    pub fn is_saddle(&self) -> bool {
        self.rainmaker_gain.approx_le(&S::zero()) && self.forecaster_gain.approx_le(&S::zero())
    }
}

/// Exploitability of the strategies stored in a solved table.
pub fn exploitability<S: Scalar>(table: &ValueTable<S>) -> Result<Exploitability<S>> {
    let missing = || Error::InvalidStrategy("value table was solved without strategy tables".into());
    let space = table.space.as_ref().ok_or_else(missing)?;
    let fore = table.forecaster.as_ref().ok_or_else(missing)?;
    let rain = table.rainmaker.as_ref().ok_or_else(missing)?;
    exploitability_of(space, table.order, fore, rain, &table.value)
}

pub fn exploitability_of<S: Scalar>(
    space: &StateSpace,
    order: MoveOrder,
    forecaster: &ForecastTable<S>,
    rainmaker: &RainTable<S>,
    reference: &S,
) -> Result<Exploitability<S>> {
    let rain_br = rainmaker_best_response(space, order, forecaster)?;
    let fore_br = forecaster_best_response(space, order, rainmaker)?;
    Ok(Exploitability {
        value: reference.clone(),
        rainmaker_gain: rain_br.clone() - reference.clone(),
        forecaster_gain: reference.clone() - fore_br.clone(),
        rainmaker_best_response: rain_br,
        forecaster_best_response: fore_br,
    })
}

fn check_shape<T>(space: &StateSpace, layers: &[Vec<Option<T>>], who: &str) -> Result<()> {
    let t = space.horizon() as usize;
    if layers.len() != t {
        return Err(Error::InvalidStrategy(format!("{who} table has {} layers, expected {t}", layers.len())));
    }
    for (i, layer) in layers.iter().enumerate() {
        if layer.len() != space.layer(i as u32).len() {
            return Err(Error::InvalidStrategy(format!(
                "{who} table layer {i} has {} states, expected {}",
                layer.len(),
                space.layer(i as u32).len()
            )));
        }
    }
    Ok(())
}

fn entry<'a, S>(layers: &'a [Vec<Option<Vec<S>>>], space: &StateSpace, t: usize, i: usize, who: &str) -> Result<&'a [S]> {
    layers[t][i].as_deref().ok_or_else(|| {
        Error::InvalidStrategy(format!(
            "{who} strategy has no entry for reachable state {} at t={t}",
            space.layer(t as u32).state(i).to_json(&space.grid())
        ))
    })
}

/// Walks forward from the empty state; `moves(t, i)` lists the
/// `(forecast, rain)` pairs with positive probability.
fn reachable(
    space: &StateSpace,
    mut moves: impl FnMut(usize, usize) -> Result<Vec<(usize, bool)>>,
) -> Result<Vec<Vec<bool>>> {
    let mut reach: Vec<Vec<bool>> = space.layers().iter().map(|l| vec![false; l.len()]).collect();
    reach[0][0] = true;
    for t in 0..space.horizon() as usize {
        let (layer, next) = (space.layer(t as u32), space.layer(t as u32 + 1));
        for i in 0..layer.len() {
            if !reach[t][i] {
                continue;
            }
            for (c, a) in moves(t, i)? {
                let j = next.index_of(&layer.state(i).successor(c, a)).expect("successor in next layer");
                reach[t + 1][j] = true;
            }
        }
    }
    Ok(reach)
}

fn terminal<S: Scalar>(space: &StateSpace, reach: &[bool]) -> Vec<S> {
    let g = space.grid();
    space
        .layer(space.horizon())
        .states()
        .iter()
        .zip(reach)
        .map(|(s, &r)| if r { s.terminal_score(&g) } else { S::zero() })
        .collect()
}

/// Value the rainmaker secures by best-responding to `forecaster`.
pub fn rainmaker_best_response<S: Scalar>(space: &StateSpace, order: MoveOrder, forecaster: &ForecastTable<S>) -> Result<S> {
    check_shape(space, &forecaster.layers, "forecaster")?;
    let n = space.grid().len();
    let reach = reachable(space, |t, i| {
        let dist = entry(&forecaster.layers, space, t, i, "forecaster")?;
        if !is_distribution(dist, n) {
            return Err(Error::InvalidStrategy(format!("forecaster entry at t={t} is not a distribution")));
        }
        Ok((0..n)
            .filter(|&c| !dist[c].is_zero())
            .flat_map(|c| [(c, false), (c, true)])
            .collect())
    })?;
    let horizon = space.horizon() as usize;
    let mut next = terminal::<S>(space, &reach[horizon]);
    for t in (0..horizon).rev() {
        let (layer, next_layer) = (space.layer(t as u32), space.layer(t as u32 + 1));
        let mut cur = vec![S::zero(); layer.len()];
        for (i, state) in layer.states().iter().enumerate() {
            if !reach[t][i] {
                continue;
            }
            let dist = entry(&forecaster.layers, space, t, i, "forecaster")?;
            let w = |c: usize, a: bool| next[next_layer.index_of(&state.successor(c, a)).expect("successor")].clone();
            cur[i] = match order {
                MoveOrder::Simultaneous => {
                    let expect = |a: bool| {
                        (0..n)
                            .filter(|&c| !dist[c].is_zero())
                            .fold(S::zero(), |acc, c| acc + dist[c].clone() * w(c, a))
                    };
                    let (dry, wet) = (expect(false), expect(true));
                    if wet >= dry { wet } else { dry }
                }
                MoveOrder::ForecastFirst => (0..n).filter(|&c| !dist[c].is_zero()).fold(S::zero(), |acc, c| {
                    let (dry, wet) = (w(c, false), w(c, true));
                    acc + dist[c].clone() * if wet >= dry { wet } else { dry }
                }),
            };
        }
        next = cur;
    }
    Ok(next[0].clone())
}

/// Value the forecaster secures by best-responding to `rainmaker`.
pub fn forecaster_best_response<S: Scalar>(space: &StateSpace, order: MoveOrder, rainmaker: &RainTable<S>) -> Result<S> {
    check_shape(space, &rainmaker.layers, "rainmaker")?;
    if rainmaker.order != order {
        return Err(Error::InvalidStrategy(format!(
            "rainmaker table is for {} order, not {order}",
            rainmaker.order
        )));
    }
    let n = space.grid().len();
    let width = match order {
        MoveOrder::Simultaneous => 1,
        MoveOrder::ForecastFirst => n,
    };
    let rain_prob = |probs: &[S], c: usize| -> S {
        match order {
            MoveOrder::Simultaneous => probs[0].clone(),
            MoveOrder::ForecastFirst => probs[c].clone(),
        }
    };
    let reach = reachable(space, |t, i| {
        let probs = entry(&rainmaker.layers, space, t, i, "rainmaker")?;
        if probs.len() != width || probs.iter().any(|p| !(S::zero().approx_le(p) && p.approx_le(&S::one()))) {
            return Err(Error::InvalidStrategy(format!("rainmaker entry at t={t} is not a probability list")));
        }
        let mut moves = Vec::new();
        for c in 0..n {
            let p = rain_prob(probs, c);
            if !p.is_zero() {
                moves.push((c, true));
            }
            if p != S::one() {
                moves.push((c, false));
            }
        }
        Ok(moves)
    })?;
    let horizon = space.horizon() as usize;
    let mut next = terminal::<S>(space, &reach[horizon]);
    for t in (0..horizon).rev() {
        let (layer, next_layer) = (space.layer(t as u32), space.layer(t as u32 + 1));
        let mut cur = vec![S::zero(); layer.len()];
        for (i, state) in layer.states().iter().enumerate() {
            if !reach[t][i] {
                continue;
            }
            let probs = entry(&rainmaker.layers, space, t, i, "rainmaker")?;
            let w = |c: usize, a: bool| next[next_layer.index_of(&state.successor(c, a)).expect("successor")].clone();
            let mut best: Option<S> = None;
            for c in 0..n {
                let p = rain_prob(probs, c);
                let mut v = S::zero();
                if !p.is_zero() {
                    v = v + p.clone() * w(c, true);
                }
                if p != S::one() {
                    v = v + (S::one() - p) * w(c, false);
                }
                if best.as_ref().is_none_or(|b| v < *b) {
                    best = Some(v);
                }
            }
            cur[i] = best.expect("non-empty grid");
        }
        next = cur;
    }
    Ok(next[0].clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::scalar::{ratio, Exact};
    use crate::solver::{backward_induction, SolveOptions};

    fn solve(n: u32, t: u32, order: MoveOrder) -> ValueTable<Exact> {
        backward_induction(&Grid::new(n).unwrap(), t, order, &SolveOptions::default()).unwrap()
    }

    #[test]
    fn solver_strategies_are_a_saddle() {
        for order in [MoveOrder::Simultaneous, MoveOrder::ForecastFirst] {
            for (n, t) in [(1, 4), (2, 1), (2, 3), (2, 5)] {
                let e = exploitability(&solve(n, t, order)).unwrap();
                assert_eq!(e.rainmaker_gain, ratio(0, 1), "N={n} T={t} {order}");
                assert_eq!(e.forecaster_gain, ratio(0, 1), "N={n} T={t} {order}");
            }
        }
    }

    #[test]
    fn constant_low_forecast_is_exploited_by_rain() {
        let table = solve(2, 4, MoveOrder::Simultaneous);
        let space = table.space.as_ref().unwrap();
        let constant = ForecastTable::<Exact>::constant(space, 0);
        let v = rainmaker_best_response(space, MoveOrder::Simultaneous, &constant).unwrap();
        assert_eq!(v, ratio(3, 4));
    }

    #[test]
    fn missing_reachable_entry_is_rejected() {
        let table = solve(2, 2, MoveOrder::Simultaneous);
        let space = table.space.as_ref().unwrap();
        let mut fore = ForecastTable::<Exact>::constant(space, 0);
        // Forecasting 1/4 first never reaches states that used 3/4 at t=1.
        let unreachable = space
            .layer(1)
            .states()
            .iter()
            .position(|s| s.cells()[1].uses == 1)
            .unwrap();
        fore.layers[1][unreachable] = None;
        assert!(rainmaker_best_response(space, MoveOrder::Simultaneous, &fore).is_ok());
        let reachable = space.layer(1).states().iter().position(|s| s.cells()[0].uses == 1).unwrap();
        fore.layers[1][reachable] = None;
        let err = rainmaker_best_response(space, MoveOrder::Simultaneous, &fore).unwrap_err();
        assert!(matches!(err, Error::InvalidStrategy(_)));
    }

    #[test]
    fn wrong_shape_is_rejected() {
        let table = solve(2, 2, MoveOrder::Simultaneous);
        let space = table.space.as_ref().unwrap();
        let mut rain = table.rainmaker.clone().unwrap();
        rain.layers.pop();
        assert!(forecaster_best_response(space, MoveOrder::Simultaneous, &rain).is_err());
        let rain = table.rainmaker.clone().unwrap();
        assert!(forecaster_best_response(space, MoveOrder::ForecastFirst, &rain).is_err());
    }
}
