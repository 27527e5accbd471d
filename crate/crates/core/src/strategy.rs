//! Rainmaker and forecaster strategies.
//!
//! Specs serialize as `{"kind": ..., "params": ...}`; see `docs/strategies.md`.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::counts::CountState;
use crate::error::{Error, Result};
use crate::grid::{round_to_grid, Grid};
use crate::scalar::{format_rational, parse_rational, Scalar};
use crate::transcript::Transcript;

/// A probability given as an exact rational. Accepts JSON numbers (read by
/// their decimal text, so `0.3` is `3/10`) or strings such as `"1/3"`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prob(BigRational);

impl Prob {
    pub fn new(r: BigRational) -> Result<Self> {
        if r.is_negative() || r > BigRational::one() {
            return Err(Error::arg(format!("probability {} outside [0,1]", format_rational(&r))));
        }
        Ok(Prob(r))
    }

    pub fn exact(&self) -> &BigRational {
        &self.0
    }

    pub fn value<S: Scalar>(&self) -> S {
        S::from_rational(&self.0)
    }
}

impl FromStr for Prob {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let r = parse_rational(s).ok_or_else(|| Error::arg(format!("'{s}' is not a number")))?;
        Prob::new(r)
    }
}

impl fmt::Display for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.0))
    }
}

impl Serialize for Prob {
    fn serialize<Ser: Serializer>(&self, s: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Prob {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        let text = match &v {
            serde_json::Value::String(s) => s.clone(),
            serde_json::Value::Number(n) => n.to_string(),
            other => return Err(serde::de::Error::custom(format!("expected probability, got {other}"))),
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MoveOrder {
    /// Both players act on the history up to the previous period.
    #[default]
    Simultaneous,
    /// The rainmaker also sees the current forecast.
    ForecastFirst,
}

impl FromStr for MoveOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simultaneous" | "sim" => Ok(MoveOrder::Simultaneous),
            "forecast-first" | "forecast_first" | "ff" => Ok(MoveOrder::ForecastFirst),
            _ => Err(Error::arg(format!("unknown move order '{s}' (simultaneous | forecast-first)"))),
        }
    }
}

impl fmt::Display for MoveOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MoveOrder::Simultaneous => "simultaneous",
            MoveOrder::ForecastFirst => "forecast-first",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum RainmakerSpec {
    /// Rain with fixed probability every period.
    Iid { p: Prob },
    /// Fresh `p_t ~ U[0,1]` each period, disclosed before the forecast.
    RevealedUniform,
    /// Replays a fixed list of probabilities, disclosed before the forecast.
    Playback { probs: Vec<Prob> },
    /// Deterministic adaptive adversary: picks the weather that maximizes
    /// `sum |G(d)|` assuming the forecaster repeats its most frequent past
    /// forecast. Ties and the first period go to rain.
    GapChaser,
    /// Forecast-first only: rain exactly when the forecast is below 1/2.
    CounterForecast,
}

impl RainmakerSpec {
    /// Whether `p_t` is determined before the current forecast is made.
    pub fn exposes_prob(&self) -> bool {
        !matches!(self, RainmakerSpec::CounterForecast)
    }

    /// Whether every `p_t` has finite support given the history.
    pub fn is_finitely_supported(&self) -> bool {
        !matches!(self, RainmakerSpec::RevealedUniform)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum ForecasterSpec {
    /// Rounds the rainmaker's current rain probability to the grid.
    BestResponse,
    /// Always forecasts the same grid point.
    Constant { d: Prob },
    /// Count-state keyed mixed strategy, typically exported by the solver.
    MarkovTable(MarkovPolicy),
}

/// A forecaster strategy that depends on the history only through the count
/// state.
///
/// JSON: `{"grid": N, "entries": [{"state": [[d, n_d, r_d], ...], "dist": [q_1, ..., q_N]}, ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPolicy", into = "RawPolicy")]
pub struct MarkovPolicy {
    grid: Grid,
    table: HashMap<CountState, Vec<Prob>>,
}

#[derive(Serialize, Deserialize)]
struct RawPolicy {
    grid: Grid,
    entries: Vec<RawEntry>,
}

#[derive(Serialize, Deserialize)]
struct RawEntry {
    state: serde_json::Value,
    dist: Vec<Prob>,
}

impl TryFrom<RawPolicy> for MarkovPolicy {
    type Error = Error;

    fn try_from(raw: RawPolicy) -> Result<Self> {
        let mut policy = MarkovPolicy::new(raw.grid);
        for entry in raw.entries {
            let state = CountState::from_json(&entry.state, &raw.grid)
                .ok_or_else(|| Error::InvalidStrategy(format!("malformed state {}", entry.state)))?;
            policy.insert(state, entry.dist)?;
        }
        Ok(policy)
    }
}

impl From<MarkovPolicy> for RawPolicy {
    fn from(p: MarkovPolicy) -> Self {
        let mut entries: Vec<_> = p.table.into_iter().collect();
        entries.sort_by(|a, b| (a.0.time(), &a.0).cmp(&(b.0.time(), &b.0)));
        RawPolicy {
            grid: p.grid,
            entries: entries
                .into_iter()
                .map(|(state, dist)| RawEntry {
                    state: state.to_json(&p.grid),
                    dist,
                })
                .collect(),
        }
    }
}

/// Distributions must sum to one within this slack, which admits tables
/// written from float solves.
const DIST_SLACK: f64 = 1e-9;

impl MarkovPolicy {
    pub fn new(grid: Grid) -> Self {
        MarkovPolicy {
            grid,
            table: HashMap::new(),
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn insert(&mut self, state: CountState, dist: Vec<Prob>) -> Result<()> {
        if dist.len() != self.grid.len() || state.cells().len() != self.grid.len() {
            return Err(Error::InvalidStrategy(format!(
                "distribution over {} points for a {}-point grid",
                dist.len(),
                self.grid.n()
            )));
        }
        let total: BigRational = dist.iter().map(|p| p.exact().clone()).sum();
        let off = Scalar::to_f64(&(total - BigRational::one())).abs();
        if off > DIST_SLACK {
            return Err(Error::InvalidStrategy(format!("distribution sums to 1{off:+e}")));
        }
        self.table.insert(state, dist);
        Ok(())
    }

    pub fn get(&self, state: &CountState) -> Option<&[Prob]> {
        self.table.get(state).map(Vec::as_slice)
    }

    pub fn lookup(&self, state: &CountState) -> Result<&[Prob]> {
        self.get(state).ok_or_else(|| {
            Error::InvalidStrategy(format!(
                "no entry for count state {} at t={}",
                state.to_json(&self.grid),
                state.time()
            ))
        })
    }
}

pub(crate) fn validate_pair(
    rain: &RainmakerSpec,
    fore: &ForecasterSpec,
    grid: &Grid,
    horizon: usize,
    order: MoveOrder,
) -> Result<()> {
    if horizon == 0 {
        return Err(Error::config("horizon must be at least 1"));
    }
    match rain {
        RainmakerSpec::CounterForecast if order != MoveOrder::ForecastFirst => {
            return Err(Error::config("counter_forecast rainmaker requires forecast-first order"));
        }
        RainmakerSpec::Playback { probs } if probs.len() < horizon => {
            return Err(Error::Horizon(format!(
                "playback holds {} probabilities but the horizon is {horizon}",
                probs.len()
            )));
        }
        _ => {}
    }
    match fore {
        ForecasterSpec::BestResponse if !rain.exposes_prob() => {
            return Err(Error::config(
                "best_response forecaster needs a rainmaker whose probability is known before the forecast",
            ));
        }
        ForecasterSpec::Constant { d } if grid.index_of(d.exact()).is_none() => {
            return Err(Error::config(format!("constant forecast {d} is not on the {}-point grid", grid.n())));
        }
        ForecasterSpec::MarkovTable(p) if p.grid() != *grid => {
            return Err(Error::config(format!(
                "markov table is for a {}-point grid, not {}",
                p.grid().n(),
                grid.n()
            )));
        }
        _ => {}
    }
    Ok(())
}

/// Rain probability chosen before the forecast, from the count state and the
/// period's rainmaker draw. `None` for rainmakers that react to the forecast.
pub(crate) fn prob_from_counts<S: Scalar>(
    spec: &RainmakerSpec,
    t: usize,
    counts: &CountState,
    grid: &Grid,
    draw: f64,
) -> Result<Option<S>> {
    Ok(Some(match spec {
        RainmakerSpec::Iid { p } => p.value(),
        RainmakerSpec::RevealedUniform => S::from_f64(draw).expect("uniform draw is finite"),
        RainmakerSpec::Playback { probs } => probs
            .get(t)
            .ok_or_else(|| Error::Horizon(format!("playback exhausted at period {}", t + 1)))?
            .value(),
        RainmakerSpec::GapChaser => {
            if gap_chaser_rains(counts, grid) {
                S::one()
            } else {
                S::zero()
            }
        }
        RainmakerSpec::CounterForecast => return Ok(None),
    }))
}

fn gap_chaser_rains(counts: &CountState, grid: &Grid) -> bool {
    let Some(k) = counts.most_frequent() else {
        return true;
    };
    // Only the repeated point's gap moves: G -> G + a - d.
    let gap: BigRational = counts.gap(grid, k);
    let d = grid.exact_point(k);
    let with_rain = (&gap + BigRational::one() - &d).abs();
    let without = (&gap - &d).abs();
    with_rain >= without
}

/// Rain probability for a rainmaker that has seen the current forecast.
pub(crate) fn reactive_prob<S: Scalar>(grid: &Grid, forecast: usize) -> S {
    // Rain when c < 1/2, i.e. 2k+1 < N.
    if 2 * forecast + 1 < grid.len() {
        S::one()
    } else {
        S::zero()
    }
}

/// Conditional rain probability `p_t` for the period after `history`.
///
/// `rng` supplies the draw for randomized rainmakers. Rainmakers that react
/// to the current forecast have no such probability and return a
/// configuration error.
pub fn rainmaker_prob<S: Scalar, R: Rng + ?Sized>(
    spec: &RainmakerSpec,
    history: &Transcript<S>,
    grid: &Grid,
    rng: &mut R,
) -> Result<S> {
    let counts = history.counts(grid)?;
    let draw: f64 = rng.random();
    prob_from_counts(spec, history.horizon(), &counts, grid, draw)?
        .ok_or_else(|| Error::config("counter_forecast has no probability before the forecast is known"))
}

/// The forecaster that rounds the known rain probability to the grid.
pub fn best_response_forecast<S: Scalar>(p: &S, grid: &Grid) -> Result<S> {
    round_to_grid(p, grid)
}

/// Forecast distribution as `(grid index, probability)` pairs with positive
/// mass.
pub(crate) fn forecast_support<S: Scalar>(
    spec: &ForecasterSpec,
    prob: Option<&S>,
    counts: &CountState,
    grid: &Grid,
) -> Result<Vec<(usize, S)>> {
    match spec {
        ForecasterSpec::BestResponse => {
            let p = prob.ok_or_else(|| Error::config("best_response forecaster has no probability to round"))?;
            Ok(vec![(grid.round_index(p)?, S::one())])
        }
        ForecasterSpec::Constant { d } => {
            let k = grid
                .index_of(d.exact())
                .ok_or_else(|| Error::config(format!("constant forecast {d} is off the grid")))?;
            Ok(vec![(k, S::one())])
        }
        ForecasterSpec::MarkovTable(policy) => Ok(policy
            .lookup(counts)?
            .iter()
            .enumerate()
            .filter(|(_, q)| !q.exact().is_zero())
            .map(|(k, q)| (k, q.value()))
            .collect()),
    }
}

/// Samples from a support list with one uniform draw.
pub(crate) fn sample_support<S: Scalar>(support: &[(usize, S)], draw: f64) -> usize {
    let mut acc = 0.0;
    for (k, q) in support {
        acc += q.to_f64();
        if draw < acc {
            return *k;
        }
    }
    support.last().map(|(k, _)| *k).expect("non-empty support")
}
