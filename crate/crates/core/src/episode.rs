//! Playing the repeated game, by simulation or by exhaustive enumeration.

use crate::counts::CountState;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::rng::{PeriodDraws, ReplicationRng};
use crate::scalar::Scalar;
use crate::score::{score_report, ScoreReport};
use crate::strategy::{
    forecast_support, prob_from_counts, reactive_prob, sample_support, validate_pair, ForecasterSpec, MoveOrder,
    RainmakerSpec,
};
use crate::transcript::{Step, Transcript};

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeResult<S> {
    /// `p_t` is filled whenever the rainmaker fixes it before the forecast.
    pub transcript: Transcript<S>,
    pub score: ScoreReport<S>,
}

/// Plays one episode; equivalent to replication 0 of `seed`.
pub fn play_episode<S: Scalar>(
    rain: &RainmakerSpec,
    fore: &ForecasterSpec,
    grid: &Grid,
    horizon: usize,
    order: MoveOrder,
    seed: u64,
) -> Result<EpisodeResult<S>> {
    play_replication(rain, fore, grid, horizon, order, seed, 0)
}

pub fn play_replication<S: Scalar>(
    rain: &RainmakerSpec,
    fore: &ForecasterSpec,
    grid: &Grid,
    horizon: usize,
    order: MoveOrder,
    seed: u64,
    replication: u64,
) -> Result<EpisodeResult<S>> {
    validate_pair(rain, fore, grid, horizon, order)?;
    let mut rng = ReplicationRng::new(seed, replication);
    let mut counts = CountState::empty(grid);
    let mut transcript = Transcript::with_capacity(horizon);
    for t in 0..horizon {
        let draws = rng.period(t as u64);
        let step = play_period(rain, fore, grid, order, t, &counts, draws)?;
        counts.record(step.forecast, step.rain);
        transcript.push(step)?;
    }
    let score = score_report(&transcript, grid)?;
    Ok(EpisodeResult { transcript, score })
}

fn play_period<S: Scalar>(
    rain: &RainmakerSpec,
    fore: &ForecasterSpec,
    grid: &Grid,
    order: MoveOrder,
    t: usize,
    counts: &CountState,
    draws: PeriodDraws,
) -> Result<Step<S>> {
    // In both orders the forecaster only ever sees a probability the
    // rainmaker fixed from the past; the orders differ in whether the
    // rainmaker may then react to the forecast.
    let prior: Option<S> = prob_from_counts(rain, t, counts, grid, draws.rainmaker)?;
    let support = forecast_support(fore, prior.as_ref(), counts, grid)?;
    let forecast = sample_support(&support, draws.forecaster);
    let p = match (&prior, order) {
        (Some(p), _) => p.clone(),
        (None, MoveOrder::ForecastFirst) => reactive_prob(grid, forecast),
        (None, MoveOrder::Simultaneous) => {
            return Err(Error::config("reactive rainmaker in simultaneous order"));
        }
    };
    let rain_now = S::from_f64(draws.weather).expect("uniform draw is finite") < p;
    Ok(Step {
        rain: rain_now,
        forecast,
        prob: prior,
    })
}

/// Exact expectations over every weather and forecast realization.
#[derive(Clone, Debug, PartialEq)]
pub struct Expectation<S> {
    pub k_score: S,
    pub k_sq_score: S,
    pub k_tilde: Option<S>,
    /// Expected `n(d)` per grid point.
    pub usage: Vec<S>,
    pub outcomes: u64,
}

/// Cap on enumerated leaves.
pub const MAX_ENUMERATED_OUTCOMES: u64 = 1 << 26;

/// Expectation of the scores by enumerating all realizations. Requires a
/// rainmaker whose probabilities have finite support given the history.
pub fn enumerate_expectation<S: Scalar>(
    rain: &RainmakerSpec,
    fore: &ForecasterSpec,
    grid: &Grid,
    horizon: usize,
    order: MoveOrder,
) -> Result<Expectation<S>> {
    validate_pair(rain, fore, grid, horizon, order)?;
    if !rain.is_finitely_supported() {
        return Err(Error::config("exhaustive mode needs a finitely supported rainmaker"));
    }
    let mut acc = Expectation {
        k_score: S::zero(),
        k_sq_score: S::zero(),
        k_tilde: rain.exposes_prob().then(S::zero),
        usage: vec![S::zero(); grid.len()],
        outcomes: 0,
    };
    let mut walk = Walk {
        rain,
        fore,
        grid,
        horizon,
        order,
        transcript: Transcript::with_capacity(horizon),
        counts: CountState::empty(grid),
        acc: &mut acc,
    };
    walk.descend(S::one())?;
    Ok(acc)
}

struct Walk<'a, S> {
    rain: &'a RainmakerSpec,
    fore: &'a ForecasterSpec,
    grid: &'a Grid,
    horizon: usize,
    order: MoveOrder,
    transcript: Transcript<S>,
    counts: CountState,
    acc: &'a mut Expectation<S>,
}

impl<S: Scalar> Walk<'_, S> {
    fn descend(&mut self, weight: S) -> Result<()> {
        let t = self.transcript.horizon();
        if t == self.horizon {
            return self.leaf(weight);
        }
        // The draw is irrelevant for finitely supported rainmakers.
        let prior: Option<S> = prob_from_counts(self.rain, t, &self.counts, self.grid, 0.0)?;
        let support = forecast_support(self.fore, prior.as_ref(), &self.counts, self.grid)?;
        for (forecast, q) in support {
            let p = match &prior {
                Some(p) => p.clone(),
                None if self.order == MoveOrder::ForecastFirst => reactive_prob(self.grid, forecast),
                None => return Err(Error::config("reactive rainmaker in simultaneous order")),
            };
            for (rain, w) in [(true, p.clone()), (false, S::one() - p.clone())] {
                if w.is_zero() {
                    continue;
                }
                self.transcript.push(Step {
                    rain,
                    forecast,
                    prob: prior.clone(),
                })?;
                self.counts.record(forecast, rain);
                let result = self.descend(weight.clone() * q.clone() * w);
                self.transcript.truncate(t);
                self.counts.unrecord(forecast, rain);
                result?;
            }
        }
        Ok(())
    }

    fn leaf(&mut self, weight: S) -> Result<()> {
        self.acc.outcomes += 1;
        if self.acc.outcomes > MAX_ENUMERATED_OUTCOMES {
            return Err(Error::Resource {
                what: "exhaustive enumeration".into(),
                needed: self.acc.outcomes as u128,
                budget: MAX_ENUMERATED_OUTCOMES as u128,
            });
        }
        let report = score_report(&self.transcript, self.grid)?;
        let acc = &mut *self.acc;
        acc.k_score = acc.k_score.clone() + weight.clone() * report.k_score;
        acc.k_sq_score = acc.k_sq_score.clone() + weight.clone() * report.k_sq_score;
        if let (Some(total), Some(k)) = (acc.k_tilde.as_mut(), report.k_tilde) {
            *total = total.clone() + weight.clone() * k;
        }
        for (u, p) in acc.usage.iter_mut().zip(&report.per_point) {
            *u = u.clone() + weight.clone() * S::from_int(p.count as i64);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Exact};
    use crate::strategy::Prob;

    fn prob(s: &str) -> Prob {
        s.parse().unwrap()
    }

    #[test]
    fn certain_rain_with_best_response() {
        let g = Grid::new(2).unwrap();
        let rain = RainmakerSpec::Iid { p: prob("1") };
        for seed in [0, 1, 99] {
            let r: EpisodeResult<Exact> =
                play_episode(&rain, &ForecasterSpec::BestResponse, &g, 3, MoveOrder::Simultaneous, seed).unwrap();
            assert!(r.transcript.steps().iter().all(|s| s.rain && s.forecast == 1));
            assert_eq!(r.score.k_score, ratio(1, 4));
        }
    }

    #[test]
    fn episodes_are_reproducible() {
        let g = Grid::new(4).unwrap();
        let a: EpisodeResult<f64> = play_episode(
            &RainmakerSpec::RevealedUniform,
            &ForecasterSpec::BestResponse,
            &g,
            50,
            MoveOrder::Simultaneous,
            42,
        )
        .unwrap();
        let b = play_episode(
            &RainmakerSpec::RevealedUniform,
            &ForecasterSpec::BestResponse,
            &g,
            50,
            MoveOrder::Simultaneous,
            42,
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(score_report(&a.transcript, &g).unwrap(), a.score);
    }

    #[test]
    fn constant_half_against_fair_coin_enumerated() {
        // Outcomes RR, RD, DR, DD give K = 1/2, 0, 0, 1/2.
        let g = Grid::new(1).unwrap();
        let e: Expectation<Exact> = enumerate_expectation(
            &RainmakerSpec::Iid { p: prob("1/2") },
            &ForecasterSpec::Constant { d: prob("1/2") },
            &g,
            2,
            MoveOrder::Simultaneous,
        )
        .unwrap();
        assert_eq!(e.k_score, ratio(1, 4));
        assert_eq!(e.outcomes, 4);
        assert_eq!(e.usage, vec![ratio(2, 1)]);
    }

    #[test]
    fn counter_forecast_punishes_constant() {
        let g = Grid::new(2).unwrap();
        let r: EpisodeResult<Exact> = play_episode(
            &RainmakerSpec::CounterForecast,
            &ForecasterSpec::Constant { d: prob("1/4") },
            &g,
            10,
            MoveOrder::ForecastFirst,
            0,
        )
        .unwrap();
        assert_eq!(r.score.k_score, ratio(3, 4));
        assert_eq!(r.score.k_tilde, None);
    }

    #[test]
    fn uniform_rainmaker_cannot_be_enumerated() {
        let g = Grid::new(1).unwrap();
        let e = enumerate_expectation::<Exact>(
            &RainmakerSpec::RevealedUniform,
            &ForecasterSpec::BestResponse,
            &g,
            2,
            MoveOrder::Simultaneous,
        );
        assert!(matches!(e, Err(Error::Config(_))));
    }
}
