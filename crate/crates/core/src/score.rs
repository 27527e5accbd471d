//! Calibration scores of a transcript.
//!
//! For each grid point `d`: `n(d)` uses, rain frequency `a(d)`, gap
//! `G(d) = sum 1[c_t = d](a_t - c_t)`. Then `K_T = (1/T) sum |G(d)|` and the
//! squared variant `sum (n(d)/T)(a(d) - d)^2`. When every period carries its
//! rain probability `p_t`, the smoothed gap replaces `c_t` by `p_t`.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::Scalar;
use crate::transcript::{check_forecast, Transcript};

#[derive(Clone, Debug, PartialEq)]
pub struct PointScore<S> {
    pub point: S,
    pub count: u64,
    pub rain: u64,
    /// Absent when the point was never used.
    pub frequency: Option<S>,
    pub gap: S,
    pub smoothed_gap: Option<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoreReport<S> {
    pub grid: Grid,
    pub horizon: u64,
    pub per_point: Vec<PointScore<S>>,
    pub k_score: S,
    pub k_sq_score: S,
    pub k_tilde: Option<S>,
}

pub fn score_report<S: Scalar>(transcript: &Transcript<S>, grid: &Grid) -> Result<ScoreReport<S>> {
    let horizon = transcript.horizon();
    if horizon == 0 {
        return Err(Error::InvalidTranscript {
            row: 0,
            reason: "empty transcript".into(),
        });
    }
    let smoothed = transcript.has_probs();
    let mut count = vec![0u64; grid.len()];
    let mut rain = vec![0u64; grid.len()];
    let mut residual = vec![S::zero(); grid.len()];
    for (i, step) in transcript.steps().iter().enumerate() {
        check_forecast(grid, i, step.forecast)?;
        count[step.forecast] += 1;
        rain[step.forecast] += u64::from(step.rain);
        if smoothed {
            let p = step.prob.as_ref().expect("checked by has_probs");
            let a = if step.rain { S::one() } else { S::zero() };
            residual[step.forecast] = residual[step.forecast].clone() + (a - p.clone());
        }
    }
    let t = S::from_int(horizon as i64);
    let mut abs_gap_sum = S::zero();
    let mut sq_sum = S::zero();
    let mut abs_smoothed_sum = S::zero();
    let mut per_point = Vec::with_capacity(grid.len());
    for (k, residual) in residual.into_iter().enumerate() {
        let d: S = grid.point(k);
        let n = count[k];
        let gap = S::from_int(rain[k] as i64) - S::from_int(n as i64) * d.clone();
        let frequency = (n > 0).then(|| S::from_ratio(rain[k] as i64, n as i64));
        if n > 0 {
            abs_gap_sum = abs_gap_sum + gap.abs();
            // (n/T)(a - d)^2 = G^2 / (n T)
            sq_sum = sq_sum + gap.clone() * gap.clone() / S::from_int(n as i64);
        }
        let smoothed_gap = smoothed.then(|| {
            abs_smoothed_sum = abs_smoothed_sum.clone() + residual.abs();
            residual
        });
        per_point.push(PointScore {
            point: d,
            count: n,
            rain: rain[k],
            frequency,
            gap,
            smoothed_gap,
        });
    }
    Ok(ScoreReport {
        grid: *grid,
        horizon: horizon as u64,
        per_point,
        k_score: abs_gap_sum / t.clone(),
        k_sq_score: sq_sum / t.clone(),
        k_tilde: smoothed.then(|| abs_smoothed_sum / t),
    })
}

impl<S: Scalar> ScoreReport<S> {
    /// Rationals appear as `{"rational": "num/den", "decimal": x}` in exact
    /// mode and as `{"decimal": x}` in float mode.
    pub fn to_json(&self) -> Value {
        let per_point: Vec<Value> = self
            .per_point
            .iter()
            .enumerate()
            .map(|(k, p)| {
                json!({
                    "d": self.grid.label(k),
                    "n": p.count,
                    "rain": p.rain,
                    "abar": p.frequency.as_ref().map(Scalar::to_json),
                    "gap": p.gap.to_json(),
                    "smoothed_gap": p.smoothed_gap.as_ref().map(Scalar::to_json),
                })
            })
            .collect();
        json!({
            "grid": self.grid.n(),
            "horizon": self.horizon,
            "per_d": per_point,
            "k_score": self.k_score.to_json(),
            "k_sq_score": self.k_sq_score.to_json(),
            "k_tilde": self.k_tilde.as_ref().map(Scalar::to_json),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Exact};
    use crate::transcript::Step;
    use num_traits::Signed;

    fn transcript(steps: &[(bool, usize, Option<Exact>)]) -> Transcript<Exact> {
        Transcript::from_steps(
            steps
                .iter()
                .map(|(rain, forecast, prob)| Step {
                    rain: *rain,
                    forecast: *forecast,
                    prob: prob.clone(),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn two_period_example() {
        let g = Grid::new(2).unwrap();
        let r = score_report(&transcript(&[(true, 0, None), (false, 1, None)]), &g).unwrap();
        assert_eq!(r.k_score, ratio(3, 4));
        assert_eq!(r.k_sq_score, ratio(9, 16));
        assert_eq!(r.per_point[0].gap, ratio(3, 4));
        assert_eq!(r.per_point[1].gap, ratio(-3, 4));
        assert_eq!(r.k_tilde, None);
    }

    #[test]
    fn perfectly_calibrated() {
        let g = Grid::new(1).unwrap();
        let r = score_report(
            &transcript(&[(true, 0, None), (false, 0, None), (true, 0, None), (false, 0, None)]),
            &g,
        )
        .unwrap();
        assert_eq!(r.per_point[0].frequency, Some(ratio(1, 2)));
        assert_eq!(r.k_score, ratio(0, 1));
    }

    #[test]
    fn smoothed_single_period() {
        let g = Grid::new(2).unwrap();
        let r = score_report(&transcript(&[(true, 0, Some(ratio(3, 10)))]), &g).unwrap();
        assert_eq!(r.per_point[0].gap, ratio(3, 4));
        assert_eq!(r.per_point[0].smoothed_gap, Some(ratio(7, 10)));
        let diff = (&r.k_score - r.k_tilde.as_ref().unwrap()).abs();
        assert_eq!(diff, ratio(1, 20));
        assert!(diff <= ratio(1, 4));
    }

    #[test]
    fn unused_points_have_no_frequency() {
        let g = Grid::new(3).unwrap();
        let r = score_report(&transcript(&[(true, 2, None)]), &g).unwrap();
        assert_eq!(r.per_point[0].frequency, None);
        assert_eq!(r.per_point[0].gap, ratio(0, 1));
        assert_eq!(r.k_score, ratio(1, 6));
        let v = r.to_json();
        assert_eq!(v["per_d"][0]["abar"], Value::Null);
        assert_eq!(v["k_score"]["rational"], "1/6");
    }

    #[test]
    fn errors() {
        let g = Grid::new(2).unwrap();
        assert!(score_report(&Transcript::<Exact>::new(), &g).is_err());
        let bad = transcript(&[(true, 0, None), (true, 5, None)]);
        assert!(matches!(
            score_report(&bad, &g),
            Err(Error::InvalidTranscript { row: 2, .. })
        ));
    }
}
