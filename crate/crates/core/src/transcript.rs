//! Forecast transcripts and their CSV form.
//!
//! CSV layout, header required: `t,a,c,p`
//!
//! * `t` period number, `1..=T` in order
//! * `a` weather, `0` or `1`
//! * `c` forecast as `num/den` or a decimal; must equal a grid point exactly
//! * `p` optional rain probability in `[0,1]`, empty when unknown

use std::io::{Read, Write};

use crate::counts::CountState;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::{parse_rational, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct Step<S> {
    pub rain: bool,
    /// Grid index of the forecast.
    pub forecast: usize,
    pub prob: Option<S>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Transcript<S> {
    steps: Vec<Step<S>>,
}

impl<S: Scalar> Default for Transcript<S> {
    fn default() -> Self {
        Transcript { steps: Vec::new() }
    }
}

impl<S: Scalar> Transcript<S> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_capacity(horizon: usize) -> Self {
        Transcript {
            steps: Vec::with_capacity(horizon),
        }
    }

    /// Validates each probability; forecasts are checked against a grid when
    /// scoring.
    pub fn from_steps(steps: Vec<Step<S>>) -> Result<Self> {
        let mut t = Self::with_capacity(steps.len());
        for s in steps {
            t.push(s)?;
        }
        Ok(t)
    }

    pub fn push(&mut self, step: Step<S>) -> Result<()> {
        if let Some(p) = &step.prob {
            if *p < S::zero() || *p > S::one() {
                return Err(Error::InvalidTranscript {
                    row: self.steps.len() + 1,
                    reason: format!("probability {} outside [0,1]", p.to_f64()),
                });
            }
        }
        self.steps.push(step);
        Ok(())
    }

    pub fn steps(&self) -> &[Step<S>] {
        &self.steps
    }

    pub fn horizon(&self) -> usize {
        self.steps.len()
    }

    pub fn has_probs(&self) -> bool {
        !self.steps.is_empty() && self.steps.iter().all(|s| s.prob.is_some())
    }

    pub(crate) fn truncate(&mut self, len: usize) {
        self.steps.truncate(len);
    }

    pub fn prefix(&self, len: usize) -> Transcript<S> {
        Transcript {
            steps: self.steps[..len.min(self.steps.len())].to_vec(),
        }
    }

    pub fn counts(&self, grid: &Grid) -> Result<CountState> {
        let mut state = CountState::empty(grid);
        for (i, s) in self.steps.iter().enumerate() {
            check_forecast(grid, i, s.forecast)?;
            state.record(s.forecast, s.rain);
        }
        Ok(state)
    }

    pub fn read_csv<R: Read>(reader: R, grid: &Grid) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .flexible(true)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let cols: Vec<&str> = headers.iter().collect();
        if cols.len() < 3 || cols[..3] != ["t", "a", "c"] || (cols.len() == 4 && cols[3] != "p") || cols.len() > 4 {
            return Err(Error::InvalidTranscript {
                row: 0,
                reason: format!("expected header t,a,c,p but found {}", cols.join(",")),
            });
        }
        let mut transcript = Transcript::new();
        for (i, record) in rdr.records().enumerate() {
            let row = i + 1;
            let record = record?;
            let bad = |reason: String| Error::InvalidTranscript { row, reason };
            let field = |j: usize| record.get(j).unwrap_or("");
            let t: usize = field(0)
                .parse()
                .map_err(|_| bad(format!("period '{}' is not an integer", field(0))))?;
            if t != row {
                return Err(bad(format!("period {t} out of sequence, expected {row}")));
            }
            let rain = match field(1) {
                "0" => false,
                "1" => true,
                other => return Err(bad(format!("weather '{other}' must be 0 or 1"))),
            };
            let forecast = grid
                .parse_point(field(2))
                .ok_or_else(|| bad(format!("forecast '{}' is not a point of the {}-point grid", field(2), grid.n())))?;
            let prob = match field(3) {
                "" => None,
                s => {
                    let r = parse_rational(s).ok_or_else(|| bad(format!("probability '{s}' is not a number")))?;
                    Some(S::from_rational(&r))
                }
            };
            transcript
                .push(Step { rain, forecast, prob })
                .map_err(|e| match e {
                    Error::InvalidTranscript { reason, .. } => bad(reason),
                    other => other,
                })?;
        }
        Ok(transcript)
    }

    pub fn write_csv<W: Write>(&self, writer: W, grid: &Grid) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "a", "c", "p"])?;
        for (i, s) in self.steps.iter().enumerate() {
            check_forecast(grid, i, s.forecast)?;
            let p = match &s.prob {
                Some(p) => p.rational_string().unwrap_or_else(|| format!("{}", p.to_f64())),
                None => String::new(),
            };
            w.write_record([
                (i + 1).to_string(),
                u8::from(s.rain).to_string(),
                grid.label(s.forecast),
                p,
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn check_forecast(grid: &Grid, index: usize, forecast: usize) -> Result<()> {
    if forecast >= grid.len() {
        return Err(Error::InvalidTranscript {
            row: index + 1,
            reason: format!("forecast index {forecast} is not on the {}-point grid", grid.n()),
        });
    }
    Ok(())
}
