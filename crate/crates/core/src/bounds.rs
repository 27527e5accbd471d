//! Closed-form upper bounds on the guaranteed calibration score and the
//! horizons at which they certify `E[K_T] <= 1/N`.
//!
//! Every bound has the shape `1/(2N) + sqrt(A/T)`: the rounding term plus a
//! smoothed term. The variants differ only in `A`:
//!
//! | bound        | `A`                      | threshold `ceil(4 N^2 A)`     |
//! |--------------|--------------------------|-------------------------------|
//! | main         | `N/4`                    | `N^3`                         |
//! | refined      | `sum_d f(d)`             | `(2/3)N^3 + N^2 - (2/3)N`     |
//! | loose        | `N^2/4`                  | `N^4`                         |
//! | grid-prime   | `(N+1)/4`                | `N^3 + N^2`                   |
//!
//! `bound <= 1/N` iff `A/T <= 1/(4N^2)` iff `T >= 4N^2 A`, so thresholds are
//! exact integers obtained by rational comparison.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use serde::Serialize;
use serde_json::{json, Value};

use crate::episode::EpisodeResult;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::{format_rational, format_sig, ratio, Scalar};

fn big(v: i128) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// `d'(1-d')` where `d'` is `d` moved `1/(2N)` toward `1/2` (and `d' = d` at
/// `d = 1/2`). Bounds `p(1-p)` for every `p` within `1/(2N)` of `d`.
pub fn f_of_d(d: &BigRational, grid: &Grid) -> Result<BigRational> {
    let k = grid
        .index_of(d)
        .ok_or_else(|| Error::arg(format!("{} is not on the {}-point grid", format_rational(d), grid.n())))?;
    let (num, den) = shifted_point(k, grid.n());
    let shifted = ratio(num, den);
    Ok(&shifted * (BigRational::one() - &shifted))
}

/// `d'` for grid index `k` as `num/(2N)`.
fn shifted_point(k: usize, n: u32) -> (i64, i64) {
    let two_k1 = 2 * k as i64 + 1;
    let n = n as i64;
    let num = match two_k1.cmp(&n) {
        std::cmp::Ordering::Less => two_k1 + 1,
        std::cmp::Ordering::Equal => two_k1,
        std::cmp::Ordering::Greater => two_k1 - 1,
    };
    (num, 2 * n)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SumF {
    pub direct: BigRational,
    pub closed_form: BigRational,
}

impl SumF {
    pub fn agree(&self) -> bool {
        self.direct == self.closed_form
    }
}

/// `sum_d f(d)` term by term. Every term is `m(2N - m)/(4N^2)`, so the sum is
/// accumulated as an integer numerator over `4N^2`.
pub fn sum_f_direct(n: u32) -> Result<BigRational> {
    if n == 0 {
        return Err(Error::arg("grid size N must be at least 1"));
    }
    let two_n = 2 * n as i128;
    let mut numer: i128 = 0;
    for k in 0..n as usize {
        let (m, _) = shifted_point(k, n);
        numer += m as i128 * (two_n - m as i128);
    }
    Ok(BigRational::new(BigInt::from(numer), BigInt::from(two_n * two_n)))
}

/// `N/6 + 1/4 - 1/(6N)`.
pub fn sum_f_closed_form(n: u32) -> Result<BigRational> {
    if n == 0 {
        return Err(Error::arg("grid size N must be at least 1"));
    }
    let n = n as i64;
    Ok(ratio(n, 6) + ratio(1, 4) - ratio(1, 6 * n))
}

pub fn sum_f(n: u32) -> Result<SumF> {
    Ok(SumF {
        direct: sum_f_direct(n)?,
        closed_form: sum_f_closed_form(n)?,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    /// Bernoulli variance at most 1/4, Cauchy-Schwarz over the grid.
    Main,
    /// Variance bounded pointwise by `f(d)`.
    Refined,
    /// Each `n(d) <= T` instead of `sum n(d) = T`.
    Loose,
    /// The `N+1` point grid `{0, 1/N, ..., 1}`.
    GridPrime,
}

impl BoundKind {
    pub const ALL: [BoundKind; 4] = [BoundKind::Main, BoundKind::Refined, BoundKind::Loose, BoundKind::GridPrime];

    pub fn name(self) -> &'static str {
        match self {
            BoundKind::Main => "main",
            BoundKind::Refined => "refined",
            BoundKind::Loose => "loose",
            BoundKind::GridPrime => "grid-prime",
        }
    }

    /// `A` in `1/(2N) + sqrt(A/T)`.
    pub fn coefficient(self, n: u32) -> BigRational {
        let nn = n as i64;
        match self {
            BoundKind::Main => ratio(nn, 4),
            BoundKind::Refined => sum_f_closed_form(n).expect("n >= 1"),
            BoundKind::Loose => ratio(nn * nn, 4),
            BoundKind::GridPrime => ratio(nn + 1, 4),
        }
    }

    pub fn value(self, n: u32, t: u64) -> f64 {
        let a = Scalar::to_f64(&self.coefficient(n));
        1.0 / (2.0 * n as f64) + (a / t as f64).sqrt()
    }

    /// Smallest `T` with `bound(N, T) <= 1/N`.
    pub fn threshold(self, n: u32) -> u128 {
        let scaled = self.coefficient(n) * big(4 * n as i128 * n as i128);
        scaled.ceil().to_integer().to_u128().expect("positive threshold")
    }

    /// Exact test of `bound(N, T) <= 1/N`.
    pub fn certifies(self, n: u32, t: u64) -> bool {
        self.coefficient(n) * big(4 * n as i128 * n as i128) <= big(t as i128)
    }

    /// The threshold written as a polynomial in `N`, evaluated independently
    /// of [`BoundKind::threshold`].
    pub fn polynomial_threshold(self, n: u32) -> u128 {
        let n = n as u128;
        match self {
            BoundKind::Main => n.pow(3),
            BoundKind::Refined => {
                // ceil((2N^3 + 3N^2 - 2N) / 3)
                (2 * n.pow(3) + 3 * n.pow(2) - 2 * n).div_ceil(3)
            }
            BoundKind::Loose => n.pow(4),
            BoundKind::GridPrime => n.pow(3) + n.pow(2),
        }
    }
}

pub fn main_bound(n: u32, t: u64) -> f64 {
    BoundKind::Main.value(n, t)
}

/// Exact test of `value <= 1/(2N) + (1/2) sqrt(N/T)`.
pub fn within_main_bound(value: &BigRational, n: u32, t: u64) -> bool {
    let excess = value - ratio(1, 2 * n as i64);
    if !excess.is_positive() {
        return true;
    }
    // excess^2 <= N/(4T)
    &excess * &excess <= BigRational::new(BigInt::from(n), BigInt::from(4 * t as i128))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundRow {
    pub kind: BoundKind,
    pub value: f64,
    pub threshold: u128,
    /// Whether `value <= 1/N` at this `T`, decided exactly.
    pub certifies: bool,
    /// Whether `threshold` equals the polynomial form in `N`.
    pub matches_polynomial: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub n: u32,
    pub t: u64,
    pub sum_f: String,
    pub rows: Vec<BoundRow>,
}

impl BoundReport {
    pub fn row(&self, kind: BoundKind) -> &BoundRow {
        self.rows.iter().find(|r| r.kind == kind).expect("every kind is reported")
    }

    pub fn main_bound(&self) -> f64 {
        self.row(BoundKind::Main).value
    }

    pub fn refined_bound(&self) -> f64 {
        self.row(BoundKind::Refined).value
    }

    pub fn loose_bound(&self) -> f64 {
        self.row(BoundKind::Loose).value
    }

    pub fn grid_prime_bound(&self) -> f64 {
        self.row(BoundKind::GridPrime).value
    }

    pub const CSV_HEADER: [&'static str; 5] = ["N", "T", "bound", "value", "threshold"];

    pub fn csv_records(&self) -> Vec<[String; 5]> {
        self.rows
            .iter()
            .map(|r| {
                [
                    self.n.to_string(),
                    self.t.to_string(),
                    r.kind.name().to_string(),
                    format_sig(r.value, 12),
                    r.threshold.to_string(),
                ]
            })
            .collect()
    }

    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }

    /// Plain-text table.
    pub fn table(&self) -> String {
        let mut out = format!(
            "N = {}, T = {}, target 1/N = {}\n{:<12} {:>16} {:>14} {:>10}\n",
            self.n,
            self.t,
            format_sig(1.0 / self.n as f64, 12),
            "bound",
            "value",
            "threshold",
            "<= 1/N"
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{:<12} {:>16} {:>14} {:>10}\n",
                r.kind.name(),
                format_sig(r.value, 12),
                r.threshold,
                if r.certifies { "yes" } else { "no" }
            ));
        }
        out
    }
}

pub fn bound_report(n: u32, t: u64) -> Result<BoundReport> {
    if n == 0 || t == 0 {
        return Err(Error::arg("N and T must be at least 1"));
    }
    let rows = BoundKind::ALL
        .iter()
        .map(|&kind| BoundRow {
            kind,
            value: kind.value(n, t),
            threshold: kind.threshold(n),
            certifies: kind.certifies(n, t),
            matches_polynomial: kind.threshold(n) == kind.polynomial_threshold(n),
        })
        .collect();
    Ok(BoundReport {
        n,
        t,
        sum_f: format_rational(&sum_f_closed_form(n)?),
        rows,
    })
}

/// Second-moment check of the smoothed gaps: `E[G~(d)^2] <= E[n(d)]/4`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioRow {
    pub d: String,
    pub mean_usage: f64,
    pub mean_sq_gap: f64,
    /// `E[G~^2] / E[n]`; absent when the point was never used.
    pub ratio: Option<f64>,
    /// Delta-method standard error of the ratio.
    pub se: f64,
    /// `mean_usage >= min_usage`.
    pub eligible: bool,
    /// `ratio > 1/4 + 3 se`.
    pub exceeds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VarianceReport {
    pub replications: usize,
    pub min_usage: f64,
    pub rows: Vec<RatioRow>,
}

impl VarianceReport {
    /// True when no eligible point exceeds the limit.
    pub fn holds(&self) -> bool {
        self.rows.iter().all(|r| !(r.eligible && r.exceeds))
    }

    pub fn to_json(&self) -> Value {
        json!(self)
    }
}

pub const BERNOULLI_VARIANCE_CAP: f64 = 0.25;

/// Ratio table from per-replication `(n(d), G~(d))` samples, one inner
/// vector per replication indexed by grid point.
pub fn variance_ratio_table(samples: &[Vec<(u64, f64)>], grid: &Grid, min_usage: f64) -> Result<VarianceReport> {
    if samples.is_empty() {
        return Err(Error::InvalidInput("no replications".into()));
    }
    if samples.iter().any(|s| s.len() != grid.len()) {
        return Err(Error::InvalidInput("sample width differs from the grid".into()));
    }
    let r = samples.len() as f64;
    let rows = (0..grid.len())
        .map(|k| {
            let mean_usage = samples.iter().map(|s| s[k].0 as f64).sum::<f64>() / r;
            let mean_sq_gap = samples.iter().map(|s| s[k].1 * s[k].1).sum::<f64>() / r;
            let (ratio, se) = if mean_usage > 0.0 {
                let ratio = mean_sq_gap / mean_usage;
                let var = if samples.len() > 1 {
                    samples
                        .iter()
                        .map(|s| {
                            let e = s[k].1 * s[k].1 - ratio * s[k].0 as f64;
                            e * e
                        })
                        .sum::<f64>()
                        / (r - 1.0)
                } else {
                    0.0
                };
                (Some(ratio), var.sqrt() / (r.sqrt() * mean_usage))
            } else {
                (None, 0.0)
            };
            RatioRow {
                d: grid.label(k),
                mean_usage,
                mean_sq_gap,
                exceeds: ratio.is_some_and(|q| q > BERNOULLI_VARIANCE_CAP + 3.0 * se),
                eligible: mean_usage >= min_usage,
                ratio,
                se,
            }
        })
        .collect();
    Ok(VarianceReport {
        replications: samples.len(),
        min_usage,
        rows,
    })
}

/// Ratio table over finished episodes; every transcript must carry `p_t`.
pub fn variance_bound_check<S: Scalar>(episodes: &[EpisodeResult<S>], grid: &Grid) -> Result<VarianceReport> {
    let samples = episodes
        .iter()
        .enumerate()
        .map(|(i, e)| {
            if !e.transcript.has_probs() {
                return Err(Error::InvalidInput(format!("episode {i} has no rain probabilities")));
            }
            Ok(e.score
                .per_point
                .iter()
                .map(|p| (p.count, p.smoothed_gap.as_ref().map_or(0.0, Scalar::to_f64)))
                .collect())
        })
        .collect::<Result<Vec<Vec<_>>>>()?;
    variance_ratio_table(&samples, grid, 0.0)
}
