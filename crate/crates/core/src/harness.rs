//! Seeded Monte Carlo experiments, parameter sweeps and solver sweeps.
//!
//! Replications run in parallel; each draws from its own ChaCha stream of
//! the master seed and results are reduced in replication order, so a
//! rerun of the same configuration is bit-identical regardless of thread
//! count.

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::{bound_report, variance_ratio_table, BoundReport, VarianceReport};
use crate::certify::{default_mode, solve_value, SolvedValue, ValueMode};
use crate::episode::{enumerate_expectation, play_replication};
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::scalar::{format_rational, format_sig, Exact, Scalar};
use crate::score::ScoreReport;
use crate::strategy::{ForecasterSpec, MoveOrder, RainmakerSpec};

/// Arithmetic used to play and score episodes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arithmetic {
    #[default]
    Float,
    /// Sampled episodes scored in exact rationals.
    Exact,
    /// Exact expectation over every realization; no sampling.
    Exhaustive,
}

impl std::str::FromStr for Arithmetic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "float" => Ok(Arithmetic::Float),
            "exact" => Ok(Arithmetic::Exact),
            "exhaustive" => Ok(Arithmetic::Exhaustive),
            other => Err(Error::arg(format!("unknown arithmetic mode '{other}' (float, exact, exhaustive)"))),
        }
    }
}

/// Largest sizes for exhaustive mode.
pub const EXHAUSTIVE_MAX_HORIZON: usize = 12;
pub const EXHAUSTIVE_MAX_GRID: u32 = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub grid: Grid,
    pub horizon: usize,
    pub rainmaker: RainmakerSpec,
    pub forecaster: ForecasterSpec,
    #[serde(default)]
    pub order: MoveOrder,
    #[serde(default = "one")]
    pub replications: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub arithmetic: Arithmetic,
    /// JSON summary destination.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary_out: Option<PathBuf>,
    /// Per-replication CSV destination.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replications_out: Option<PathBuf>,
}

fn one() -> u64 {
    1
}

impl ExperimentConfig {
    pub fn new(grid: Grid, horizon: usize, rainmaker: RainmakerSpec, forecaster: ForecasterSpec) -> Self {
        ExperimentConfig {
            grid,
            horizon,
            rainmaker,
            forecaster,
            order: MoveOrder::default(),
            replications: 1,
            seed: 0,
            arithmetic: Arithmetic::default(),
            summary_out: None,
            replications_out: None,
        }
    }

    pub fn with_replications(mut self, r: u64) -> Self {
        self.replications = r;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_order(mut self, order: MoveOrder) -> Self {
        self.order = order;
        self
    }

    pub fn with_arithmetic(mut self, arithmetic: Arithmetic) -> Self {
        self.arithmetic = arithmetic;
        self
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(s).map_err(|e| Error::config(format!("experiment config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::config("replications must be at least 1"));
        }
        if self.horizon == 0 {
            return Err(Error::config("horizon must be at least 1"));
        }
        crate::strategy::validate_pair(&self.rainmaker, &self.forecaster, &self.grid, self.horizon, self.order)?;
        if self.arithmetic == Arithmetic::Exhaustive {
            if !self.rainmaker.is_finitely_supported() {
                return Err(Error::config("exhaustive mode needs a finitely supported rainmaker"));
            }
            if self.horizon > EXHAUSTIVE_MAX_HORIZON || self.grid.n() > EXHAUSTIVE_MAX_GRID {
                return Err(Error::config(format!(
                    "exhaustive mode is limited to N <= {EXHAUSTIVE_MAX_GRID}, T <= {EXHAUSTIVE_MAX_HORIZON}"
                )));
            }
        }
        Ok(())
    }
}

/// Scores of one replication.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplicationRecord {
    pub replication: u64,
    pub k_score: f64,
    pub k_sq_score: f64,
    pub k_tilde: Option<f64>,
    pub usage: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UsageRow {
    pub d: String,
    pub mean_count: f64,
    /// Mean of `n(d)/T`.
    pub frequency: f64,
}

/// Exact means, present in exact and exhaustive modes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactMeans {
    pub k_score: String,
    pub k_sq_score: String,
    pub k_tilde: Option<String>,
}

/// Soft check of `E[K_T] <= 1/N` for the rounding forecaster at `T >= N^3`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub target: f64,
    /// Forecaster is the rounding best response and `T >= N^3`.
    pub applies: bool,
    /// `mean K_T <= 1/N + 3 SE`.
    pub within: bool,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryStats {
    pub grid: u32,
    pub horizon: usize,
    pub order: MoveOrder,
    pub arithmetic: Arithmetic,
    pub seed: u64,
    /// Replications, or enumerated outcomes in exhaustive mode.
    pub replications: u64,
    pub mean_k: f64,
    pub se_k: f64,
    pub mean_k_sq: f64,
    pub se_k_sq: f64,
    pub mean_k_tilde: Option<f64>,
    pub se_k_tilde: Option<f64>,
    pub exact: Option<ExactMeans>,
    pub usage: Vec<UsageRow>,
    /// Replications with `K_T^2 > 𝒦_T` beyond round-off; always zero.
    pub moment_violations: u64,
    pub ratio_table: Option<VarianceReport>,
    pub bounds: BoundReport,
    pub bound_check: BoundCheck,
}

impl SummaryStats {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("summary serializes")
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentResult {
    pub summary: SummaryStats,
    /// Empty in exhaustive mode.
    pub records: Vec<ReplicationRecord>,
}

impl ExperimentResult {
    pub fn write_replications_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["replication".to_string(), "k_score".into(), "k_sq_score".into(), "k_tilde".into()];
        for u in &self.summary.usage {
            header.push(format!("n({})", u.d));
        }
        w.write_record(&header)?;
        for r in &self.records {
            let mut row = vec![
                r.replication.to_string(),
                format_sig(r.k_score, 12),
                format_sig(r.k_sq_score, 12),
                r.k_tilde.map(|x| format_sig(x, 12)).unwrap_or_default(),
            ];
            row.extend(r.usage.iter().map(u64::to_string));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Writes whichever outputs the config names.
    pub fn write_outputs(&self, config: &ExperimentConfig) -> Result<()> {
        if let Some(path) = &config.summary_out {
            write_json(path, &self.summary.to_json())?;
        }
        if let Some(path) = &config.replications_out {
            self.write_replications_csv(File::create(path)?)?;
        }
        Ok(())
    }
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, v)?;
    writeln!(f)?;
    Ok(())
}

struct Replicate<S> {
    record: ReplicationRecord,
    /// `(n(d), G~(d))` per grid point when `p_t` is known.
    samples: Option<Vec<(u64, f64)>>,
    exact: Option<(S, S, Option<S>)>,
}

fn replicate<S: Scalar>(config: &ExperimentConfig, r: u64) -> Result<Replicate<S>> {
    let ep = play_replication::<S>(
        &config.rainmaker,
        &config.forecaster,
        &config.grid,
        config.horizon,
        config.order,
        config.seed,
        r,
    )?;
    let ScoreReport {
        per_point,
        k_score,
        k_sq_score,
        k_tilde,
        ..
    } = ep.score;
    let samples = k_tilde.as_ref().map(|_| {
        per_point
            .iter()
            .map(|p| (p.count, p.smoothed_gap.as_ref().map_or(0.0, Scalar::to_f64)))
            .collect()
    });
    Ok(Replicate {
        record: ReplicationRecord {
            replication: r,
            k_score: k_score.to_f64(),
            k_sq_score: k_sq_score.to_f64(),
            k_tilde: k_tilde.as_ref().map(Scalar::to_f64),
            usage: per_point.iter().map(|p| p.count).collect(),
        },
        samples,
        exact: S::EXACT.then_some((k_score, k_sq_score, k_tilde)),
    })
}

/// Mean and standard error of the mean.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn bound_check(config: &ExperimentConfig, mean: f64, se: f64) -> BoundCheck {
    let n = config.grid.n() as u64;
    let target = 1.0 / n as f64;
    let applies = matches!(config.forecaster, ForecasterSpec::BestResponse) && config.horizon as u64 >= n.pow(3);
    let within = mean <= target + 3.0 * se;
    if applies && !within {
        log::warn!(
            "mean K_T = {} exceeds 1/N + 3 SE = {}",
            format_sig(mean, 12),
            format_sig(target + 3.0 * se, 12)
        );
    }
    BoundCheck {
        target,
        applies,
        within,
        flagged: applies && !within,
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    match config.arithmetic {
        Arithmetic::Float => run_sampled::<f64>(config),
        Arithmetic::Exact => run_sampled::<Exact>(config),
        Arithmetic::Exhaustive => run_exhaustive(config),
    }
}

fn run_sampled<S: Scalar>(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let reps: Vec<Replicate<S>> = (0..config.replications)
        .into_par_iter()
        .map(|r| replicate::<S>(config, r))
        .collect::<Result<_>>()?;
    let grid = &config.grid;
    let t = config.horizon as f64;
    let column = |f: &dyn Fn(&ReplicationRecord) -> f64| reps.iter().map(|r| f(&r.record)).collect::<Vec<_>>();
    let (mean_k, se_k) = mean_se(&column(&|r| r.k_score));
    let (mean_k_sq, se_k_sq) = mean_se(&column(&|r| r.k_sq_score));
    let tilde: Option<Vec<f64>> = reps.iter().map(|r| r.record.k_tilde).collect();
    let (mean_k_tilde, se_k_tilde) = match &tilde {
        Some(xs) => {
            let (m, s) = mean_se(xs);
            (Some(m), Some(s))
        }
        None => (None, None),
    };
    let usage = (0..grid.len())
        .map(|k| {
            let counts = column(&|r| r.usage[k] as f64);
            let mean_count = mean_se(&counts).0;
            UsageRow {
                d: grid.label(k),
                mean_count,
                frequency: mean_count / t,
            }
        })
        .collect();
    let moment_violations = reps
        .iter()
        .filter(|r| r.record.k_score * r.record.k_score > r.record.k_sq_score + crate::scalar::FLOAT_TOLERANCE)
        .count() as u64;
    let samples: Option<Vec<Vec<(u64, f64)>>> = reps.iter().map(|r| r.samples.clone()).collect();
    let ratio_table = samples.map(|s| variance_ratio_table(&s, grid, 0.0)).transpose()?;
    let exact = S::EXACT.then(|| {
        let r = S::from_int(config.replications as i64);
        let sum = |f: &dyn Fn(&(S, S, Option<S>)) -> S| {
            reps.iter().fold(S::zero(), |acc, x| acc + f(x.exact.as_ref().expect("exact mode")))
        };
        let has_tilde = reps.iter().all(|x| x.exact.as_ref().is_some_and(|e| e.2.is_some()));
        ExactMeans {
            k_score: (sum(&|e| e.0.clone()) / r.clone()).to_plain_string(),
            k_sq_score: (sum(&|e| e.1.clone()) / r.clone()).to_plain_string(),
            k_tilde: has_tilde.then(|| (sum(&|e| e.2.clone().expect("checked")) / r.clone()).to_plain_string()),
        }
    });
    let summary = SummaryStats {
        grid: grid.n(),
        horizon: config.horizon,
        order: config.order,
        arithmetic: config.arithmetic,
        seed: config.seed,
        replications: config.replications,
        mean_k,
        se_k,
        mean_k_sq,
        se_k_sq,
        mean_k_tilde,
        se_k_tilde,
        exact,
        usage,
        moment_violations,
        ratio_table,
        bounds: bound_report(grid.n(), config.horizon as u64)?,
        bound_check: bound_check(config, mean_k, se_k),
    };
    Ok(ExperimentResult {
        summary,
        records: reps.into_iter().map(|r| r.record).collect(),
    })
}

fn run_exhaustive(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let e = enumerate_expectation::<Exact>(
        &config.rainmaker,
        &config.forecaster,
        &config.grid,
        config.horizon,
        config.order,
    )?;
    let t = config.horizon as f64;
    let grid = &config.grid;
    let summary = SummaryStats {
        grid: grid.n(),
        horizon: config.horizon,
        order: config.order,
        arithmetic: config.arithmetic,
        seed: config.seed,
        replications: e.outcomes,
        mean_k: e.k_score.to_f64(),
        se_k: 0.0,
        mean_k_sq: e.k_sq_score.to_f64(),
        se_k_sq: 0.0,
        mean_k_tilde: e.k_tilde.as_ref().map(Scalar::to_f64),
        se_k_tilde: e.k_tilde.as_ref().map(|_| 0.0),
        exact: Some(ExactMeans {
            k_score: format_rational(&e.k_score),
            k_sq_score: format_rational(&e.k_sq_score),
            k_tilde: e.k_tilde.as_ref().map(format_rational),
        }),
        usage: e
            .usage
            .iter()
            .enumerate()
            .map(|(k, u)| UsageRow {
                d: grid.label(k),
                mean_count: u.to_f64(),
                frequency: u.to_f64() / t,
            })
            .collect(),
        moment_violations: 0,
        ratio_table: None,
        bounds: bound_report(grid.n(), config.horizon as u64)?,
        bound_check: bound_check(config, e.k_score.to_f64(), 0.0),
    };
    Ok(ExperimentResult {
        summary,
        records: Vec::new(),
    })
}

/// Ordinary least squares fit of `log y` on `log x`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeFit {
    pub grid: u32,
    /// Which mean was regressed: `k_tilde`, or `k_score` when `p_t` is hidden.
    pub metric: &'static str,
    pub points: usize,
    pub slope: f64,
    pub se: f64,
    pub intercept: f64,
}

/// `(slope, standard error, intercept)` of the least-squares line; `None`
/// with fewer than three points or no spread in `x`.
pub fn ols(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    let n = xs.len();
    if n < 3 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let se = (rss / (nf - 2.0) / sxx).sqrt();
    Some((slope, se, intercept))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub base: ExperimentConfig,
    pub horizons: Vec<usize>,
    /// Grid sizes to sweep; the base grid when empty.
    #[serde(default)]
    pub grids: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SummaryStats>,
    /// One fit per grid size with at least three horizons.
    pub slopes: Vec<SlopeFit>,
}

impl SweepResult {
    pub const CSV_HEADER: [&'static str; 10] = [
        "N",
        "T",
        "replications",
        "mean_k",
        "se_k",
        "mean_k_sq",
        "mean_k_tilde",
        "se_k_tilde",
        "main_bound",
        "bound_flagged",
    ];

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(Self::CSV_HEADER)?;
        let opt = |x: Option<f64>| x.map(|v| format_sig(v, 12)).unwrap_or_default();
        for s in &self.rows {
            w.write_record([
                s.grid.to_string(),
                s.horizon.to_string(),
                s.replications.to_string(),
                format_sig(s.mean_k, 12),
                format_sig(s.se_k, 12),
                format_sig(s.mean_k_sq, 12),
                opt(s.mean_k_tilde),
                opt(s.se_k_tilde),
                format_sig(s.bounds.main_bound(), 12),
                s.bound_check.flagged.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Value {
        json!({ "rows": self.rows, "slopes": self.slopes })
    }
}

pub fn sweep(spec: &SweepSpec) -> Result<SweepResult> {
    if spec.horizons.is_empty() {
        return Err(Error::config("sweep needs at least one horizon"));
    }
    let grids: Vec<Grid> = if spec.grids.is_empty() {
        vec![spec.base.grid]
    } else {
        spec.grids.iter().map(|&n| Grid::new(n)).collect::<Result<_>>()?
    };
    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    for grid in &grids {
        let mut group = Vec::new();
        for &t in &spec.horizons {
            let mut cfg = spec.base.clone();
            cfg.grid = *grid;
            cfg.horizon = t;
            cfg.summary_out = None;
            cfg.replications_out = None;
            log::info!("sweep point N={} T={t}", grid.n());
            group.push(run_experiment(&cfg)?.summary);
        }
        let use_tilde = group.iter().all(|s| s.mean_k_tilde.is_some());
        let xs: Vec<f64> = group.iter().map(|s| (s.horizon as f64).ln()).collect();
        let ys: Vec<f64> = group
            .iter()
            .map(|s| if use_tilde { s.mean_k_tilde.expect("checked") } else { s.mean_k }.ln())
            .collect();
        if let Some((slope, se, intercept)) = ols(&xs, &ys) {
            slopes.push(SlopeFit {
                grid: grid.n(),
                metric: if use_tilde { "k_tilde" } else { "k_score" },
                points: xs.len(),
                slope,
                se,
                intercept,
            });
        }
        rows.extend(group);
    }
    Ok(SweepResult { rows, slopes })
}

/// One solved game value with `value * sqrt(T)` for lower-band checks.
#[derive(Clone, Debug)]
pub struct SolverRow {
    pub solved: SolvedValue,
    pub scaled: f64,
}

/// Solves every `(N, T)` pair. `mode` of `None` picks [`default_mode`].
pub fn solver_sweep(
    grids: &[u32],
    horizons: &[u32],
    order: MoveOrder,
    mode: Option<ValueMode>,
    state_budget: u128,
) -> Result<Vec<SolverRow>> {
    if grids.is_empty() || horizons.is_empty() {
        return Err(Error::config("solver sweep needs at least one grid size and one horizon"));
    }
    let mut rows = Vec::new();
    for &n in grids {
        let grid = Grid::new(n)?;
        for &t in horizons {
            let mode = mode.unwrap_or_else(|| default_mode(n, t, order));
            let solved = solve_value(&grid, t, order, mode, state_budget, false)?;
            let scaled = solved.value * (t as f64).sqrt();
            rows.push(SolverRow { solved, scaled });
        }
    }
    Ok(rows)
}

pub fn write_solver_csv<W: Write>(rows: &[SolverRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = SolvedValue::CSV_HEADER.to_vec();
    header.push("value_sqrt_t");
    w.write_record(&header)?;
    for r in rows {
        let mut rec = r.solved.csv_record().to_vec();
        rec.push(format_sig(r.scaled, 12));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;
    use crate::states::DEFAULT_STATE_BUDGET;
    use crate::strategy::Prob;

    fn half() -> Prob {
        Prob::new(ratio(1, 2)).unwrap()
    }

    #[test]
    fn exhaustive_constant_half() {
        let cfg = ExperimentConfig::new(
            Grid::new(1).unwrap(),
            2,
            RainmakerSpec::Iid { p: half() },
            ForecasterSpec::Constant { d: half() },
        )
        .with_arithmetic(Arithmetic::Exhaustive);
        let s = run_experiment(&cfg).unwrap().summary;
        assert_eq!(s.exact.unwrap().k_score, "1/4");
        assert_eq!(s.mean_k, 0.25);
        assert_eq!(s.replications, 4);
    }

    #[test]
    fn reruns_are_identical() {
        let cfg = ExperimentConfig::new(
            Grid::new(3).unwrap(),
            40,
            RainmakerSpec::RevealedUniform,
            ForecasterSpec::BestResponse,
        )
        .with_replications(50)
        .with_seed(9);
        let a = run_experiment(&cfg).unwrap();
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a.summary, b.summary);
        assert_eq!(a.records, b.records);
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let c = pool.install(|| run_experiment(&cfg).unwrap());
        assert_eq!(a.summary, c.summary);
        assert!(a.summary.mean_k_sq <= a.summary.mean_k);
        assert_eq!(a.summary.moment_violations, 0);
    }

    #[test]
    fn exact_mode_matches_float() {
        let base = ExperimentConfig::new(
            Grid::new(2).unwrap(),
            12,
            RainmakerSpec::Iid { p: Prob::new(ratio(3, 10)).unwrap() },
            ForecasterSpec::BestResponse,
        )
        .with_replications(20)
        .with_seed(4);
        let f = run_experiment(&base).unwrap().summary;
        let e = run_experiment(&base.clone().with_arithmetic(Arithmetic::Exact)).unwrap().summary;
        assert!((f.mean_k - e.mean_k).abs() < 1e-12);
        assert!(e.exact.is_some());
    }

    #[test]
    fn config_validation() {
        let cfg = ExperimentConfig::new(
            Grid::new(1).unwrap(),
            3,
            RainmakerSpec::RevealedUniform,
            ForecasterSpec::BestResponse,
        );
        assert!(cfg.clone().with_replications(0).validate().is_err());
        assert!(cfg.clone().with_arithmetic(Arithmetic::Exhaustive).validate().is_err());
        let json = r#"{"grid": 2, "horizon": 5, "rainmaker": {"kind": "revealed_uniform"},
                       "forecaster": {"kind": "best_response"}, "replications": 3, "seed": 1}"#;
        let parsed = ExperimentConfig::from_json_str(json).unwrap();
        assert_eq!(parsed.replications, 3);
        assert!(ExperimentConfig::from_json_str(r#"{"grid": 2}"#).is_err());
    }

    #[test]
    fn ols_recovers_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 - 0.5 * x).collect();
        let (slope, se, intercept) = ols(&xs, &ys).unwrap();
        assert!((slope + 0.5).abs() < 1e-12 && se < 1e-12 && (intercept - 2.0).abs() < 1e-12);
        assert!(ols(&xs[..2], &ys[..2]).is_none());
    }

    #[test]
    fn sweep_rules() {
        let base = ExperimentConfig::new(
            Grid::new(2).unwrap(),
            1,
            RainmakerSpec::RevealedUniform,
            ForecasterSpec::BestResponse,
        )
        .with_replications(30);
        let mut spec = SweepSpec {
            base,
            horizons: vec![],
            grids: vec![],
        };
        assert!(sweep(&spec).is_err());
        spec.horizons = vec![10, 20];
        let r = sweep(&spec).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert!(r.slopes.is_empty());
        spec.horizons = vec![10, 40, 160];
        assert_eq!(sweep(&spec).unwrap().slopes.len(), 1);
    }

    #[test]
    fn solver_rows() {
        let rows = solver_sweep(&[1], &[4, 9], MoveOrder::Simultaneous, None, DEFAULT_STATE_BUDGET).unwrap();
        assert_eq!(rows[0].solved.exact, Some(ratio(1, 2)));
        assert!((rows[1].scaled - 1.5).abs() < 1e-12);
        assert!(solver_sweep(&[], &[4], MoveOrder::Simultaneous, None, DEFAULT_STATE_BUDGET).is_err());
    }
}
