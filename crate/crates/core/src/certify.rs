//! Exact bracket on the game value without exact backward induction.
//!
//! Mixed stage games make the exact value's denominator grow geometrically
//! with `T`. Instead, the float solution's strategies are rounded to dyadic
//! rationals and each player's best response against them is evaluated in
//! exact arithmetic. Best responses only take maxima and fixed-weight sums,
//! so denominators stay small, and
//! `forecaster_best_response(rain) <= V_0 <= rainmaker_best_response(fore)`
//! holds for any pair of strategies.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::bounds::{main_bound, within_main_bound};
use crate::error::{Error, Result};
use crate::exploit::{forecaster_best_response, rainmaker_best_response};
use crate::grid::Grid;
use crate::scalar::{format_rational, format_sig, Exact, Scalar, FLOAT_TOLERANCE};
use crate::solver::{backward_induction, ForecastTable, RainTable, SolveOptions, ValueTable};
use crate::strategy::{ForecasterSpec, MarkovPolicy, MoveOrder};

/// Fractional bits kept when rounding float probabilities.
pub const DYADIC_BITS: u32 = 40;

/// `x` rounded to the nearest multiple of `2^-bits`.
pub fn dyadic(x: f64, bits: u32) -> Exact {
    let scaled = (x * (1u64 << bits) as f64).round();
    BigRational::new(BigInt::from(scaled as i64), BigInt::from(1u64 << bits))
}

fn dyadic_prob(x: f64) -> Exact {
    let q = dyadic(x.clamp(0.0, 1.0), DYADIC_BITS);
    if q > Exact::one() {
        Exact::one()
    } else {
        q
    }
}

/// Rounds a float distribution so the result sums to exactly one. The
/// largest entry absorbs the rounding remainder.
fn dyadic_distribution(dist: &[f64]) -> Vec<Exact> {
    let top = (0..dist.len())
        .max_by(|&a, &b| dist[a].total_cmp(&dist[b]).then(b.cmp(&a)))
        .expect("non-empty distribution");
    let mut out: Vec<Exact> = dist.iter().map(|&x| dyadic_prob(x)).collect();
    let rest = out
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != top)
        .fold(Exact::zero(), |acc, (_, q)| acc + q);
    out[top] = Exact::one() - rest;
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertifiedValue {
    pub grid: Grid,
    pub horizon: u32,
    pub order: MoveOrder,
    /// Forecaster's exact best-response value against the rounded rainmaker.
    pub lower: Exact,
    /// Rainmaker's exact best-response value against the rounded forecaster.
    pub upper: Exact,
    /// Float backward-induction value.
    pub float_value: f64,
    /// Rounded forecaster strategy whose worst case is `upper`.
    pub forecaster: MarkovPolicy,
}

impl CertifiedValue {
    pub fn width(&self) -> Exact {
        &self.upper - &self.lower
    }

    /// `V_0 <= 1/(2N) + (1/2) sqrt(N/T)`, decided from `upper` exactly.
    pub fn within_main_bound(&self) -> bool {
        within_main_bound(&self.upper, self.grid.n(), self.horizon as u64)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "N": self.grid.n(),
            "T": self.horizon,
            "order": self.order.to_string(),
            "lower": self.lower.to_json(),
            "upper": self.upper.to_json(),
            "float_value": self.float_value,
        })
    }
}

/// Float solve followed by exact best-response evaluation of both rounded
/// strategies.
pub fn certified_value(grid: &Grid, horizon: u32, order: MoveOrder, state_budget: u128) -> Result<CertifiedValue> {
    let opts = SolveOptions {
        state_budget,
        keep_tables: true,
    };
    let table = backward_induction::<f64>(grid, horizon, order, &opts)?;
    let missing = || Error::InvalidStrategy("float solve returned no strategy tables".into());
    let space = table.space.as_ref().ok_or_else(missing)?;
    let fore = table.forecaster.as_ref().ok_or_else(missing)?;
    let rain = table.rainmaker.as_ref().ok_or_else(missing)?;

    let fore_exact = ForecastTable {
        layers: fore
            .layers
            .iter()
            .map(|layer| layer.iter().map(|e| e.as_deref().map(dyadic_distribution)).collect())
            .collect(),
    };
    let rain_exact = RainTable {
        order: rain.order,
        layers: rain
            .layers
            .iter()
            .map(|layer| {
                layer
                    .iter()
                    .map(|e| e.as_ref().map(|ps| ps.iter().map(|&p| dyadic_prob(p)).collect()))
                    .collect()
            })
            .collect(),
    };
    let upper = rainmaker_best_response(space, order, &fore_exact)?;
    let lower = forecaster_best_response(space, order, &rain_exact)?;
    Ok(CertifiedValue {
        grid: *grid,
        horizon,
        order,
        lower,
        upper,
        float_value: table.value,
        forecaster: fore_exact.to_policy(space),
    })
}

/// How a game value is computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueMode {
    /// Exact backward induction.
    Exact,
    /// Float backward induction with exact best-response bracket.
    Certified,
    /// Float backward induction.
    Float,
}

impl std::fmt::Display for ValueMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ValueMode::Exact => "exact",
            ValueMode::Certified => "certified",
            ValueMode::Float => "float",
        })
    }
}

/// Largest simultaneous-order horizon solved by exact backward induction at
/// N = 2. Beyond it the value's denominator runs to tens of thousands of
/// bits per state.
pub const EXACT_HORIZON_LIMIT_N2: u32 = 10;

/// Mode used when none is requested: exact answers for `N <= 2, T <= 16`,
/// plain floats elsewhere.
pub fn default_mode(n: u32, horizon: u32, order: MoveOrder) -> ValueMode {
    if n > 2 || horizon > 16 {
        return ValueMode::Float;
    }
    let mixing = n == 2 && order == MoveOrder::Simultaneous;
    if mixing && horizon > EXACT_HORIZON_LIMIT_N2 {
        ValueMode::Certified
    } else {
        ValueMode::Exact
    }
}

/// A solved value in whichever mode produced it.
#[derive(Clone, Debug)]
pub struct SolvedValue {
    pub grid: Grid,
    pub horizon: u32,
    pub order: MoveOrder,
    pub mode: ValueMode,
    /// Float value (the exact value rounded, or the float solve).
    pub value: f64,
    pub exact: Option<Exact>,
    /// Exact bracket; equal to `exact` in exact mode.
    pub lower: Option<Exact>,
    pub upper: Option<Exact>,
    /// `1/(2N) + (1/2) sqrt(N/T)`.
    pub bound: f64,
    /// Bound dominance: exact in exact and certified modes, within
    /// [`FLOAT_TOLERANCE`] in float mode.
    pub within_bound: bool,
    /// Exact value table, kept only when requested in exact mode.
    pub exact_table: Option<ValueTable<Exact>>,
    pub float_table: Option<ValueTable<f64>>,
    /// Rounded forecaster of a certified solve, kept with the tables.
    pub certified_forecaster: Option<MarkovPolicy>,
}

impl SolvedValue {
    pub const CSV_HEADER: [&'static str; 9] =
        ["N", "T", "order", "mode", "value", "value_decimal", "lower", "upper", "bound"];

    pub fn csv_record(&self) -> [String; 9] {
        let rat = |x: &Option<Exact>| x.as_ref().map(format_rational).unwrap_or_default();
        [
            self.grid.n().to_string(),
            self.horizon.to_string(),
            self.order.to_string(),
            self.mode.to_string(),
            self.exact.as_ref().map(format_rational).unwrap_or_else(|| format_sig(self.value, 12)),
            format_sig(self.value, 12),
            rat(&self.lower),
            rat(&self.upper),
            format_sig(self.bound, 12),
        ]
    }

    /// Strategy export: the full value table in exact and float modes, the
    /// rounded forecaster in certified mode. `None` without kept tables.
    pub fn strategy_json(&self) -> Option<Value> {
        if let Some(t) = &self.exact_table {
            return Some(t.to_json());
        }
        if let Some(t) = &self.float_table {
            return Some(t.to_json());
        }
        let policy = self.certified_forecaster.as_ref()?;
        let mut out = self.to_json();
        out["forecaster"] =
            serde_json::to_value(ForecasterSpec::MarkovTable(policy.clone())).expect("spec serializes");
        Some(out)
    }

    pub fn to_json(&self) -> Value {
        let mut out = json!({
            "N": self.grid.n(),
            "T": self.horizon,
            "order": self.order.to_string(),
            "mode": self.mode.to_string(),
            "value": match &self.exact {
                Some(v) => v.to_json(),
                None => self.value.to_json(),
            },
            "bound": self.bound.to_json(),
            "within_bound": self.within_bound,
        });
        if self.mode == ValueMode::Certified {
            out["lower"] = self.lower.as_ref().expect("certified").to_json();
            out["upper"] = self.upper.as_ref().expect("certified").to_json();
        }
        out
    }
}

/// Solves the game value in `mode`. `keep_tables` retains the strategy
/// tables of the exact or float solve for export.
pub fn solve_value(
    grid: &Grid,
    horizon: u32,
    order: MoveOrder,
    mode: ValueMode,
    state_budget: u128,
    keep_tables: bool,
) -> Result<SolvedValue> {
    let (n, t) = (grid.n(), horizon as u64);
    let opts = SolveOptions {
        state_budget,
        keep_tables,
    };
    let bound = main_bound(n, t);
    let mut out = SolvedValue {
        grid: *grid,
        horizon,
        order,
        mode,
        value: 0.0,
        exact: None,
        lower: None,
        upper: None,
        bound,
        within_bound: false,
        exact_table: None,
        float_table: None,
        certified_forecaster: None,
    };
    match mode {
        ValueMode::Exact => {
            let table = backward_induction::<Exact>(grid, horizon, order, &opts)?;
            out.value = table.value.to_f64();
            out.within_bound = within_main_bound(&table.value, n, t);
            out.exact = Some(table.value.clone());
            out.lower = Some(table.value.clone());
            out.upper = Some(table.value.clone());
            out.exact_table = keep_tables.then_some(table);
        }
        ValueMode::Certified => {
            let c = certified_value(grid, horizon, order, state_budget)?;
            out.value = c.float_value;
            out.within_bound = c.within_main_bound();
            out.lower = Some(c.lower);
            out.upper = Some(c.upper);
            out.certified_forecaster = keep_tables.then_some(c.forecaster);
        }
        ValueMode::Float => {
            let table = backward_induction::<f64>(grid, horizon, order, &opts)?;
            out.value = table.value;
            out.within_bound = table.value <= bound + FLOAT_TOLERANCE;
            out.float_table = keep_tables.then_some(table);
        }
    }
    Ok(out)
}
