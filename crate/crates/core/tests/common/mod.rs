//! Independent oracles for the integration tests. Nothing here calls the
//! library's scoring, rounding or solving code.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub fn q(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Grid point `(2k+1)/(2N)`.
pub fn point(k: usize, n: usize) -> BigRational {
    q(2 * k as i64 + 1, 2 * n as i64)
}

/// Index of the grid point nearest `p`; at a midpoint `k/N` the lower one.
pub fn nearest(p: &BigRational, n: usize) -> usize {
    (0..n).find(|&k| *p <= q(k as i64 + 1, n as i64)).unwrap_or(n - 1)
}

/// `(K_T, 𝒦_T, K~_T)` straight from the definitions.
pub fn scores(steps: &[(bool, usize, Option<BigRational>)], n: usize) -> (BigRational, BigRational, Option<BigRational>) {
    let t = q(steps.len() as i64, 1);
    let mut k = BigRational::zero();
    let mut k_sq = BigRational::zero();
    let mut k_tilde = steps.iter().all(|s| s.2.is_some()).then(BigRational::zero);
    for d in 0..n {
        let used: Vec<_> = steps.iter().filter(|s| s.1 == d).collect();
        if used.is_empty() {
            continue;
        }
        let gap = used
            .iter()
            .fold(BigRational::zero(), |acc, s| acc + if s.0 { BigRational::one() } else { BigRational::zero() } - point(d, n));
        k += gap.abs() / &t;
        k_sq += &gap * &gap / (q(used.len() as i64, 1) * &t);
        if let Some(kt) = k_tilde.as_mut() {
            let smooth = used.iter().fold(BigRational::zero(), |acc, s| {
                acc + if s.0 { BigRational::one() } else { BigRational::zero() } - s.2.clone().unwrap()
            });
            *kt += smooth.abs() / &t;
        }
    }
    (k, k_sq, k_tilde)
}

/// Value of a 2-row zero-sum game, rows maximizing, columns minimizing;
/// `rows[i][j]` is the payoff. Handles one or two columns in closed form.
pub fn small_game_value(rows: &[Vec<BigRational>; 2]) -> BigRational {
    let cols = rows[0].len();
    assert!(cols == 1 || cols == 2, "oracle handles at most two columns");
    if cols == 1 {
        return rows[0][0].clone().max(rows[1][0].clone());
    }
    let maximin = rows
        .iter()
        .map(|r| r[0].clone().min(r[1].clone()))
        .max()
        .unwrap();
    let minimax = (0..2).map(|j| rows[0][j].clone().max(rows[1][j].clone())).min().unwrap();
    if maximin == minimax {
        return maximin;
    }
    let (a, b, c, d) = (&rows[0][0], &rows[0][1], &rows[1][0], &rows[1][1]);
    (a * d - b * c) / (a + d - b - c)
}

/// Game value on the full history tree, no aggregation of histories.
/// `forecast_first`: the rainmaker sees the forecast before choosing.
pub fn tree_value(n: usize, horizon: usize, forecast_first: bool) -> BigRational {
    fn rec(n: usize, horizon: usize, ff: bool, hist: &mut Vec<(bool, usize, Option<BigRational>)>) -> BigRational {
        if hist.len() == horizon {
            return scores(hist, n).0;
        }
        let mut payoff = [Vec::new(), Vec::new()];
        for c in 0..n {
            for (row, a) in [(0usize, false), (1, true)] {
                hist.push((a, c, None));
                payoff[row].push(rec(n, horizon, ff, hist));
                hist.pop();
            }
        }
        if ff {
            (0..n).map(|c| payoff[0][c].clone().max(payoff[1][c].clone())).min().unwrap()
        } else {
            small_game_value(&payoff)
        }
    }
    rec(n, horizon, forecast_first, &mut Vec::new())
}
