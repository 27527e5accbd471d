//! Finite two-player zero-sum games in mixed strategies.
//!
//! The row player maximizes `U(x, y) = sum_ij x_i y_j u_ij`, the column
//! player minimizes. Games with two rows, which is every stage game of the
//! calibration solver, are solved exactly by maximizing the lower envelope of
//! the column lines over the row mix. Larger games go through support
//! enumeration; fictitious play is kept as an independent cross-check.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq)]
pub struct MatrixGame<S> {
    rows: usize,
    cols: usize,
    payoff: Vec<S>,
}

impl<S: Scalar> MatrixGame<S> {
    pub fn new(rows: usize, cols: usize, payoff: Vec<S>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::arg("matrix game needs at least one row and one column"));
        }
        if payoff.len() != rows * cols {
            return Err(Error::arg(format!(
                "{} payoffs for a {rows}x{cols} game",
                payoff.len()
            )));
        }
        if payoff.iter().any(|u| !u.to_f64().is_finite()) {
            return Err(Error::arg("payoffs must be finite"));
        }
        Ok(MatrixGame { rows, cols, payoff })
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::arg("ragged payoff matrix"));
        }
        Self::new(m, n, rows.into_iter().flatten().collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.payoff[i * self.cols + j]
    }

    /// `U(i, y)` for pure row `i`.
    pub fn row_payoff(&self, i: usize, y: &[S]) -> S {
        (0..self.cols).map(|j| self.get(i, j).clone() * y[j].clone()).fold(S::zero(), |a, b| a + b)
    }

    /// `U(x, j)` for pure column `j`.
    pub fn col_payoff(&self, x: &[S], j: usize) -> S {
        (0..self.rows).map(|i| self.get(i, j).clone() * x[i].clone()).fold(S::zero(), |a, b| a + b)
    }

    pub fn payoff(&self, x: &[S], y: &[S]) -> S {
        (0..self.rows).map(|i| x[i].clone() * self.row_payoff(i, y)).fold(S::zero(), |a, b| a + b)
    }

    /// `min_j U(x, j)`: what mix `x` guarantees the row player.
    pub fn guarantee_of_row_mix(&self, x: &[S]) -> S {
        min_of((0..self.cols).map(|j| self.col_payoff(x, j)))
    }

    /// `max_i U(i, y)`: what mix `y` concedes at most.
    pub fn ceiling_of_col_mix(&self, y: &[S]) -> S {
        max_of((0..self.rows).map(|i| self.row_payoff(i, y)))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GameSolution<S> {
    pub value: S,
    pub row_mix: Vec<S>,
    pub col_mix: Vec<S>,
}

/// How far a solution is from being a saddle point.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate<S> {
    /// `max_i U(i, y) - v`; positive means some row deviation gains.
    pub row_excess: S,
    /// `v - min_j U(x, j)`; positive means some column deviation gains.
    pub col_shortfall: S,
    pub mixes_valid: bool,
}

impl<S: Scalar> Certificate<S> {
    pub fn holds(&self) -> bool {
        self.mixes_valid && self.row_excess.approx_le(&S::zero()) && self.col_shortfall.approx_le(&S::zero())
    }
}

impl<S: Scalar> GameSolution<S> {
    pub fn certify(&self, game: &MatrixGame<S>) -> Certificate<S> {
        Certificate {
            row_excess: game.ceiling_of_col_mix(&self.col_mix) - self.value.clone(),
            col_shortfall: self.value.clone() - game.guarantee_of_row_mix(&self.row_mix),
            mixes_valid: is_distribution(&self.row_mix, game.rows()) && is_distribution(&self.col_mix, game.cols()),
        }
    }
}

pub fn is_distribution<S: Scalar>(p: &[S], len: usize) -> bool {
    p.len() == len
        && p.iter().all(|q| q.approx_le(&S::one()) && S::zero().approx_le(q))
        && p.iter().fold(S::zero(), |a, b| a + b.clone()).approx_eq(&S::one())
}

fn min_of<S: Scalar>(mut it: impl Iterator<Item = S>) -> S {
    let first = it.next().expect("non-empty");
    it.fold(first, |a, b| if b < a { b } else { a })
}

fn max_of<S: Scalar>(mut it: impl Iterator<Item = S>) -> S {
    let first = it.next().expect("non-empty");
    it.fold(first, |a, b| if b > a { b } else { a })
}

fn unit<S: Scalar>(len: usize, k: usize) -> Vec<S> {
    (0..len).map(|i| if i == k { S::one() } else { S::zero() }).collect()
}

/// Value and optimal mixes. Exact when `S` is exact.
pub fn solve_matrix_game<S: Scalar>(game: &MatrixGame<S>) -> GameSolution<S> {
    match (game.rows(), game.cols()) {
        (1, _) => {
            let j = argmin((0..game.cols()).map(|j| game.get(0, j)));
            GameSolution {
                value: game.get(0, j).clone(),
                row_mix: vec![S::one()],
                col_mix: unit(game.cols(), j),
            }
        }
        (2, _) => solve_two_row(game),
        _ => support_enumeration(game).expect("every finite zero-sum game has an equilibrium on square supports"),
    }
}

fn argmin<'a, S: Scalar>(values: impl Iterator<Item = &'a S>) -> usize {
    let mut best: Option<(usize, &S)> = None;
    for (i, v) in values.enumerate() {
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((i, v));
        }
    }
    best.expect("non-empty").0
}

/// Two-row envelope method. `x` is the weight on row 0; column `j` is the
/// line `x u_0j + (1-x) u_1j` and the value is the highest point of the
/// lower envelope of those lines on `[0,1]`.
pub fn solve_two_row<S: Scalar>(game: &MatrixGame<S>) -> GameSolution<S> {
    assert_eq!(game.rows(), 2, "two-row solver");
    let n = game.cols();
    let slope = |j: usize| game.get(0, j).clone() - game.get(1, j).clone();
    let line = |j: usize, x: &S| x.clone() * slope(j) + game.get(1, j).clone();
    let envelope = |x: &S| min_of((0..n).map(|j| line(j, x)));

    let mut candidates = vec![S::zero(), S::one()];
    for j in 0..n {
        for k in (j + 1)..n {
            let ds = slope(j) - slope(k);
            if ds.is_zero() {
                continue;
            }
            let x = (game.get(1, k).clone() - game.get(1, j).clone()) / ds;
            if x > S::zero() && x < S::one() {
                candidates.push(x);
            }
        }
    }
    let mut best_x = candidates[0].clone();
    let mut value = envelope(&best_x);
    for x in candidates.into_iter().skip(1) {
        let v = envelope(&x);
        if v > value {
            value = v;
            best_x = x;
        }
    }

    let active: Vec<usize> = (0..n).filter(|&j| line(j, &best_x).approx_eq(&value)).collect();
    let is_flat = |j: usize| slope(j).approx_eq(&S::zero());
    let flat = active.iter().copied().find(|&j| is_flat(j));
    let rising = active.iter().copied().find(|&j| !is_flat(j) && slope(j) > S::zero());
    let falling = active.iter().copied().find(|&j| !is_flat(j) && slope(j) < S::zero());
    let col_mix = match (flat, rising, falling) {
        (Some(j), _, _) => unit(n, j),
        (None, Some(j), _) if best_x == S::one() => unit(n, j),
        (None, _, Some(k)) if best_x.is_zero() => unit(n, k),
        (None, Some(j), Some(k)) => {
            // Equalize the two rows: w s_j = (1-w)(-s_k).
            let sj = slope(j);
            let sk = -slope(k);
            let w = sk.clone() / (sj + sk);
            let mut y = vec![S::zero(); n];
            y[k] = S::one() - w.clone();
            y[j] = w;
            y
        }
        // Only reachable through float round-off: take the flattest line.
        _ => {
            let j = active
                .iter()
                .copied()
                .min_by(|&a, &b| slope(a).abs().partial_cmp(&slope(b).abs()).unwrap_or(std::cmp::Ordering::Equal))
                .unwrap_or(0);
            unit(n, j)
        }
    };
    let row_mix = vec![best_x.clone(), S::one() - best_x];
    GameSolution {
        value,
        row_mix,
        col_mix,
    }
}

/// Solves `a z = b` by Gaussian elimination. `None` if singular.
fn solve_linear<S: Scalar>(mut a: Vec<Vec<S>>, mut b: Vec<S>) -> Option<Vec<S>> {
    let n = b.len();
    for col in 0..n {
        let pivot = if S::EXACT {
            (col..n).find(|&r| !a[r][col].is_zero())?
        } else {
            let r = (col..n).max_by(|&p, &q| {
                a[p][col].abs().partial_cmp(&a[q][col].abs()).unwrap_or(std::cmp::Ordering::Equal)
            })?;
            if a[r][col].abs().to_f64() < 1e-12 {
                return None;
            }
            r
        };
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone() / a[col][col].clone();
            for c in col..n {
                let delta = factor.clone() * a[col][c].clone();
                a[r][c] = a[r][c].clone() - delta;
            }
            b[r] = b[r].clone() - factor * b[col].clone();
        }
    }
    Some((0..n).map(|i| b[i].clone() / a[i][i].clone()).collect())
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Equilibrium search over equal-size supports.
///
/// Payoffs are shifted to be positive first, so the value is nonzero and
/// some square kernel is nonsingular. Returns `None` only if no pair of
/// supports certifies, which does not happen for finite games in exact
/// arithmetic.
pub fn support_enumeration<S: Scalar>(game: &MatrixGame<S>) -> Option<GameSolution<S>> {
    let (m, n) = (game.rows(), game.cols());
    let lowest = min_of(game.payoff.iter().cloned());
    let shift = S::one() - lowest;
    let shifted = MatrixGame {
        rows: m,
        cols: n,
        payoff: game.payoff.iter().map(|u| u.clone() + shift.clone()).collect(),
    };
    for k in 1..=m.min(n) {
        for rows in subsets(m, k) {
            for cols in subsets(n, k) {
                if let Some(sol) = square_kernel(&shifted, &rows, &cols) {
                    return Some(GameSolution {
                        value: sol.value - shift,
                        ..sol
                    });
                }
            }
        }
    }
    None
}

fn square_kernel<S: Scalar>(game: &MatrixGame<S>, rows: &[usize], cols: &[usize]) -> Option<GameSolution<S>> {
    let k = rows.len();
    // Unknowns (x_I, v): sum_i x_i u_ij - v = 0 for j in J, sum_i x_i = 1.
    let mut a = Vec::with_capacity(k + 1);
    for &j in cols {
        let mut row: Vec<S> = rows.iter().map(|&i| game.get(i, j).clone()).collect();
        row.push(-S::one());
        a.push(row);
    }
    let mut ones = vec![S::one(); k];
    ones.push(S::zero());
    a.push(ones.clone());
    let mut rhs = vec![S::zero(); k];
    rhs.push(S::one());
    let xs = solve_linear(a, rhs.clone())?;

    let mut a = Vec::with_capacity(k + 1);
    for &i in rows {
        let mut row: Vec<S> = cols.iter().map(|&j| game.get(i, j).clone()).collect();
        row.push(-S::one());
        a.push(row);
    }
    a.push(ones);
    let ys = solve_linear(a, rhs)?;

    let mut x = vec![S::zero(); game.rows()];
    for (idx, &i) in rows.iter().enumerate() {
        x[i] = xs[idx].clone();
    }
    let mut y = vec![S::zero(); game.cols()];
    for (idx, &j) in cols.iter().enumerate() {
        y[j] = ys[idx].clone();
    }
    let sol = GameSolution {
        value: xs[k].clone(),
        row_mix: x,
        col_mix: y,
    };
    sol.certify(game).holds().then_some(sol)
}

/// Fictitious play with certified bracket `lower <= v <= upper`.
#[derive(Clone, Debug, PartialEq)]
pub struct IterativeBounds {
    pub lower: f64,
    pub upper: f64,
    pub row_mix: Vec<f64>,
    pub col_mix: Vec<f64>,
    pub iterations: usize,
}

pub fn fictitious_play<S: Scalar>(game: &MatrixGame<S>, iterations: usize) -> IterativeBounds {
    let (m, n) = (game.rows(), game.cols());
    let u: Vec<f64> = game.payoff.iter().map(Scalar::to_f64).collect();
    let mut row_counts = vec![0.0f64; m];
    let mut col_counts = vec![0.0f64; n];
    // Cumulative payoffs against the opponent's empirical play.
    let mut row_gain = vec![0.0f64; m];
    let mut col_loss = vec![0.0f64; n];
    let (mut i, mut j) = (0usize, 0usize);
    for _ in 0..iterations.max(1) {
        row_counts[i] += 1.0;
        col_counts[j] += 1.0;
        for (jj, loss) in col_loss.iter_mut().enumerate() {
            *loss += u[i * n + jj];
        }
        for (ii, gain) in row_gain.iter_mut().enumerate() {
            *gain += u[ii * n + j];
        }
        i = (0..m).fold(0, |b, c| if row_gain[c] > row_gain[b] { c } else { b });
        j = (0..n).fold(0, |b, c| if col_loss[c] < col_loss[b] { c } else { b });
    }
    let total: f64 = row_counts.iter().sum();
    let x: Vec<f64> = row_counts.iter().map(|c| c / total).collect();
    let y: Vec<f64> = col_counts.iter().map(|c| c / total).collect();
    let lower = (0..n)
        .map(|jj| (0..m).map(|ii| x[ii] * u[ii * n + jj]).sum::<f64>())
        .fold(f64::INFINITY, f64::min);
    let upper = (0..m)
        .map(|ii| (0..n).map(|jj| y[jj] * u[ii * n + jj]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    IterativeBounds {
        lower,
        upper,
        row_mix: x,
        col_mix: y,
        iterations,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MinimaxCheck<S> {
    /// `max_x min_j U(x, j)` attained by the solver's row mix.
    pub maximin: S,
    /// `min_y max_i U(i, y)` attained by the support-enumeration column mix.
    pub minimax: S,
    /// `minimax - maximin`; never negative, zero at a saddle point.
    pub gap: S,
    pub certified: bool,
}

impl<S: Scalar> MinimaxCheck<S> {
    pub fn passed(&self) -> bool {
        self.certified && self.gap.approx_le(&S::zero())
    }
}

/// Computes both one-sided values by independent routes and compares them.
pub fn minimax_equals_maximin_check<S: Scalar>(game: &MatrixGame<S>) -> MinimaxCheck<S> {
    let solved = solve_matrix_game(game);
    let maximin = game.guarantee_of_row_mix(&solved.row_mix);
    let (minimax, enumerated_ok) = match support_enumeration(game) {
        Some(se) => (game.ceiling_of_col_mix(&se.col_mix), se.certify(game).holds()),
        None => (game.ceiling_of_col_mix(&solved.col_mix), false),
    };
    MinimaxCheck {
        gap: minimax.clone() - maximin.clone(),
        maximin,
        minimax,
        certified: enumerated_ok && solved.certify(game).holds(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, Exact};

    fn game(rows: &[&[i64]]) -> MatrixGame<Exact> {
        MatrixGame::from_rows(rows.iter().map(|r| r.iter().map(|&u| ratio(u, 1)).collect()).collect()).unwrap()
    }

    #[test]
    fn matching_pennies() {
        let g = game(&[&[1, -1], &[-1, 1]]);
        let s = solve_matrix_game(&g);
        assert_eq!(s.value, ratio(0, 1));
        assert_eq!(s.row_mix, vec![ratio(1, 2), ratio(1, 2)]);
        assert_eq!(s.col_mix, vec![ratio(1, 2), ratio(1, 2)]);
        assert!(s.certify(&g).holds());
        let check = minimax_equals_maximin_check(&g);
        assert!(check.passed());
        assert_eq!(check.gap, ratio(0, 1));
    }

    #[test]
    fn float_near_flat_column() {
        // Column 1 is flat up to round-off; its stray negative slope must not
        // make it look like a falling line.
        let g = MatrixGame::new(
            2,
            3,
            vec![
                0.046296296296296294,
                0.06666666666666665,
                0.10555555555555554,
                0.10555555555555554,
                0.06666666666666667,
                0.046296296296296294,
            ],
        )
        .unwrap();
        let s = solve_two_row(&g);
        assert!(s.certify(&g).holds(), "{s:?}");
        assert!(s.col_mix[1] > 0.999);
    }

    #[test]
    fn two_by_two_closed_form() {
        // (ad - bc)/(a + d - b - c) = (6 - 1)/(3 + 2 - 1 - 1) = 5/3
        let g = game(&[&[3, 1], &[1, 2]]);
        let s = solve_matrix_game(&g);
        assert_eq!(s.value, ratio(5, 3));
        assert_eq!(s.row_mix, vec![ratio(1, 3), ratio(2, 3)]);
        assert_eq!(s.col_mix, vec![ratio(1, 3), ratio(2, 3)]);
        assert_eq!(support_enumeration(&g).unwrap().value, ratio(5, 3));
    }

    #[test]
    fn dominated_column() {
        let g = game(&[&[1, 0], &[1, 0]]);
        let s = solve_matrix_game(&g);
        assert_eq!(s.value, ratio(0, 1));
        assert_eq!(s.col_mix, vec![ratio(0, 1), ratio(1, 1)]);
        assert!(s.certify(&g).holds());
    }

    #[test]
    fn pure_saddle() {
        let g = game(&[&[2, 3], &[1, 4]]);
        let s = solve_matrix_game(&g);
        assert_eq!(s.value, ratio(2, 1));
        assert_eq!(s.row_mix, vec![ratio(1, 1), ratio(0, 1)]);
        assert_eq!(s.col_mix, vec![ratio(1, 1), ratio(0, 1)]);
        assert!(minimax_equals_maximin_check(&g).passed());
    }

    #[test]
    fn single_row_and_column() {
        let g = game(&[&[4, 2, 7]]);
        assert_eq!(solve_matrix_game(&g).value, ratio(2, 1));
        let g = game(&[&[4], &[9], &[1]]);
        let s = solve_matrix_game(&g);
        assert_eq!(s.value, ratio(9, 1));
        assert!(s.certify(&g).holds());
    }

    #[test]
    fn rock_paper_scissors_by_enumeration() {
        let g = game(&[&[0, -1, 1], &[1, 0, -1], &[-1, 1, 0]]);
        let s = solve_matrix_game(&g);
        assert_eq!(s.value, ratio(0, 1));
        assert_eq!(s.row_mix, vec![ratio(1, 3); 3]);
        let fp = fictitious_play(&g, 20_000);
        assert!(fp.lower <= 1e-12 && fp.upper >= -1e-12);
        assert!(fp.upper - fp.lower < 0.05);
    }

    #[test]
    fn float_mode_two_row() {
        let g = MatrixGame::from_rows(vec![vec![0.25, 0.75], vec![0.75, 0.25]]).unwrap();
        let s = solve_two_row(&g);
        assert!((s.value - 0.5).abs() < 1e-12);
        assert!(s.certify(&g).holds());
    }

    #[test]
    fn invalid_games() {
        assert!(MatrixGame::<Exact>::new(0, 1, vec![]).is_err());
        assert!(MatrixGame::<f64>::new(1, 2, vec![1.0]).is_err());
        assert!(MatrixGame::<f64>::new(1, 1, vec![f64::NAN]).is_err());
    }
}
