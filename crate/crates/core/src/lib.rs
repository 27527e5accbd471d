//! Laboratory for the finite calibration game between a forecaster and a
//! rainmaker.
//!
//! Each period the rainmaker picks the weather `a_t` in `{0,1}` and the
//! forecaster announces `c_t` from the grid `{1/(2N), ..., (2N-1)/(2N)}`.
//! The forecaster is scored by the calibration score `K_T`, the
//! usage-weighted distance between each forecast value and the rain
//! frequency on the periods it was used.
//!
//! * [`score`]: exact scoring of transcripts
//! * [`strategy`] and [`episode`]: rainmakers, forecasters, play
//! * [`matrix`] and [`solver`]: zero-sum kernels and exact backward
//!   induction over count states, with [`exploit`] for saddle certificates
//! * [`bounds`]: closed-form upper bounds and horizon thresholds
//! * [`certify`]: value modes, including an exact bracket for sizes where
//!   exact backward induction is too slow
//! * [`harness`]: seeded Monte Carlo experiments and sweeps
//!
//! Numerical code is generic over [`Scalar`]; [`Exact`] (big rationals) and
//! `f64` are the two instantiations, with aliases below.

pub mod bounds;
pub mod certify;
pub mod counts;
pub mod episode;
pub mod error;
pub mod exploit;
pub mod grid;
pub mod harness;
pub mod matrix;
pub mod rng;
pub mod scalar;
pub mod score;
pub mod solver;
pub mod states;
pub mod strategy;
pub mod transcript;

pub use bounds::{bound_report, f_of_d, sum_f, variance_bound_check, BoundKind, BoundReport, VarianceReport};
pub use certify::{certified_value, default_mode, solve_value, CertifiedValue, SolvedValue, ValueMode};
pub use counts::{Cell, CountState};
pub use episode::{enumerate_expectation, play_episode, play_replication, EpisodeResult, Expectation};
pub use error::{Error, Result};
pub use exploit::{exploitability, Exploitability};
pub use grid::{make_grid, round_to_grid, Grid, TIE_BREAK};
pub use harness::{run_experiment, solver_sweep, sweep, Arithmetic, ExperimentConfig, SummaryStats, SweepSpec};
pub use matrix::{minimax_equals_maximin_check, solve_matrix_game, GameSolution, MatrixGame, MinimaxCheck};
pub use scalar::{Exact, Scalar};
pub use score::{score_report, PointScore, ScoreReport};
pub use solver::{backward_induction, SolveOptions, ValueTable};
pub use states::{enumerate_states, StateSpace};
pub use strategy::{
    best_response_forecast, rainmaker_prob, ForecasterSpec, MarkovPolicy, MoveOrder, Prob, RainmakerSpec,
};
pub use transcript::{Step, Transcript};

pub type ExactTranscript = Transcript<Exact>;
pub type FloatTranscript = Transcript<f64>;
pub type ExactScoreReport = ScoreReport<Exact>;
pub type FloatScoreReport = ScoreReport<f64>;
pub type ExactEpisode = EpisodeResult<Exact>;
pub type FloatEpisode = EpisodeResult<f64>;
pub type ExactValueTable = ValueTable<Exact>;
pub type FloatValueTable = ValueTable<f64>;
pub type ExactMatrixGame = MatrixGame<Exact>;
pub type FloatMatrixGame = MatrixGame<f64>;


