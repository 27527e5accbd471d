mod common;

use calgame::bounds::within_main_bound;
use calgame::certify::{default_mode, solve_value, ValueMode};
use calgame::matrix::{fictitious_play, solve_matrix_game};
use calgame::states::DEFAULT_STATE_BUDGET;
use calgame::{
    backward_induction, enumerate_expectation, exploitability, Exact, ForecasterSpec, Grid, MatrixGame, MoveOrder,
    Prob, RainmakerSpec, Scalar, SolveOptions, ValueTable,
};
use common::{q, scores, tree_value};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn full<S: Scalar>(n: u32, t: u32, order: MoveOrder) -> ValueTable<S> {
    backward_induction(&Grid::new(n).unwrap(), t, order, &SolveOptions::default()).unwrap()
}

#[test]
fn count_states_match_history_tree() {
    for n in 1..=2u32 {
        for t in 1..=4u32 {
            for (order, ff) in [(MoveOrder::Simultaneous, false), (MoveOrder::ForecastFirst, true)] {
                let aggregated = full::<Exact>(n, t, order).value;
                assert_eq!(aggregated, tree_value(n as usize, t as usize, ff), "N={n} T={t} {order}");
            }
        }
    }
}

#[test]
fn small_known_values() {
    assert_eq!(full::<Exact>(2, 1, MoveOrder::Simultaneous).value, q(1, 2));
    assert_eq!(full::<Exact>(2, 2, MoveOrder::Simultaneous).value, q(5, 12));
    assert_eq!(full::<Exact>(2, 4, MoveOrder::Simultaneous).value, q(127, 351));
    for t in 1..=16 {
        assert_eq!(full::<Exact>(1, t, MoveOrder::Simultaneous).value, q(1, 2));
    }
}

#[test]
fn forecast_first_never_below_simultaneous() {
    for n in 1..=2u32 {
        for t in 1..=8u32 {
            let sim = full::<Exact>(n, t, MoveOrder::Simultaneous).value;
            let ff = full::<Exact>(n, t, MoveOrder::ForecastFirst).value;
            assert!(ff >= sim, "N={n} T={t}");
        }
    }
    for n in 3..=4u32 {
        for t in 1..=6u32 {
            let sim = full::<f64>(n, t, MoveOrder::Simultaneous).value;
            let ff = full::<f64>(n, t, MoveOrder::ForecastFirst).value;
            assert!(ff >= sim - 1e-9, "N={n} T={t}");
        }
    }
}

#[test]
fn values_respect_main_bound() {
    for n in 1..=2u32 {
        let grid = Grid::new(n).unwrap();
        for t in 1..=16u32 {
            let order = MoveOrder::Simultaneous;
            let v = solve_value(&grid, t, order, default_mode(n, t, order), DEFAULT_STATE_BUDGET, false).unwrap();
            assert!(v.within_bound, "N={n} T={t}");
            assert!(within_main_bound(v.upper.as_ref().unwrap(), n, t as u64));
        }
    }
    for n in 3..=4u32 {
        for t in [1u32, 4, 8] {
            let v = full::<f64>(n, t, MoveOrder::Simultaneous);
            assert!(v.value <= v.bound() + 1e-9, "N={n} T={t}");
        }
    }
}

#[test]
fn terminal_layer_holds_scores() {
    let table = full::<Exact>(2, 5, MoveOrder::Simultaneous);
    let space = table.space.as_ref().unwrap();
    let values = table.values.as_ref().unwrap();
    let last = space.layer(5);
    for (i, state) in last.states().iter().enumerate() {
        // Any transcript with these counts has this score.
        let mut steps = Vec::new();
        for (k, cell) in state.cells().iter().enumerate() {
            for j in 0..cell.uses {
                steps.push((j < cell.rain, k, None));
            }
        }
        assert_eq!(values[5][i], scores(&steps, 2).0);
    }
}

#[test]
fn extracted_strategies_are_saddle() {
    for t in 1..=6u32 {
        for order in [MoveOrder::Simultaneous, MoveOrder::ForecastFirst] {
            let e = exploitability(&full::<Exact>(2, t, order)).unwrap();
            assert_eq!(e.rainmaker_gain, q(0, 1), "T={t} {order}");
            assert_eq!(e.forecaster_gain, q(0, 1), "T={t} {order}");
        }
    }
    for n in 3..=4u32 {
        let e = exploitability(&full::<f64>(n, 6, MoveOrder::Simultaneous)).unwrap();
        assert!(e.rainmaker_gain.abs() <= 1e-9 && e.forecaster_gain.abs() <= 1e-9, "N={n}");
    }
}

#[test]
fn solved_forecaster_caps_every_rainmaker() {
    let table = full::<Exact>(2, 6, MoveOrder::Simultaneous);
    let fore = table.forecaster_spec().unwrap();
    let grid = Grid::new(2).unwrap();
    let rainmakers = [
        RainmakerSpec::Iid { p: Prob::new(q(1, 2)).unwrap() },
        RainmakerSpec::Iid { p: Prob::new(q(1, 1)).unwrap() },
        RainmakerSpec::Iid { p: Prob::new(q(1, 3)).unwrap() },
        RainmakerSpec::GapChaser,
        RainmakerSpec::Playback {
            probs: [0, 1, 1, 0, 1, 0].iter().map(|&x| Prob::new(q(x, 1)).unwrap()).collect(),
        },
    ];
    for rain in rainmakers {
        let e = enumerate_expectation::<Exact>(&rain, &fore, &grid, 6, MoveOrder::Simultaneous).unwrap();
        assert!(e.k_score <= table.value, "{rain:?}");
    }
    // The constant forecaster does no better than the value against its
    // worst case.
    let constant = ForecasterSpec::Constant { d: Prob::new(q(1, 4)).unwrap() };
    let e = enumerate_expectation::<Exact>(&RainmakerSpec::GapChaser, &constant, &grid, 6, MoveOrder::Simultaneous)
        .unwrap();
    assert!(e.k_score >= table.value);
}

#[test]
fn float_and_exact_agree() {
    for t in 1..=8u32 {
        for order in [MoveOrder::Simultaneous, MoveOrder::ForecastFirst] {
            let e = full::<Exact>(2, t, order).value.to_f64();
            let f = full::<f64>(2, t, order).value;
            assert!((e - f).abs() < 1e-12, "T={t} {order}");
        }
    }
}

#[test]
fn certified_bracket_is_tight() {
    let grid = Grid::new(2).unwrap();
    for t in [11u32, 14, 16] {
        let v = solve_value(&grid, t, MoveOrder::Simultaneous, ValueMode::Certified, DEFAULT_STATE_BUDGET, false).unwrap();
        let (lo, hi) = (v.lower.clone().unwrap(), v.upper.clone().unwrap());
        assert!(lo <= hi);
        assert!((&hi - &lo).to_f64() < 1e-9);
        assert!(lo.to_f64() - 1e-12 <= v.value && v.value <= hi.to_f64() + 1e-12);
    }
}

#[test]
fn budget_is_enforced_before_work() {
    let grid = Grid::new(30).unwrap();
    let opts = SolveOptions {
        state_budget: 1_000,
        keep_tables: true,
    };
    let err = backward_induction::<f64>(&grid, 40, MoveOrder::Simultaneous, &opts).unwrap_err();
    assert!(err.is_resource());
}

#[test]
fn fictitious_play_brackets_value() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let cols = rng.random_range(1..=5);
        let payoff: Vec<Exact> = (0..2 * cols).map(|_| q(rng.random_range(-20..=20), rng.random_range(1..=6))).collect();
        let game = MatrixGame::new(2, cols, payoff).unwrap();
        let v = solve_matrix_game(&game).value.to_f64();
        let fp = fictitious_play(&game, 20_000);
        assert!(fp.lower <= v + 1e-12 && v <= fp.upper + 1e-12);
        assert!(fp.upper - fp.lower < 0.2);
    }
}
