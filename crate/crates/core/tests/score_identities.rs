mod common;

use calgame::{score_report, Exact, Grid, Step, Transcript};
use common::{nearest, point, q, scores};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

type Raw = (bool, usize, Option<Exact>);

fn library_scores(steps: &[Raw], n: u32) -> calgame::ScoreReport<Exact> {
    let grid = Grid::new(n).unwrap();
    let transcript = Transcript::from_steps(
        steps
            .iter()
            .map(|(rain, forecast, prob)| Step {
                rain: *rain,
                forecast: *forecast,
                prob: prob.clone(),
            })
            .collect(),
    )
    .unwrap();
    score_report(&transcript, &grid).unwrap()
}

fn check_identities(steps: &[Raw], n: u32) -> Result<(), TestCaseError> {
    let report = library_scores(steps, n);
    let t = q(steps.len() as i64, 1);
    let (k, k_sq, k_tilde) = scores(steps, n as usize);

    let usage: u64 = report.per_point.iter().map(|p| p.count).sum();
    prop_assert_eq!(usage, steps.len() as u64);
    let from_gaps = report.per_point.iter().fold(Exact::zero(), |acc, p| acc + p.gap.abs()) / &t;
    prop_assert_eq!(&report.k_score, &from_gaps);
    prop_assert_eq!(&report.k_score, &k);
    prop_assert_eq!(&report.k_sq_score, &k_sq);
    prop_assert_eq!(&report.k_tilde, &k_tilde);
    prop_assert!(&report.k_score * &report.k_score <= report.k_sq_score);
    prop_assert!(report.k_sq_score <= report.k_score);
    Ok(())
}

fn rounded_steps() -> impl Strategy<Value = (u32, Vec<Raw>)> {
    (1u32..=8).prop_flat_map(|n| {
        let step = (any::<bool>(), 0i64..=840).prop_map(move |(rain, num)| {
            let p = q(num, 840);
            (rain, nearest(&p, n as usize), Some(p))
        });
        (Just(n), prop::collection::vec(step, 1..40))
    })
}

fn free_steps() -> impl Strategy<Value = (u32, Vec<Raw>)> {
    (1u32..=8, any::<bool>()).prop_flat_map(|(n, with_p)| {
        let step = (any::<bool>(), 0..n as usize, 0i64..=100).prop_map(move |(rain, c, num)| (rain, c, with_p.then(|| q(num, 100))));
        (Just(n), prop::collection::vec(step, 1..40))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn identities_with_rounded_forecasts((n, steps) in rounded_steps()) {
        check_identities(&steps, n)?;
        let report = library_scores(&steps, n);
        let k_tilde = report.k_tilde.clone().unwrap();
        prop_assert!((&report.k_score - &k_tilde).abs() <= q(1, 2 * n as i64));
        let grid = Grid::new(n).unwrap();
        for (_, c, p) in &steps {
            let p = p.as_ref().unwrap();
            prop_assert_eq!(grid.round_index(p).unwrap(), *c);
            prop_assert!((p - point(*c, n as usize)).abs() <= q(1, 2 * n as i64));
        }
    }

    #[test]
    fn identities_with_arbitrary_forecasts((n, steps) in free_steps()) {
        check_identities(&steps, n)?;
    }
}

#[test]
fn constant_all_rain_example() {
    // Forecasting 1/2 every period against constant rain: |T - T/2|/T.
    let steps: Vec<Raw> = (0..6).map(|_| (true, 0, None)).collect();
    let report = library_scores(&steps, 1);
    assert_eq!(report.k_score, q(1, 2));
    assert_eq!(report.k_sq_score, q(1, 4));
}
