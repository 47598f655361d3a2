mod common;

use std::sync::Arc;

use circflow::step::{apply_step_units_with, apply_step_with};
use circflow::{
    apply_step, apply_step_units, matrix_product, run_simulation, CirculationMatrix, Execution,
    Schedule, SnapshotContent, SnapshotPolicy, SnapshotTimes, UnitWealth, WealthVector, COLTOL,
};
use common::*;
use proptest::prelude::*;
use rand::Rng;

fn final_only() -> SnapshotPolicy {
    SnapshotPolicy::new(SnapshotTimes::FinalOnly, SnapshotContent::Full)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(120))]

    #[test]
    fn float_step_conserves_total(seed in any::<u64>(), n in 1usize..=256, density in 0.0f64..0.5) {
        let mut r = rng(seed);
        let f = random_matrix(&mut r, n, density);
        let x: Vec<f64> = (0..n).map(|_| r.random::<f64>() * 1e6).collect();
        let x = WealthVector::new(x).unwrap();
        let y = apply_step(&f, &x).unwrap();
        let m = x.total();
        if m > 0.0 {
            prop_assert!((y.total() - m).abs() / m <= n as f64 * 1e-12);
        }
        prop_assert!(y.as_slice().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn integer_step_conserves_exactly(seed in any::<u64>(), n in 1usize..=256, density in 0.0f64..0.5) {
        let mut r = rng(seed);
        let f = random_matrix(&mut r, n, density);
        let x: Vec<u64> = (0..n).map(|_| r.random_range(0..1_000_000_000u64)).collect();
        let x = UnitWealth::new(x).unwrap();
        let y = apply_step_units(&f, &x).unwrap();
        prop_assert_eq!(y.total(), x.total());
        // each column's payout is within one unit of the float payout
        let xf = x.to_f64();
        let yf = apply_step(&f, &xf).unwrap();
        for (a, b) in y.as_slice().iter().zip(yf.as_slice()) {
            prop_assert!((*a as f64 - b).abs() <= n as f64 + 1e-6 * b.abs());
        }
    }

    #[test]
    fn worker_count_is_irrelevant(seed in any::<u64>(), n in 1usize..=256) {
        let mut r = rng(seed);
        let f = random_matrix(&mut r, n, 0.2);
        let x = WealthVector::new(random_wealth(&mut r, n)).unwrap();
        let a = apply_step_with(&f, &x, Execution::Sequential).unwrap();
        let b = apply_step_with(&f, &x, Execution::Parallel).unwrap();
        prop_assert!(a.as_slice().iter().zip(b.as_slice()).all(|(p, q)| p.to_bits() == q.to_bits()));
        let u = UnitWealth::new((0..n as u64).map(|i| i * 997 + 13).collect()).unwrap();
        prop_assert_eq!(
            apply_step_units_with(&f, &u, Execution::Sequential).unwrap(),
            apply_step_units_with(&f, &u, Execution::Parallel).unwrap()
        );
    }

    #[test]
    fn identity_steps_are_neutral(seed in any::<u64>(), n in 1usize..=64, k in 0u64..50) {
        let mut r = rng(seed);
        let x = random_wealth(&mut r, n);
        let id = CirculationMatrix::identity(n).unwrap();
        let y = apply_step(&id, &WealthVector::new(x.clone()).unwrap()).unwrap();
        prop_assert!(y.as_slice().iter().zip(&x).all(|(p, q)| p.to_bits() == q.to_bits()));
        let trace = run_simulation(
            &Schedule::identity(n, k).unwrap(),
            WealthVector::new(x.clone()).unwrap(),
            k,
            &final_only(),
        ).unwrap();
        prop_assert!(trace.final_state.as_slice().iter().zip(&x).all(|(p, q)| p.to_bits() == q.to_bits()));
    }

    #[test]
    fn products_stay_column_stochastic(seed in any::<u64>(), n in 1usize..=32, k in 1usize..=16) {
        let mut r = rng(seed);
        let factors: Vec<_> = (0..k).map(|_| random_matrix(&mut r, n, 0.4)).collect();
        let p = matrix_product(n, &factors).unwrap();
        prop_assert!(p.is_valid());
        prop_assert!(p.validate().max_abs_deviation() <= k as f64 * 1e-12);
    }

    #[test]
    fn two_step_run_matches_product(seed in any::<u64>(), n in 1usize..=24) {
        let mut r = rng(seed);
        let f0 = random_matrix(&mut r, n, 0.5);
        let f1 = random_matrix(&mut r, n, 0.5);
        let x = WealthVector::new(random_wealth(&mut r, n)).unwrap();
        let schedule = Schedule::from_matrices(vec![f0.clone(), f1.clone()]).unwrap();
        let trace = run_simulation(&schedule, x.clone(), 2, &final_only()).unwrap();
        let p = matrix_product(n, [&f0, &f1]).unwrap();
        let direct = apply_step(&p, &x).unwrap();
        prop_assert!(max_abs_diff(trace.final_state.as_slice(), direct.as_slice()) <= 1e-10);
    }

    #[test]
    fn savings_plus_expenses_is_everything(seed in any::<u64>(), n in 1usize..=64) {
        let mut r = rng(seed);
        let f = random_matrix(&mut r, n, 0.3);
        let x = WealthVector::new((0..n).map(|_| r.random::<f64>() * 100.0 + 1e-3).collect()).unwrap();
        for j in 0..n {
            let xj = x.as_slice()[j];
            let s = f.savings_fraction(j).unwrap();
            let e = f.total_expenses(&x, j).unwrap();
            prop_assert!((s + e / xj - 1.0).abs() <= COLTOL);
            prop_assert!((xj - e - s * xj).abs() <= 4.0 * f64::EPSILON * xj);
            prop_assert!((s - f.diagonal(j)).abs() <= COLTOL);
        }
    }
}

#[test]
fn long_identity_padded_run_conserves() {
    let mut r = rng(11);
    let f = Arc::new(random_matrix(&mut r, 50, 0.2));
    let pool = vec![f];
    let slots = (0..500).map(|t| if t % 3 == 0 { None } else { Some(0) });
    let schedule =
        Schedule::from_pool(circflow::ScheduleKind::IdentityPadded, 50, pool, slots).unwrap();
    let x = UnitWealth::new(vec![12_345; 50]).unwrap();
    let trace = run_simulation(&schedule, x, 500, &SnapshotPolicy::default_for(50)).unwrap();
    assert!(trace.drift.iter().all(|&d| d == 0.0));
    assert_eq!(trace.final_state.total(), 12_345 * 50);
}
