mod common;

use common::*;
use ecs_core::barcode::ecs;
use ecs_core::reconstruct::{reconstruct, solve_single, solve_two, EcsView, ReconstructError};
use ecs_core::Barcode;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn reconstruct_inverts_ecs(f in barcode_strategy(8)) {
        let e = ecs(&f, None).unwrap();
        let back = reconstruct(&e).unwrap();
        prop_assert_eq!(&back, &f);
        prop_assert_eq!(ecs(&back, None).unwrap(), e);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn single_lifespan_solver(births in prop::collection::vec(rational_in(-8, 8), 0..8), l in positive_rational(8)) {
        let f = Barcode::from_pairs(births.into_iter().map(|a| (a, l.clone()))).unwrap();
        let c = f.critical_series();
        let back = solve_single(&c, &l).unwrap();
        prop_assert_eq!(back.critical_series(), c);
        prop_assert_eq!(back, f);
    }

    #[test]
    fn two_lifespan_solver(
        births in prop::collection::vec(rational_in(-8, 8), 1..8),
        odd_birth in rational_in(-8, 8),
        l in positive_rational(8),
        odd in positive_rational(8),
    ) {
        prop_assume!(l != odd);
        let n = births.len() + 1;
        let f = Barcode::from_pairs(
            births.into_iter().map(|a| (a, l.clone())).chain([(odd_birth, odd.clone())]),
        )
        .unwrap();
        let back = solve_two(&f.critical_series(), &l, &odd, &f.drift(), n).unwrap();
        prop_assert_eq!(back, f);
    }
}

#[test]
fn special_case_branches() {
    // n = 1
    let f = Barcode::from_pairs([(q(-5, 3), q(7, 2))]).unwrap();
    assert_eq!(reconstruct(&ecs(&f, None).unwrap()).unwrap(), f);
    // m = n - 1, tail drift 1
    let f = bc(&[(0, 1), (2, 1), (1, 3)]);
    assert_eq!(reconstruct(&ecs(&f, None).unwrap()).unwrap(), f);
    // three distinct lifespan classes, recursion two levels deep
    let f = bc(&[(0, 1), (4, 1), (2, 2), (-1, 2), (3, 5), (3, 5)]);
    assert_eq!(reconstruct(&ecs(&f, None).unwrap()).unwrap(), f);
    // tied lifespans above the minimum inside g
    let f = bc(&[(0, 1), (1, 3), (5, 3), (2, 3)]);
    assert_eq!(reconstruct(&ecs(&f, None).unwrap()).unwrap(), f);
}

#[test]
fn sub_problem_uses_tail_birth_series() {
    // For f = x^a1 y^l + x^a2 y^l2 the split reading B(f)^(p-i) would
    // predict an extra x^(2 a1) term in C(f^2); the tail reading does not.
    let f = bc(&[(3, 1), (7, 4)]);
    let e = ecs(&f, None).unwrap();
    let view = EcsView::from_series(&e).unwrap();
    let short = xs(&[(1, 3)]);
    let tail = xs(&[(1, 7)]);
    let whole = &short + &tail;
    let one_minus = ecs_core::FormalSum::one_minus_x_pow(q(1, 1));
    let with_tail = view.power(2) - &(&one_minus * &(&(&short * &tail) + &ecs_core::barcode::series_exterior_power(&short, 2).unwrap()));
    let with_whole = view.power(2) - &(&one_minus * &(&(&short * &whole) + &ecs_core::barcode::series_exterior_power(&short, 2).unwrap()));
    assert!(with_tail.is_zero());
    assert!(!with_whole.is_zero());
    assert_eq!(reconstruct(&e).unwrap(), f);
}

#[test]
fn deterministic_across_threads() {
    let corpus: Vec<Barcode> = (0..40)
        .map(|i| bc(&[(i % 5, 1 + i % 3), (2 - i % 4, 2), (i % 7 - 3, 1 + i % 4), (1, 1 + i % 2)]))
        .collect();
    let sequential: Vec<Barcode> = corpus
        .iter()
        .map(|f| reconstruct(&ecs(f, None).unwrap()).unwrap())
        .collect();
    let handles: Vec<_> = corpus
        .chunks(10)
        .map(|chunk| {
            let chunk = chunk.to_vec();
            std::thread::spawn(move || {
                chunk
                    .iter()
                    .map(|f| reconstruct(&ecs(f, None).unwrap()).unwrap())
                    .collect::<Vec<_>>()
            })
        })
        .collect();
    let threaded: Vec<Barcode> = handles.into_iter().flat_map(|h| h.join().unwrap()).collect();
    assert_eq!(sequential, threaded);
    assert_eq!(sequential, corpus);
}

#[test]
fn mutated_series_are_rejected() {
    let f = bc(&[(0, 1), (2, 1), (1, 3), (-2, 2)]);
    let e = ecs(&f, None).unwrap();
    let terms: Vec<_> = e.iter().map(|(k, c)| (k.clone(), c.clone())).collect();
    for (key, c) in &terms {
        let mut bumped = e.clone();
        bumped.add_term(key.clone(), q(1, 1));
        let mut dropped = e.clone();
        dropped.add_term(key.clone(), -c.clone());
        let mut flipped = e.clone();
        flipped.add_term(key.clone(), -(c + c));
        for bad in [bumped, dropped, flipped] {
            assert!(matches!(reconstruct(&bad), Err(ReconstructError::Malformed { .. })));
        }
    }
}
