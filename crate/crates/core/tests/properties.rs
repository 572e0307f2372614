//! Property-based invariants over seeded random instances.

mod common;

use std::cmp::Ordering;

use proptest::prelude::*;

use bedqsd::decision::{merge_by_strategy, DEFAULT_STRATEGY_CAP};
use bedqsd::random::{random_povm, random_scenario, random_stochastic_map, rng_for};
use bedqsd::transforms::{element_sum, post_process, povm_distance, rank1_refine};
use bedqsd::utility::{
    average_utility_table, lex_compare, log_posterior_utility, max_confidence_utility,
    min_error_utility, mutual_information_utility, score_strategy, StrategyMode, LEX_TOLERANCE,
};
use bedqsd::{Hermitian, ProbabilityTable};

fn small_instance(seed: u64) -> (bedqsd::Scenario, bedqsd::Povm) {
    let mut rng = rng_for(seed, 0);
    let dim = 2 + (seed % 2) as usize;
    let messages = 2 + (seed / 2 % 2) as usize;
    let outcomes = 1 + (seed / 4 % 4) as usize;
    let s = random_scenario(dim, messages, &mut rng);
    let e = random_povm(dim, outcomes, &mut rng);
    (s, e)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lex_order_is_antisymmetric_and_reflexive(
        a in prop::collection::vec(-5.0f64..5.0, 1..4),
        b in prop::collection::vec(-5.0f64..5.0, 1..4),
    ) {
        let n = a.len().min(b.len());
        let (a, b) = (&a[..n], &b[..n]);
        prop_assert_eq!(lex_compare(a, a, LEX_TOLERANCE), Ordering::Equal);
        prop_assert_eq!(lex_compare(a, b, LEX_TOLERANCE), lex_compare(b, a, LEX_TOLERANCE).reverse());
    }

    #[test]
    fn lex_order_is_transitive(
        a in prop::collection::vec(-2i32..2, 3),
        b in prop::collection::vec(-2i32..2, 3),
        c in prop::collection::vec(-2i32..2, 3),
    ) {
        let f = |v: &[i32]| v.iter().map(|&x| x as f64).collect::<Vec<_>>();
        let (a, b, c) = (f(&a), f(&b), f(&c));
        let ab = lex_compare(&a, &b, LEX_TOLERANCE);
        let bc = lex_compare(&b, &c, LEX_TOLERANCE);
        if ab != Ordering::Greater && bc != Ordering::Greater {
            prop_assert_ne!(lex_compare(&a, &c, LEX_TOLERANCE), Ordering::Greater);
        }
    }

    #[test]
    fn post_processing_yields_valid_povms(seed in any::<u64>(), outputs in 1usize..5) {
        let (_, e) = small_instance(seed);
        let mut rng = rng_for(seed, 1);
        let t = random_stochastic_map(outputs, e.len(), &mut rng);
        let out = post_process(&e, &t).unwrap();
        prop_assert_eq!(out.len(), outputs);
        prop_assert!(element_sum(&out).distance(&Hermitian::identity(e.dim())) < 1e-10);
        for a in out.elements() {
            prop_assert!(a.min_eigenvalue() > -1e-10);
        }
    }

    #[test]
    fn post_processing_composes(seed in any::<u64>()) {
        let (_, e) = small_instance(seed);
        let mut rng = rng_for(seed, 2);
        let t1 = random_stochastic_map(3, e.len(), &mut rng);
        let t2 = random_stochastic_map(2, 3, &mut rng);
        let stepwise = post_process(&post_process(&e, &t1).unwrap(), &t2).unwrap();
        let direct = post_process(&e, &t1.then(&t2).unwrap()).unwrap();
        prop_assert!(povm_distance(&stepwise, &direct).unwrap() < 1e-12);
    }

    #[test]
    fn rank1_refinement_reconstructs(seed in any::<u64>()) {
        let (_, e) = small_instance(seed);
        let r = rank1_refine(&e).unwrap();
        for a in r.povm.elements() {
            let spectrum = bedqsd::linalg::spectral_decomposition(a);
            prop_assert!(spectrum.eigenvalues[1..].iter().all(|l| l.abs() < 1e-10));
        }
        let back = post_process(&r.povm, &r.origin_map()).unwrap();
        prop_assert!(povm_distance(&back, &e).unwrap() < 1e-10);
    }

    #[test]
    fn constant_shift_moves_score_by_the_constant(seed in any::<u64>(), c in -3.0f64..3.0) {
        let (s, e) = small_instance(seed);
        let t = ProbabilityTable::new(&s, &e).unwrap();
        let u = log_posterior_utility();
        let base = average_utility_table(&t, &u, StrategyMode::Enumerate, DEFAULT_STRATEGY_CAP).unwrap();
        let moved = average_utility_table(&t, &u.shifted(c), StrategyMode::Enumerate, DEFAULT_STRATEGY_CAP).unwrap();
        prop_assert!((moved.score.first() - base.score.first() - c).abs() < 1e-9);
        prop_assert!(
            (score_strategy(&t, &u, &moved.strategy).first() - base.score.first()).abs() < 1e-9
        );
    }

    #[test]
    fn min_error_average_is_success_probability(seed in any::<u64>()) {
        let (s, e) = small_instance(seed);
        let t = ProbabilityTable::new(&s, &e).unwrap();
        let best = average_utility_table(&t, &min_error_utility(), StrategyMode::Auto, DEFAULT_STRATEGY_CAP).unwrap();
        prop_assert!((best.score.first() - t.success_probability(&best.strategy)).abs() < 1e-12);
        prop_assert!((best.score.first() - common::brute_force_success(&t)).abs() < 1e-12);
    }

    #[test]
    fn max_confidence_average_is_total_confidence(seed in any::<u64>()) {
        let (s, e) = small_instance(seed);
        let t = ProbabilityTable::new(&s, &e).unwrap();
        let best = average_utility_table(&t, &max_confidence_utility(), StrategyMode::Auto, DEFAULT_STRATEGY_CAP).unwrap();
        prop_assert!((best.score.first() - t.total_confidence(&best.strategy)).abs() < 1e-12);
        prop_assert!((best.score.first() - common::brute_force_confidence(&t)).abs() < 1e-12);
    }

    #[test]
    fn mutual_information_is_bounded(seed in any::<u64>()) {
        let (s, e) = small_instance(seed);
        let t = ProbabilityTable::new(&s, &e).unwrap();
        let mi = average_utility_table(&t, &mutual_information_utility(), StrategyMode::Auto, DEFAULT_STRATEGY_CAP)
            .unwrap()
            .score
            .first();
        prop_assert!(mi > -1e-12);
        prop_assert!(mi <= t.prior_entropy() + 1e-12);
        prop_assert!((mi - t.mutual_information()).abs() < 1e-12);
    }

    #[test]
    fn merging_by_strategy_keeps_success(seed in any::<u64>()) {
        let (s, e) = small_instance(seed);
        let t = ProbabilityTable::new(&s, &e).unwrap();
        let g = t.optimal_strategy_min_error();
        let (merged, induced) = merge_by_strategy(&e, &g).unwrap();
        let tm = ProbabilityTable::new(&s, &merged).unwrap();
        prop_assert!((tm.success_probability(&induced) - t.success_probability(&g)).abs() < 1e-12);
    }
}
