mod common;

use proptest::prelude::*;
use proptest::test_runner::RngSeed;

use l2mult_core::runner::seed_from_env;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 200, rng_seed: RngSeed::Fixed(seed_from_env()), ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn rank_plus_nullity(seed in any::<u64>()) {
        prop_assert_eq!(common::prop_rank_nullity(seed), Ok(()));
    }

    #[test]
    fn moment_identity(seed in any::<u64>()) {
        prop_assert_eq!(common::prop_moments(seed), Ok(()));
    }

    #[test]
    fn pullback_of_spectral_measures(seed in any::<u64>()) {
        prop_assert_eq!(common::prop_pullback(seed), Ok(()));
    }

    #[test]
    fn sum_rule(seed in any::<u64>()) {
        prop_assert_eq!(common::prop_sum_rule(seed), Ok(()));
    }

    #[test]
    fn action_commutes_with_boundary(seed in any::<u64>()) {
        prop_assert_eq!(common::prop_commutation(seed), Ok(()));
    }

    #[test]
    fn orbifold_euler_characteristic(seed in any::<u64>()) {
        prop_assert_eq!(common::prop_orbifold_euler(seed), Ok(()));
    }

    #[test]
    fn frobenius_reciprocity(seed in any::<u64>()) {
        prop_assert_eq!(common::prop_frobenius(seed), Ok(()));
    }

    #[test]
    fn rational_format_round_trip(n in -10_000i64..10_000, d in 1i64..10_000) {
        let q = l2mult_core::rational::frac(n, d);
        prop_assert_eq!(l2mult_core::rational::parse_rational(&q.to_string()).unwrap(), q);
    }
}
