//! Randomized property suite (proptest drives the seeds; instance
//! generation reuses the seeded generators from `common`).

mod common;

use proptest::prelude::*;

use pomdp_limavg::bits::Mask64;
use pomdp_limavg::format::{parse_pomdp, parse_strategy, serialize_pomdp, serialize_strategy};
use pomdp_limavg::model::Distribution;
use pomdp_limavg::sim::simulate;
use pomdp_limavg::{belief_update, Belief};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// serialize -> parse is the identity up to sub-tolerance rounding.
    #[test]
    fn model_round_trip(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let model = common::random_pomdp(&mut rng, 5, 3, 3, 0.5);
        let back: pomdp_limavg::Pomdp<f64> =
            parse_pomdp(&serialize_pomdp(&model)).expect("round trip parses");
        prop_assert_eq!(&back.states, &model.states);
        prop_assert_eq!(&back.actions, &model.actions);
        prop_assert_eq!(&back.obs_of, &model.obs_of);
        prop_assert_eq!(back.initial, model.initial);
        for s in 0..model.state_count() {
            for a in 0..model.action_count() {
                let x = &back.transition[s][a];
                let y = &model.transition[s][a];
                prop_assert_eq!(x.entries().len(), y.entries().len());
                for (ex, ey) in x.entries().iter().zip(y.entries()) {
                    prop_assert_eq!(ex.0, ey.0);
                    prop_assert!((ex.1 - ey.1).abs() < 1e-9);
                }
            }
        }
    }

    /// strategy serialize -> parse is the identity up to rounding.
    #[test]
    fn strategy_round_trip(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let model = common::random_pomdp(&mut rng, 4, 3, 3, 0.5);
        let sigma = common::random_strategy(&mut rng, &model, 4);
        let back = parse_strategy(&serialize_strategy(&model, &sigma), &model)
            .expect("round trip parses");
        prop_assert_eq!(&back.memory, &sigma.memory);
        prop_assert_eq!(back.initial_memory, sigma.initial_memory);
        for m in 0..sigma.memory.len() {
            for (ex, ey) in back.next_action[m].entries().iter().zip(sigma.next_action[m].entries()) {
                prop_assert_eq!(ex.0, ey.0);
                prop_assert!((ex.1 - ey.1).abs() < 1e-9);
            }
            for o in 0..model.observation_count() {
                for a in 0..model.action_count() {
                    let x = &back.update[m][o][a];
                    let y = &sigma.update[m][o][a];
                    prop_assert_eq!(x.entries().len(), y.entries().len());
                    for (ex, ey) in x.entries().iter().zip(y.entries()) {
                        prop_assert_eq!(ex.0, ey.0);
                        prop_assert!((ex.1 - ey.1).abs() < 1e-9);
                    }
                }
            }
        }
    }

    /// Belief updates are monotone in the belief and contained in the
    /// observation class.
    #[test]
    fn belief_monotone_and_contained(seed in any::<u64>(), raw_small in any::<u64>(), raw_extra in any::<u64>()) {
        let mut rng = common::rng(seed);
        let model = common::random_pomdp(&mut rng, 6, 2, 3, 0.5);
        let full = Mask64::full(model.state_count());
        let small = Mask64::from_bits(raw_small & full.bits());
        prop_assume!(!small.is_empty());
        let big = small.union(Mask64::from_bits(raw_extra & full.bits()));
        for a in 0..model.action_count() {
            for o in 0..model.observation_count() {
                let up_small = belief_update(&model, Belief(small), a, o).unwrap();
                let up_big = belief_update(&model, Belief(big), a, o).unwrap();
                if let Some(bs) = up_small {
                    prop_assert!(bs.0.is_subset(model.obs_class(o)));
                    let bb = up_big.expect("update of a superset is possible");
                    prop_assert!(bs.0.is_subset(bb.0));
                }
            }
        }
    }

    /// Distributions reject sums off by more than the tolerance.
    #[test]
    fn distribution_sum_check(p in 0.0f64..1.5) {
        let r = Distribution::<f64>::new(vec![(0, p), (1, 0.5)]);
        if (p + 0.5 - 1.0).abs() > 1e-9 {
            prop_assert!(r.is_err());
        } else {
            prop_assert!(r.is_ok());
        }
    }

    /// Simulation is bit-identical for equal seeds and model inputs.
    #[test]
    fn simulation_deterministic(seed in any::<u64>(), sim_seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let model = common::random_pomdp(&mut rng, 4, 2, 2, 0.5);
        let sigma = common::random_strategy(&mut rng, &model, 2);
        let a = simulate(&model, &sigma, 500, sim_seed).unwrap();
        let b = simulate(&model, &sigma, 500, sim_seed).unwrap();
        prop_assert_eq!(a.empirical_average.to_bits(), b.empirical_average.to_bits());
        prop_assert_eq!(a.visit_counts, b.visit_counts);
    }

    /// The subset helpers enumerate exactly the advertised families.
    #[test]
    fn mask_enumeration(bits in 0u64..256) {
        let m = Mask64::from_bits(bits);
        let subs = m.nonempty_subsets();
        let expected = (1usize << m.len()).saturating_sub(1);
        prop_assert_eq!(subs.len(), expected);
        for s in &subs {
            prop_assert!(!s.is_empty());
            prop_assert!(s.is_subset(m));
        }
        let forced = Mask64::from_bits(bits & 0b1010_1010);
        let sups = m.supersets_within(forced.intersect(m));
        for s in &sups {
            prop_assert!(forced.intersect(m).is_subset(*s));
            prop_assert!(s.is_subset(m));
        }
        prop_assert_eq!(sups.len(), 1usize << m.minus(forced).len());
    }
}
