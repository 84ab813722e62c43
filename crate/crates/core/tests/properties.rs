//! Invariant suite: structural identities that must hold exactly for
//! every instance, checked over randomized families.

mod common;

use common::*;
use gtp_core::*;
use num::{One, Signed, Zero};
use proptest::prelude::*;
use rand::Rng as _;

fn stake_rule(levels: Vec<i64>) -> impl Fn(usize, &NodeKey) -> Stake {
    move |round: usize, key: &NodeKey| {
        let base = levels[(round - 1) % levels.len()];
        Quantity::Scalar(rat(base + i64::from(key.count(1)), 2))
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    // Flipping every stake flips the whole capital trace.
    #[test]
    fn trace_negation_symmetry(
        num in 1i64..4,
        den in 4i64..8,
        levels in proptest::collection::vec(-3i64..=3, 1..4),
        bits in 0u32..32,
    ) {
        let n = 4;
        let spec = GameSpec::rescaled(rat(num, den), n).unwrap();
        let path: Vec<usize> = (0..n).map(|i| ((bits >> i) & 1) as usize).collect();
        let rule = stake_rule(levels.clone());
        let neg = move |round: usize, key: &NodeKey| match rule(round, key) {
            Quantity::Scalar(m) => Quantity::Scalar(-m),
            Quantity::Vector(v) => Quantity::Vector(v.into_iter().map(|m| -m).collect()),
        };
        let rule = stake_rule(levels);
        let plus = run_game(&spec, &rule, &path).unwrap();
        let minus = run_game(&spec, &neg, &path).unwrap();
        for (a, b) in plus.values.iter().zip(minus.values.iter()) {
            prop_assert_eq!(a.clone(), -b.clone());
        }
    }

    // Offset games and their unit-move rescalings price identically and
    // produce identical capital traces path by path.
    #[test]
    fn rescaling_equivalence(
        a_num in 1i64..5, a_den in 1i64..4,
        b_num in 1i64..5, b_den in 1i64..4,
        n in 1usize..5,
        k in 0usize..3,
        levels in proptest::collection::vec(-2i64..=2, 1..3),
    ) {
        let spec = GameSpec::biased_coin(rat(a_num, a_den), rat(b_num, b_den), n).unwrap();
        let rescaled = affine_rescale(&spec).unwrap();
        let payoff = Payoff::power(k);
        let unit_payoff = rescaled.payoff_to_unit(&payoff);

        let original = backward_induct(&spec, &payoff).unwrap();
        let unit = backward_induct(&rescaled.game, &unit_payoff).unwrap();
        prop_assert_eq!(original.initial_price(), unit.initial_price());

        let base = stake_rule(levels.clone());
        let scaled_base = stake_rule(levels);
        let scale = rescaled.scale.clone();
        let mapped = move |round: usize, key: &NodeKey| match scaled_base(round, key) {
            Quantity::Scalar(m) => Quantity::Scalar(m * &scale),
            v => v,
        };
        for bits in 0..(1u32 << n) {
            let path: Vec<usize> = (0..n).map(|i| ((bits >> i) & 1) as usize).collect();
            let offset_trace = run_game(&spec, &base, &path).unwrap();
            let unit_trace = run_game(&rescaled.game, &mapped, &path).unwrap();
            prop_assert_eq!(&offset_trace.values, &unit_trace.values);
        }
    }

    // Pricing is linear in the payoff.
    #[test]
    fn pricing_linearity(
        seed in 0u64..1u64 << 32,
        a_num in -3i64..=3, b_num in -3i64..=3,
        p_num in 0i64..=6,
        n in 1usize..5,
    ) {
        let spec = GameSpec::rescaled(rat(p_num, 6), n).unwrap();
        let mut r = rng(seed);
        let eta1 = random_table_payoff(&mut r, &spec);
        let eta2 = random_table_payoff(&mut r, &spec);
        let (a, b) = (rat(a_num, 2), rat(b_num, 3));
        let combined = Payoff::combine(a.clone(), &eta1, b.clone(), &eta2);
        let p1 = backward_induct(&spec, &eta1).unwrap().initial_price().clone();
        let p2 = backward_induct(&spec, &eta2).unwrap().initial_price().clone();
        let pc = backward_induct(&spec, &combined).unwrap().initial_price().clone();
        prop_assert_eq!(pc, a * p1 + b * p2);
    }

    // Every interior node is the fair-weight average of its children.
    #[test]
    fn martingale_property(
        seed in 0u64..1u64 << 32,
        family in 0usize..3,
        n in 1usize..6,
    ) {
        let mut r = rng(seed);
        let spec = match family {
            0 => {
                let nu1 = r.gen_range(0..=6u64);
                let nu2 = r.gen_range(0..=6u64).max((n as u64).saturating_sub(nu1));
                GameSpec::urn(nu1, nu2, n).unwrap()
            }
            1 => GameSpec::polya_urn(r.gen_range(1..=4), r.gen_range(1..=4), r.gen_range(0..=3), n)
                .unwrap(),
            _ => {
                let q = random_pmf_weights(&mut r, n);
                GameSpec::staircase(&q).unwrap().0
            }
        };
        let payoff = random_table_payoff(&mut r, &spec);
        let lattice = backward_induct(&spec, &payoff).unwrap();
        for round in 0..spec.horizon() {
            for (key, value) in lattice.layer(round) {
                let view = spec.round(round + 1, key).unwrap();
                let weights = view.weights.clone().unwrap();
                let mut acc = Rat::zero();
                for (i, w) in weights.iter().enumerate() {
                    if w.is_zero() { continue; }
                    acc += w * lattice.value(round + 1, &key.child(i)).unwrap();
                }
                prop_assert_eq!(value, &(acc / view.growth));
            }
        }
    }

    // The standard forecasters only ever quote admissible or forced
    // prices, so their games are coherent.
    #[test]
    fn forecaster_games_are_coherent(
        seed in 0u64..1u64 << 32,
        family in 0usize..4,
        n in 1usize..7,
    ) {
        let mut r = rng(seed);
        let spec = match family {
            0 => {
                let nu1 = r.gen_range(0..=8u64);
                let nu2 = r.gen_range(0..=8u64).max((n as u64).saturating_sub(nu1));
                GameSpec::urn(nu1, nu2, n).unwrap()
            }
            1 => GameSpec::polya_urn(r.gen_range(1..=5), r.gen_range(1..=5), r.gen_range(0..=3), n).unwrap(),
            2 => {
                let q = random_pmf_weights(&mut r, n);
                GameSpec::staircase(&q).unwrap().0
            }
            _ => {
                let joint = random_bivariate(&mut r, 2);
                let horizon = (max_support_sum(&joint) + 2) as usize;
                GameSpec::chained(&joint, horizon).unwrap()
            }
        };
        prop_assert!(coherence_check(&spec).unwrap().is_coherent());
        for (round, layer) in spec.reachable_layers().unwrap().iter().enumerate().take(spec.horizon()) {
            for key in layer {
                let price = spec.price_at(round + 1, key);
                let verdict = validate_forecast(&price, spec.moves());
                let is_arb = matches!(verdict, ForecastValidation::Arbitrage { .. });
                prop_assert!(!is_arb);
            }
        }
    }

    // Path weights of the urn game telescope into falling factorials.
    #[test]
    fn urn_telescoping(nu1 in 0u64..=6, nu2 in 0u64..=6, n_raw in 1usize..=8) {
        prop_assume!(nu1 + nu2 >= 1);
        let n = n_raw.min((nu1 + nu2) as usize);
        let spec = GameSpec::urn(nu1, nu2, n).unwrap();
        let falling = |x: u64, k: u64| -> Rat {
            let mut acc = Rat::one();
            for i in 0..k {
                acc *= int(x as i64 - i as i64);
            }
            acc
        };
        for (path, weight) in enumerate_paths(&spec, DEFAULT_PATH_CAP).unwrap() {
            let m = path.moves().iter().filter(|&&i| i == 1).count() as u64;
            let expected = falling(nu1, m) * falling(nu2, n as u64 - m)
                / falling(nu1 + nu2, n as u64);
            prop_assert_eq!(weight, expected);
        }
    }

    // Exactly one admissible path per positive-mass support point, with
    // the target weight, climbing first and then frozen.
    #[test]
    fn staircase_uniqueness(seed in 0u64..1u64 << 32, n in 1usize..9) {
        let mut r = rng(seed);
        let q = random_pmf_weights(&mut r, n);
        let (spec, st) = GameSpec::staircase(&q).unwrap();
        let paths = enumerate_paths(&spec, DEFAULT_PATH_CAP).unwrap();
        let positive: Vec<usize> = st.pmf().iter().enumerate()
            .filter(|(_, w)| w.is_positive())
            .map(|(m, _)| m)
            .collect();
        prop_assert_eq!(paths.len(), positive.len());
        for (path, weight) in &paths {
            let m = path.moves().iter().filter(|&&i| i == 1).count();
            prop_assert!(positive.contains(&m));
            prop_assert_eq!(weight, &st.pmf()[m]);
            let expected: Vec<usize> = (0..spec.horizon()).map(|i| usize::from(i < m)).collect();
            prop_assert_eq!(path.moves(), &expected[..]);
        }
    }

    // Rebuilding the mass function from its tail ratios is the identity
    // on trimmed distributions.
    #[test]
    fn tail_ratio_reconstruction(seed in 0u64..1u64 << 32, n in 0usize..10) {
        let mut r = rng(seed);
        let q = random_pmf_weights(&mut r, n);
        let st = tail_ratios(&q).unwrap();
        prop_assert_eq!(st.reconstructed_pmf(), st.pmf().to_vec());
        for m in 1..=st.top() {
            let ratio = st.ratio(m);
            prop_assert!(!ratio.is_negative() && ratio <= Rat::one());
        }
    }

    // Enumerated path weights always sum to exactly one.
    #[test]
    fn weights_sum_to_one(seed in 0u64..1u64 << 32, family in 0usize..4, n in 1usize..6) {
        let mut r = rng(seed);
        let spec = match family {
            0 => GameSpec::rescaled(rat(r.gen_range(0..=4), 4), n).unwrap(),
            1 => GameSpec::polya_urn(r.gen_range(1..=4), r.gen_range(1..=4), r.gen_range(0..=2), n).unwrap(),
            2 => {
                let d = r.gen_range(2..=4);
                let p = random_simplex(&mut r, d);
                GameSpec::multilabel_constant(p, n).unwrap()
            }
            _ => CrrSpec::new(int(4), int(2), rat(1, 2), rat(5, 4), n).unwrap().game(),
        };
        let total: Rat = enumerate_paths(&spec, DEFAULT_PATH_CAP).unwrap()
            .into_iter()
            .map(|(_, w)| w)
            .sum();
        prop_assert_eq!(total, Rat::one());
    }

    // Upper dominates lower, and both are monotone in the payoff.
    #[test]
    fn bounds_order_and_monotonicity(seed in 0u64..1u64 << 32, incomplete in proptest::bool::ANY, n in 1usize..4) {
        let mut r = rng(seed);
        let spec = if incomplete {
            GameSpec::scalar_set(vec![int(0), int(1), int(2)], rat(r.gen_range(1..=7), 4), n).unwrap()
        } else {
            GameSpec::rescaled(rat(r.gen_range(0..=4), 4), n).unwrap()
        };
        let eta1 = random_table_payoff(&mut r, &spec);
        let bump = random_table_payoff(&mut r, &spec);
        // eta2 = eta1 + |bump| >= eta1 pointwise
        let bump2 = bump.clone();
        let eta1c = eta1.clone();
        let eta2 = Payoff::from_result_fn(move |s| {
            Ok(eta1c.eval(s)? + bump2.eval(s)?.abs())
        });
        let b1 = upper_lower(&spec, &eta1).unwrap();
        let b2 = upper_lower(&spec, &eta2).unwrap();
        prop_assert!(b1.upper >= b1.lower);
        prop_assert!(b2.upper >= b2.lower);
        prop_assert!(b2.upper >= b1.upper);
        prop_assert!(b2.lower >= b1.lower);
    }
}

// The recombining lattice and raw path enumeration agree at depth 12.
#[test]
fn lattice_oracle_equivalence_depth_12() {
    let cases: Vec<(GameSpec, Payoff)> = vec![
        (GameSpec::rescaled(rat(1, 3), 12).unwrap(), Payoff::power(2)),
        (GameSpec::urn(7, 6, 12).unwrap(), Payoff::identity()),
    ];
    for (spec, payoff) in cases {
        let lattice = backward_induct(&spec, &payoff).unwrap();
        let mut acc = Rat::zero();
        for (path, w) in enumerate_paths(&spec, DEFAULT_PATH_CAP).unwrap() {
            let terminal = path.terminal_key(&spec);
            acc += w * payoff.eval(&spec.state_value(&terminal)).unwrap();
        }
        assert_eq!(&acc, lattice.initial_price());
    }
}

// Chaining extends past two coordinates: trivariate targets (three
// active labels plus the slack) come back exactly, and their plans
// replicate and pin both expected values.
#[test]
fn chained_trivariate_targets() {
    let mut r = rng(0x3d4);
    for trial in 0..10 {
        let mut total = 0i64;
        let mut raw = Vec::new();
        for m1 in 0..=2i64 {
            for m2 in 0..=2i64 {
                for m3 in 0..=1i64 {
                    let w = r.gen_range(0..=2);
                    total += w;
                    raw.push((vec![m1, m2, m3], w));
                }
            }
        }
        if total == 0 {
            continue;
        }
        let joint = Pmf::new(
            raw.into_iter()
                .map(|(pt, w)| (PmfPoint::Vector(pt), rat(w, total)))
                .collect(),
        )
        .unwrap();
        let horizon = (max_support_sum(&joint) + 3) as usize;
        let spec = GameSpec::chained(&joint, horizon).unwrap();
        let stat = |key: &NodeKey| {
            PmfPoint::Vector(
                (0..3)
                    .map(|i| i64::from(key.count(i)))
                    .collect::<Vec<i64>>(),
            )
        };
        let derived = pmf_by_enumeration(&spec, &stat, DEFAULT_PATH_CAP).unwrap();
        assert_eq!(derived, joint, "trial {trial}");

        let payoff = random_table_payoff(&mut r, &spec);
        let lattice = backward_induct(&spec, &payoff).unwrap();
        let plan = delta_hedge(&lattice, &spec).unwrap();
        assert!(verify_replication(&plan, &spec, &payoff).unwrap().ok());
        assert!(matches!(
            check_proposition_a1(&spec, &payoff, &plan).unwrap(),
            ReplicationPricing::Confirmed { .. }
        ));
    }
}

// Table payoffs must cover every reachable terminal state.
#[test]
fn partial_payoff_tables_are_rejected() {
    let spec = GameSpec::rescaled(rat(1, 2), 2).unwrap();
    let mut table = std::collections::BTreeMap::new();
    table.insert(Quantity::Scalar(int(0)), int(1));
    let payoff = Payoff::table(table);
    assert!(matches!(
        backward_induct(&spec, &payoff),
        Err(Error::PayoffUndefined { .. })
    ));
}
