use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use weakrp::afriat::{
    afriat_numbers, pairwise_numbers, pairwise_numbers_unchecked, strict_afriat_numbers, w_numbers,
    StrictParams,
};
use weakrp::axioms::{self, check, Axiom};
use weakrp::counterfactual::{in_wdemand, milp_feasible, wdemand_box, CounterfactualQuery, MilpOptions, Slot};
use weakrp::game::solve_matrix_game;
use weakrp::maximin::LocalUtilityFamily;
use weakrp::quasilinear::{
    check_theorem_d_feasibility, ql_pairwise_numbers, quasilinear_numbers, theorem_d_violation, QlPreference,
};
use weakrp::random::{generate, Family};
use weakrp::{transitive_closure, Dataset, RelationMatrices, DEFAULT_TOL as TOL};

/// Small integer data: exact arithmetic and plenty of ties.
fn integer_data(max_t: usize) -> impl Strategy<Value = Dataset> {
    (2usize..=3, 1..=max_t).prop_flat_map(|(l, t)| {
        (
            prop::collection::vec(prop::collection::vec(1u8..=5, l), t),
            prop::collection::vec(prop::collection::vec(0u8..=4, l), t),
        )
            .prop_map(|(p, x)| {
                let to_f = |v: Vec<Vec<u8>>| -> Vec<Vec<f64>> {
                    v.into_iter().map(|r| r.into_iter().map(f64::from).collect()).collect()
                };
                let mut x = to_f(x);
                for row in &mut x {
                    if row.iter().all(|v| *v == 0.0) {
                        row[0] = 1.0;
                    }
                }
                Dataset::new(to_f(p), x).unwrap()
            })
    })
}

/// Continuous data from the mixed generator.
fn mixed_data(max_t: usize) -> impl Strategy<Value = Dataset> {
    (any::<u64>(), 1..=max_t, 2usize..=3).prop_map(|(seed, t, l)| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        generate(&mut rng, Family::Mixed, t, l)
    })
}

fn any_data(max_t: usize) -> impl Strategy<Value = Dataset> {
    prop_oneof![integer_data(max_t), mixed_data(max_t)]
}

fn matrix() -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1usize..=5, 1usize..=5).prop_flat_map(|(r, c)| prop::collection::vec(prop::collection::vec(-3.0f64..3.0, c), r))
}

fn holds(d: &Dataset, a: Axiom) -> bool {
    check(d, a, TOL).holds
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn axiom_hierarchy(d in any_data(6)) {
        if holds(&d, Axiom::Sarp) {
            prop_assert!(holds(&d, Axiom::Warp));
            prop_assert!(holds(&d, Axiom::Garp));
        }
        if holds(&d, Axiom::Garp) {
            prop_assert!(holds(&d, Axiom::Wgarp));
        }
        if holds(&d, Axiom::Warp) {
            prop_assert!(holds(&d, Axiom::Wgarp));
        }
        if holds(&d, Axiom::StrongLaw) {
            prop_assert!(holds(&d, Axiom::LawOfDemand));
        }
    }

    #[test]
    fn two_observations_strong_law_is_law_of_demand(d in any_data(2)) {
        prop_assert_eq!(holds(&d, Axiom::StrongLaw), holds(&d, Axiom::LawOfDemand));
    }

    #[test]
    fn failure_witnesses_replay(d in any_data(6)) {
        for report in axioms::check_all(&d, TOL) {
            if !report.holds {
                let slack = report.replay(&d, TOL);
                prop_assert!(slack.is_some_and(|s| s > 0.0), "{:?} slack {:?}", report.axiom, slack);
            }
        }
    }

    #[test]
    fn closure_contains_direct_and_is_transitive(d in any_data(6)) {
        let r = RelationMatrices::compute(&d, TOL);
        let w = r.weak_closure.clone().unwrap();
        let st = r.strict_closure.clone().unwrap();
        let n = d.len();
        for a in 0..n {
            for b in 0..n {
                prop_assert!(!r.weak_direct[a][b] || w[a][b]);
                prop_assert!(!r.strict_direct[a][b] || st[a][b]);
                for c in 0..n {
                    prop_assert!(!(w[a][b] && w[b][c]) || w[a][c]);
                }
            }
        }
        let closed = RelationMatrices { weak_direct: w.clone(), strict_direct: st.clone(), weak_closure: None, strict_closure: None };
        let again = transitive_closure(&closed);
        prop_assert_eq!(again.weak_closure.unwrap(), w);
        prop_assert_eq!(again.strict_closure.unwrap(), st);
    }

    #[test]
    fn afriat_numbers_certify(d in any_data(6)) {
        match afriat_numbers(&d, TOL) {
            Ok(n) => prop_assert!(n.verify(&d, TOL)),
            Err(_) => prop_assert!(!holds(&d, Axiom::Garp)),
        }
        if holds(&d, Axiom::Sarp) {
            let n = strict_afriat_numbers(&d, StrictParams::default_for(&d), TOL).unwrap();
            prop_assert!(n.verify_strict(&d, TOL));
        }
    }

    #[test]
    fn pairwise_systems_agree_with_wgarp(d in any_data(5)) {
        let wgarp = holds(&d, Axiom::Wgarp);
        prop_assert_eq!(pairwise_numbers_unchecked(&d, TOL).verify(&d, TOL), wgarp);
        prop_assert_eq!(pairwise_numbers(&d, TOL).is_ok(), wgarp);
        if let Ok(w) = w_numbers(&d, TOL) {
            prop_assert!(w.verify(&d, TOL));
        }
        let q = CounterfactualQuery { base: d.clone(), slots: vec![] };
        prop_assert_eq!(milp_feasible(&q, &MilpOptions::default()).unwrap().feasible, wgarp);
    }

    #[test]
    fn game_value_brackets_and_translation(m in matrix(), c in -5.0f64..5.0) {
        let g = solve_matrix_game(&m).unwrap();
        prop_assert!(g.lower <= g.value + 1e-12 && g.value <= g.upper + 1e-12);
        prop_assert!(g.gap().abs() <= 1e-9);
        let shifted: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|v| v + c).collect()).collect();
        prop_assert!((solve_matrix_game(&shifted).unwrap().value - (g.value + c)).abs() <= 1e-9);
        // The same game seen from the other side.
        let rows = m.len();
        let cols = m[0].len();
        let flipped: Vec<Vec<f64>> = (0..cols).map(|j| (0..rows).map(|i| -m[i][j]).collect()).collect();
        prop_assert!((solve_matrix_game(&flipped).unwrap().value + g.value).abs() <= 1e-9);
    }

    #[test]
    fn maximin_is_skew_symmetric(d in mixed_data(5), seed in any::<u64>()) {
        prop_assume!(holds(&d, Axiom::Wgarp));
        let f = LocalUtilityFamily::build(&d, TOL).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::Rng;
        let l = d.goods();
        let x: Vec<f64> = (0..l).map(|_| rng.gen_range(0.0..3.0)).collect();
        let y: Vec<f64> = (0..l).map(|_| rng.gen_range(0.0..3.0)).collect();
        let a = f.eval(&x, &y).unwrap().value;
        let b = f.eval(&y, &x).unwrap().value;
        prop_assert!((a + b).abs() <= 1e-9 * (1.0 + a.abs()));
        prop_assert!(f.eval(&x, &x).unwrap().value.abs() <= 1e-12);
    }

    #[test]
    fn quasilinear_equivalences(d in any_data(6), c in -10.0f64..10.0) {
        match quasilinear_numbers(&d, TOL) {
            Ok(n) => {
                prop_assert!(n.verify(&d, TOL));
                prop_assert!(n.shifted(c).verify(&d, TOL));
            }
            Err(_) => prop_assert!(!holds(&d, Axiom::StrongLaw)),
        }
        prop_assert_eq!(ql_pairwise_numbers(&d, TOL).is_ok(), holds(&d, Axiom::LawOfDemand));
    }

    #[test]
    fn ql_preference_rationalizes(d in mixed_data(4), seed in any::<u64>()) {
        prop_assume!(holds(&d, Axiom::LawOfDemand));
        let f = QlPreference::build(&d, TOL).unwrap();
        prop_assert!(f.check_rationalization(20, seed, 1e-7).unwrap().passed());
    }

    #[test]
    fn constant_multipliers(d in any_data(5)) {
        let rep = check_theorem_d_feasibility(&d).unwrap();
        if let Some(l) = &rep.lambda {
            prop_assert!(theorem_d_violation(&d, l) <= 1e-7 * (1.0 + d.len() as f64));
            prop_assert!((l.iter().sum::<f64>() - d.len() as f64).abs() <= 1e-9 * d.len() as f64);
        }
        if let Ok(n) = afriat_numbers(&d, TOL) {
            prop_assert!(theorem_d_violation(&d, &n.lambda) <= 1e-6);
            prop_assert!(rep.feasible);
        }
    }

    #[test]
    fn observed_choices_are_in_their_demand_sets(d in any_data(5)) {
        prop_assume!(holds(&d, Axiom::Wgarp));
        for t in 0..d.len() {
            let w = d.wealth(t);
            let p: Vec<f64> = d.price(t).iter().map(|v| v / w).collect();
            let r = in_wdemand(&d, &p, d.bundle(t), TOL).unwrap();
            prop_assert!(r.member, "t = {} violations {:?}", t, r.violations);
        }
    }

    #[test]
    fn demand_box_contains_grid_members(d in mixed_data(4), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::Rng;
        let p: Vec<f64> = (0..d.goods()).map(|_| rng.gen_range(0.2..1.0)).collect();
        let b = wdemand_box(&d, &p, 12, TOL).unwrap();
        let g = b.grid.unwrap();
        prop_assert_eq!(g.outside, 0);
        if b.empty {
            prop_assert_eq!(g.members, 0);
        }
    }

    #[test]
    fn binary_system_solutions_verify(d in mixed_data(4), seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::Rng;
        let l = d.goods();
        let price: Vec<f64> = (0..l).map(|_| rng.gen_range(0.5..2.0)).collect();
        let bundles: Vec<Vec<f64>> = (0..4).map(|_| (0..l).map(|_| rng.gen_range(0.1..2.0)).collect()).collect();
        let q = CounterfactualQuery { base: d, slots: vec![Slot::at_price(&price, bundles)] };
        let r = milp_feasible(&q, &MilpOptions::default()).unwrap();
        if let Some(a) = r.assignment {
            prop_assert!(a.verify(MilpOptions::default().eps));
            prop_assert!(holds(&a.data, Axiom::Wgarp));
        }
    }

    #[test]
    fn csv_roundtrip(d in any_data(6)) {
        let text = d.to_csv_string();
        let back = Dataset::from_csv_reader(text.as_bytes()).unwrap();
        prop_assert_eq!(back, d);
    }
}
