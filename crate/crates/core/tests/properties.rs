use num_complex::Complex64;
use proptest::collection::vec;
use proptest::prelude::*;

use num_integer::Integer;
use nilsol::counting::{l1_deviation, sol_brute, sol_fast, sol_set, CyclicFunction, SubsetOfZN};
use nilsol::extremal::{self, Annealing, SearchBudget};
use nilsol::forms::LinearFormSystem;
use nilsol::gowers::gowers_norm;
use num_rational::Rational64;

fn unit_disc(n: usize) -> impl Strategy<Value = CyclicFunction> {
    vec((0.0f64..=1.0, 0.0f64..std::f64::consts::TAU), n)
        .prop_map(|v| CyclicFunction::new(v.into_iter().map(|(r, t)| Complex64::from_polar(r, t)).collect()).unwrap())
}

fn system() -> impl Strategy<Value = LinearFormSystem> {
    (1usize..=3, 1usize..=2)
        .prop_flat_map(|(t, d)| vec(vec(-3i64..=3, d), t))
        .prop_filter_map("zero form", |rows| LinearFormSystem::new(rows).ok())
}

fn modulation(f: &CyclicFunction, r: i64) -> CyclicFunction {
    let n = f.modulus();
    let chi = CyclicFunction::character(r, n);
    CyclicFunction::new(f.values().iter().zip(chi.values()).map(|(a, b)| a * b).collect()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kernel_equals_image(sys in system(), n in 2u64..=12) {
        let kp = sys.kernelize().unwrap();
        prop_assume!(kp.is_compatible(n));
        prop_assert_eq!(sys.image_mod(n, u128::MAX).unwrap(), kp.kernel_mod(n, u128::MAX).unwrap());
    }

    #[test]
    fn duplicated_rows_keep_the_kernel(sys in system(), n in 2u64..=12) {
        let mut rows = sys.forms().to_vec();
        rows.extend(sys.forms().iter().cloned());
        let doubled = LinearFormSystem::new(rows).unwrap();
        let (a, b) = (sys.kernelize().unwrap(), doubled.kernelize().unwrap());
        prop_assume!(a.is_compatible(n) && b.is_compatible(n));
        let project = |s: std::collections::BTreeSet<Vec<u64>>, t: usize| -> std::collections::BTreeSet<Vec<u64>> {
            s.into_iter().map(|v| v[..t].to_vec()).collect()
        };
        prop_assert_eq!(a.kernel_mod(n, u128::MAX).unwrap(), project(b.kernel_mod(n, u128::MAX).unwrap(), sys.num_forms()));
    }

    #[test]
    fn classification_ignores_form_order(sys in system(), seed in 0usize..6) {
        let mut rows = sys.forms().to_vec();
        let len = rows.len();
        rows.rotate_left(seed % len);
        if seed % 2 == 1 {
            rows.reverse();
        }
        let permuted = LinearFormSystem::new(rows).unwrap();
        prop_assert_eq!(sys.size(), permuted.size());
        prop_assert_eq!(sys.pairwise_independent(), permuted.pairwise_independent());
        prop_assert_eq!(sys.is_invariant(), permuted.is_invariant());
    }

    #[test]
    fn fast_matches_brute(f in unit_disc(23), g in unit_disc(23), h in unit_disc(23)) {
        let sys = LinearFormSystem::arithmetic_progression(3);
        let kp = sys.kernelize().unwrap();
        let fs = [f, g, h];
        let diff = (sol_brute(&fs, &sys).unwrap().value - sol_fast(&fs, &sys, &kp).unwrap()).norm();
        prop_assert!(diff <= 1e-9);
    }

    #[test]
    fn sol_is_multilinear(f in unit_disc(11), g in unit_disc(11), h in unit_disc(11), a in 0.0f64..0.5, b in 0.0f64..0.5, slot in 0usize..3) {
        let sys = LinearFormSystem::arithmetic_progression(3);
        let mix = CyclicFunction::new(f.values().iter().zip(g.values()).map(|(x, y)| x * a + y * b).collect()).unwrap();
        let with = |x: &CyclicFunction| {
            let mut fs = vec![h.clone(), h.clone(), h.clone()];
            fs[slot] = x.clone();
            sol_brute(&fs, &sys).unwrap().value
        };
        let lhs = with(&mix);
        let rhs = with(&f) * a + with(&g) * b;
        prop_assert!((lhs - rhs).norm() <= 1e-12);
    }

    #[test]
    fn invariant_systems_are_translation_invariant(mask in vec(any::<bool>(), 4..24), c in -30i64..30) {
        let set = SubsetOfZN::from_mask(&mask);
        let n = set.modulus();
        let shifted = SubsetOfZN::new(n, set.members().iter().map(|&x| (x as i64 + c).rem_euclid(n as i64) as u64).collect()).unwrap();
        for sys in [LinearFormSystem::arithmetic_progression(3), LinearFormSystem::arithmetic_progression(4)] {
            prop_assert_eq!(sol_set(&set, &sys).unwrap(), sol_set(&shifted, &sys).unwrap());
        }
    }

    #[test]
    fn sol_is_lipschitz_in_l1(f in unit_disc(29), g in unit_disc(29)) {
        for sys in [LinearFormSystem::arithmetic_progression(3), LinearFormSystem::dependent_pair(2)] {
            prop_assume!(sys.forms().iter().all(|row| row.iter().any(|&c| c.unsigned_abs().gcd(&29) == 1)));
            let lhs = (sol_brute(&vec![f.clone(); sys.num_forms()], &sys).unwrap().value
                - sol_brute(&vec![g.clone(); sys.num_forms()], &sys).unwrap().value).norm();
            let bound = sys.num_forms() as f64 * l1_deviation(&f, &g).unwrap();
            prop_assert!(lhs <= bound + 1e-12);
        }
    }

    #[test]
    fn gowers_norms_are_nested(f in unit_disc(17)) {
        let norms: Vec<f64> = (1..=4).map(|d| gowers_norm(&f, d).unwrap()).collect();
        for w in norms.windows(2) {
            prop_assert!(w[0] <= w[1] + 1e-9);
        }
    }

    #[test]
    fn gowers_norms_ignore_translation_and_linear_phase(f in unit_disc(19), r in -19i64..19, c in -40i64..40) {
        for d in 1..=3 {
            prop_assert!((gowers_norm(&f.translate(c), d).unwrap() - gowers_norm(&f, d).unwrap()).abs() <= 1e-9);
        }
        for d in 2..=3 {
            prop_assert!((gowers_norm(&modulation(&f, r), d).unwrap() - gowers_norm(&f, d).unwrap()).abs() <= 1e-9);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn heuristics_bracket_exact_values(n in 4u64..=11, num in 1i64..=4, seed in 0u64..100) {
        let alpha = Rational64::new(num, 5);
        let sys = LinearFormSystem::arithmetic_progression(3);
        let budget = SearchBudget::default();
        let schedule = Annealing::new(400);
        let min_exact = extremal::min_sol_exact(&sys, alpha, n, &budget).unwrap();
        let max_exact = extremal::max_sol_exact(&sys, alpha, n, &budget).unwrap();
        let min_heur = extremal::min_sol_heuristic(&sys, alpha, n, seed, &schedule).unwrap();
        let max_heur = extremal::max_sol_heuristic(&sys, alpha, n, seed, &schedule).unwrap();
        prop_assert!(min_heur.value >= min_exact.value);
        prop_assert!(max_heur.value <= max_exact.value);
        for r in [&min_exact, &max_exact, &min_heur, &max_heur] {
            prop_assert_eq!(sol_set(&r.certificate, &sys).unwrap(), r.value);
        }
    }

    #[test]
    fn dependent_pair_cycles_match_search(k in prop_oneof![Just(2i64), Just(3), Just(-2), Just(5)], p in prop_oneof![Just(7u64), Just(11), Just(13), Just(17), Just(19)]) {
        prop_assume!(k.rem_euclid(p as i64) != 0);
        let cycles = extremal::dependent_pair_exact(k, p, None).unwrap();
        let sys = LinearFormSystem::dependent_pair(k);
        let search = extremal::max_free_density_exact(std::slice::from_ref(&sys), p, extremal::Degeneracy::Strict, &SearchBudget::default()).unwrap();
        prop_assert_eq!(cycles.d, search.value);
        prop_assert_eq!(sol_set(&cycles.free_set, &sys).unwrap(), Rational64::from_integer(0));
    }
}
