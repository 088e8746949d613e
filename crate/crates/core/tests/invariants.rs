use hochcyc::ainfty::builtins::all;
use hochcyc::ainfty::AInfty;
use hochcyc::complexes::{t_lemma_check, Complex, Variant};
use hochcyc::graded::{GradedModule, Tuple, Word};
use hochcyc::homology::{homology_with, HomologyOptions, Truncation};
use hochcyc::openclosed::{random_family, theorem1_rewrite_residual};
use hochcyc::scalars::{Cap, Q};
use proptest::prelude::*;
use std::sync::Arc;

fn algebra(i: usize) -> AInfty {
    all().swap_remove(i % 4)
}

fn word(a: &AInfty, terms: &[(Vec<usize>, i128)]) -> Word {
    terms
        .iter()
        .map(|(t, c)| {
            let t: Tuple = t.iter().map(|&g| (g % a.module.len()) as u16).collect();
            (t, a.ring.int(*c))
        })
        .collect()
}

fn terms() -> impl Strategy<Value = Vec<(Vec<usize>, i128)>> {
    prop::collection::vec((prop::collection::vec(0usize..8, 1..5), -3i128..4), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn betti_numbers_ignore_generator_order(i in 0usize..4, v in 0usize..6, shuffle in Just((0u16..8).collect::<Vec<_>>()).prop_shuffle()) {
        let a = algebra(i);
        let v = Variant::ALL[v];
        let perm: Vec<u16> = shuffle.into_iter().filter(|&g| (g as usize) < a.module.len()).collect();
        let b = a.permuted(&perm).unwrap();
        let trunc = Truncation::new(Cap::new(Q::int(1), 3, 1));
        let opts = HomologyOptions { representatives: false, levels: false };
        let ra = homology_with(&a, v, &trunc, &opts).unwrap();
        let rb = homology_with(&b, v, &trunc, &opts).unwrap();
        prop_assert_eq!(ra.window, rb.window);
        prop_assert_eq!(ra.betti(), rb.betti());
        prop_assert_eq!(ra.ranks(), rb.ranks());
    }

    #[test]
    fn differential_squares_to_zero_on_random_chains(i in 0usize..4, v in 0usize..6, t in terms()) {
        let a = algebra(i);
        let cx = Complex::new(&a, Variant::ALL[v]).unwrap();
        let cap = Cap::new(Q::int(2), 6, 2);
        let w = cx.project(&word(&a, &t));
        let d2 = cx.diff(&cx.diff(&w, &cap).unwrap(), &cap).unwrap();
        prop_assert!(d2.is_zero(), "{}", d2.display(&a.module));
    }

    #[test]
    fn t_lemma_for_any_seed(i in 0usize..4, seed in any::<u64>()) {
        let a = algebra(i);
        let r = t_lemma_check(&a, &Cap::new(Q::int(2), 4, 2), 10, seed);
        prop_assert!(r.passed(), "{:?}", r.witnesses);
    }

    #[test]
    fn rewrite_holds_for_any_cyclic_family(i in 0usize..4, seed in any::<u64>(), n in 2i64..4, t in terms()) {
        let a = algebra(i);
        let target = Arc::new(GradedModule::from_pairs(&[("o1", 0), ("o2", 1)]));
        let p = random_family(seed, a.module.clone(), a.ring.clone(), target.len(), 8, true);
        let r = theorem1_rewrite_residual(&a, &p, n, &word(&a, &t), &Cap::new(Q::int(3), 6, 2)).unwrap();
        prop_assert!(r.is_zero(), "{r:?}");
    }
}
