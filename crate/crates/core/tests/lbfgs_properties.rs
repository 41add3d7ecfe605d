mod common;

use common::{col, dense_b_sequence, rel_err, DELTA};
use proptest::prelude::*;
use shifted_lbfgs::baselines::assemble_b;
use shifted_lbfgs::problems::{gen_random_pairs, gen_rhs};
use shifted_lbfgs::LbfgsPairs;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn b_is_positive_definite_on_random_directions(
        n in 1usize..200, k in 0usize..=7, seed in any::<u64>()
    ) {
        let pairs = gen_random_pairs(n, k, seed, DELTA).unwrap();
        for t in 0..100u64 {
            let mut v = gen_rhs(n, seed ^ (t + 1));
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= norm);
            let bv = pairs.apply(&v).unwrap();
            let q: f64 = v.iter().zip(&bv).map(|(a, b)| a * b).sum();
            prop_assert!(q > 0.0);
        }
    }

    #[test]
    fn latest_secant_equation_holds(n in 1usize..300, k in 1usize..=7, seed in any::<u64>()) {
        let pairs = gen_random_pairs(n, k, seed, DELTA).unwrap();
        let bs = pairs.apply(pairs.s(k - 1)).unwrap();
        prop_assert!(rel_err(&bs, pairs.y(k - 1)) <= 1e-10);
    }

    #[test]
    fn two_loop_inverts_apply(n in 1usize..=500, k in 0usize..=7, seed in any::<u64>()) {
        let pairs = gen_random_pairs(n, k, seed, DELTA).unwrap();
        let v = gen_rhs(n, seed);
        let back = pairs.two_loop_solve(&pairs.apply(&v).unwrap()).unwrap();
        prop_assert!(rel_err(&back, &v) <= 1e-10);
    }

    #[test]
    fn apply_and_two_loop_match_dense(n in 1usize..=300, k in 0usize..=7, seed in any::<u64>()) {
        let pairs = gen_random_pairs(n, k, seed, DELTA).unwrap();
        let b = assemble_b(&pairs);
        let v = gen_rhs(n, seed);
        let bv = &b * col(&v);
        prop_assert!(rel_err(&pairs.apply(&v).unwrap(), bv.as_slice()) <= 1e-10);
        let x = b.cholesky().unwrap().solve(&col(&v));
        prop_assert!(rel_err(&pairs.two_loop_solve(&v).unwrap(), x.as_slice()) <= 1e-10);
    }

    #[test]
    fn intermediate_b_j_match_dense(n in 1usize..=100, k in 0usize..=5, seed in any::<u64>()) {
        let pairs = gen_random_pairs(n, k, seed, DELTA).unwrap();
        let dense = dense_b_sequence(&pairs);
        let v = gen_rhs(n, seed);
        for (j, bj) in dense.iter().enumerate() {
            let expect = bj * col(&v);
            prop_assert!(rel_err(&pairs.apply_b(j, &v).unwrap(), expect.as_slice()) <= 1e-12);
        }
    }

    #[test]
    fn store_invariants_survive_pushes(
        n in 1usize..20, cap in 1usize..=6, pushes in 0usize..15, seed in any::<u64>()
    ) {
        let source = gen_random_pairs(n, pushes, seed, DELTA).unwrap();
        let mut pairs = LbfgsPairs::new(n, cap).unwrap();
        for i in 0..pushes {
            let _ = pairs.push_pair(source.s(i).to_vec(), source.y(i).to_vec(), DELTA).unwrap();
            prop_assert!(pairs.len() <= cap);
            prop_assert!(pairs.gamma() > 0.0);
            prop_assert!(pairs.curvatures().all(|c| c >= DELTA));
            prop_assert_eq!(pairs.s(pairs.len() - 1), source.s(i));
        }
        prop_assert_eq!(pairs.len(), pushes.min(cap));
    }
}

#[test]
fn unrolling_reconstructs_b_at_n100_k5() {
    let pairs = gen_random_pairs(100, 5, 42, DELTA).unwrap();
    let f = pairs.unrolled().unwrap();
    let b = assemble_b(&pairs);
    for t in 0..10 {
        let v = gen_rhs(100, t);
        let mut out: Vec<f64> = v.iter().map(|x| x / f.gamma).collect();
        for j in 0..f.len() {
            let bv: f64 = f.b[j].iter().zip(&v).map(|(a, b)| a * b).sum();
            let av: f64 = f.a[j].iter().zip(&v).map(|(a, b)| a * b).sum();
            for i in 0..100 {
                out[i] += bv * f.b[j][i] - av * f.a[j][i];
            }
        }
        assert!(rel_err(&out, (&b * col(&v)).as_slice()) <= 1e-12);
    }
}

#[test]
fn unrolling_counts_within_budget() {
    for k in 0..=7 {
        let pairs = gen_random_pairs(30, k, k as u64, DELTA).unwrap();
        let c = pairs.build_unrolled().unwrap().counters;
        assert_eq!(c.inner_products, k * k, "k = {k}");
        assert!(c.inner_products <= k * k + k + 2 * k);
    }
}
