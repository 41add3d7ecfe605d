mod common;

use common::{col, random_instance, rel_err, DELTA};
use proptest::prelude::*;
use shifted_lbfgs::baselines::{
    apply_shifted_operator, assemble_b, assemble_shifted_system, cg_solve, dense_oracle_solve,
    pcg_jacobi_solve, IterativeConfig,
};
use shifted_lbfgs::problems::{gen_random_pairs, gen_rhs, gen_tridiagonal_shift};
use shifted_lbfgs::shifted::{solve_full, GuardParams};
use shifted_lbfgs::{Error, ScalarShift};

#[test]
fn operator_matches_dense_n100() {
    for seed in 0..5 {
        let (inst, _) = random_instance(seed, 100..=100, 0..=7);
        let a = assemble_shifted_system(&inst.pairs, &inst.shift).unwrap();
        let v = gen_rhs(100, seed + 50);
        let out = apply_shifted_operator(&inst.pairs, &inst.shift, &v).unwrap();
        assert!(rel_err(&out, (&a * col(&v)).as_slice()) <= 1e-12);
    }
}

#[test]
fn jacobi_diagonal_matches_dense() {
    let pairs = gen_random_pairs(80, 6, 4, DELTA).unwrap();
    let b = assemble_b(&pairs);
    let d = pairs.unrolled().unwrap().diagonal();
    for i in 0..80 {
        assert!((d[i] - b[(i, i)]).abs() <= 1e-12 * b[(i, i)].abs());
    }
}

#[test]
fn oracle_residual_small_up_to_n500() {
    for seed in 0..5 {
        let (inst, _) = random_instance(seed, 300..=500, 0..=7);
        let rep = dense_oracle_solve(&inst.pairs, &inst.shift, &inst.rhs).unwrap();
        assert!(rep.rel_residual <= 1e-13, "{}", rep.rel_residual);
    }
}

#[test]
fn cg_energy_error_decreases() {
    let pairs = gen_random_pairs(120, 5, 3, DELTA).unwrap();
    let g = gen_tridiagonal_shift(120, 0.1, 3).unwrap();
    let y = gen_rhs(120, 3);
    let a = assemble_shifted_system(&pairs, &g).unwrap();
    let exact = a.clone().cholesky().unwrap().solve(&col(&y));
    let energy = |x: &[f64]| {
        let e = col(x) - &exact;
        (e.transpose() * &a * &e)[(0, 0)]
    };
    let mut prev = energy(&vec![0.0; 120]);
    for cap in 1..=12 {
        let cfg = IterativeConfig {
            tol: 1e-300,
            max_iterations: Some(cap),
            ..IterativeConfig::default()
        };
        let x = match cg_solve(&pairs, &g, &y, &cfg) {
            Err(Error::NotConverged { best, .. }) => best,
            Ok(rep) => rep.x,
            Err(e) => panic!("{e}"),
        };
        let now = energy(&x);
        assert!(now <= prev * (1.0 + 1e-12), "iteration {cap}: {now:e} > {prev:e}");
        prev = now;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn scalar_shift_cg_terminates_in_2k_plus_1(
        n in 1usize..=200, k in 0usize..=7, sigma in 0.05f64..1.0, seed in any::<u64>()
    ) {
        let pairs = gen_random_pairs(n, k, seed, DELTA).unwrap();
        let g = ScalarShift::new(sigma, n).unwrap();
        // Distinct eigenvalues of the dense operator, up to clustering.
        let mut eig: Vec<f64> = assemble_shifted_system(&pairs, &g)
            .unwrap()
            .symmetric_eigenvalues()
            .iter()
            .cloned()
            .collect();
        eig.sort_by(f64::total_cmp);
        eig.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * b.abs());
        prop_assert!(eig.len() <= 2 * k + 1);
        let rep = cg_solve(&pairs, &g, &gen_rhs(n, seed), &IterativeConfig::default()).unwrap();
        prop_assert!(rep.iterations <= 2 * k + 1);
    }

    #[test]
    fn all_methods_agree(seed in any::<u64>()) {
        let (inst, _) = random_instance(seed, 1..=500, 0..=7);
        let cfg = IterativeConfig::default();
        let xs = [
            solve_full(&inst.pairs, &inst.shift, &inst.rhs, &GuardParams::default()).unwrap().x,
            cg_solve(&inst.pairs, &inst.shift, &inst.rhs, &cfg).unwrap().x,
            pcg_jacobi_solve(&inst.pairs, &inst.shift, &inst.rhs, &cfg).unwrap().x,
            dense_oracle_solve(&inst.pairs, &inst.shift, &inst.rhs).unwrap().x,
        ];
        for i in 0..4 {
            for j in 0..i {
                prop_assert!(rel_err(&xs[i], &xs[j]) <= 1e-6, "{i} vs {j}");
            }
        }
    }
}
