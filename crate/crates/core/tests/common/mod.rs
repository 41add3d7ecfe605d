#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use shifted_lbfgs::baselines::assemble_shift;
use shifted_lbfgs::problems::{gen_random_pairs, gen_rhs, gen_shift, rng_for, Instance};
use shifted_lbfgs::{LbfgsPairs, ShiftKind};

pub const DELTA: f64 = 1e-8;

/// Random instance with `n` in `ns`, `k` in `ks`, a shift kind picked from
/// the seed and `sigma ~ U(0.05, 1)`.
pub fn random_instance(
    seed: u64,
    ns: std::ops::RangeInclusive<usize>,
    ks: std::ops::RangeInclusive<usize>,
) -> (Instance, ShiftKind) {
    let mut rng = rng_for(seed, 77);
    let n = rng.random_range(ns);
    let k = rng.random_range(ks);
    let kind = ShiftKind::ALL[rng.random_range(0..3)];
    let sigma = rng.random_range(0.05..1.0);
    let inst = Instance {
        pairs: gen_random_pairs(n, k, seed, DELTA).unwrap(),
        shift: gen_shift(kind, n, sigma, seed).unwrap(),
        rhs: gen_rhs(n, seed),
    };
    (inst, kind)
}

pub fn col(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

/// `B_0, ..., B_k` by the dense rank-two recursion.
pub fn dense_b_sequence(pairs: &LbfgsPairs) -> Vec<DMatrix<f64>> {
    let n = pairs.dim();
    let mut out = vec![DMatrix::<f64>::identity(n, n) / pairs.gamma()];
    for (s, y) in pairs.s_vectors().zip(pairs.y_vectors()) {
        let b = out.last().unwrap();
        let (s, y) = (col(s), col(y));
        let bs = b * &s;
        let next = b - &bs * bs.transpose() / s.dot(&bs) + &y * y.transpose() / y.dot(&s);
        out.push(next);
    }
    out
}

/// Update vectors `u_0, ..., u_{2k-1}` built from dense `B_j`.
pub fn dense_u(pairs: &LbfgsPairs) -> Vec<DVector<f64>> {
    let bs = dense_b_sequence(pairs);
    let mut u = Vec::new();
    for (j, (s, y)) in pairs.s_vectors().zip(pairs.y_vectors()).enumerate() {
        let (s, y) = (col(s), col(y));
        let bjs = &bs[j] * &s;
        u.push(&bjs / s.dot(&bjs).sqrt());
        u.push(&y / y.dot(&s).sqrt());
    }
    u
}

/// `C_0, ..., C_{2k}` with `C_0 = I / gamma + G`.
pub fn dense_c_chain<G: shifted_lbfgs::ShiftOperator>(
    pairs: &LbfgsPairs,
    g: &G,
) -> Vec<DMatrix<f64>> {
    let n = pairs.dim();
    let mut c = vec![DMatrix::<f64>::identity(n, n) / pairs.gamma() + assemble_shift(g)];
    for (i, u) in dense_u(pairs).iter().enumerate() {
        let sign = if i % 2 == 0 { -1.0 } else { 1.0 };
        let next = c.last().unwrap() + sign * u * u.transpose();
        c.push(next);
    }
    c
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|y| y * y).sum::<f64>().sqrt();
    if den > 0.0 {
        num / den
    } else {
        num
    }
}
