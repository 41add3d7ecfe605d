//! Block system
//!
//!   [ B + 2 A^T D^{-1} A   A^T ] [v1]   [r1]
//!   [ A                    D   ] [v2] = [r2]
//!
//! with diagonal A and D, solved through one shifted L-BFGS solve.

use rand::Rng;
use shifted_lbfgs::problems::{gen_random_pairs, gen_rhs, kkt_block_solve, rng_for};
use shifted_lbfgs::shifted::GuardParams;

fn main() -> shifted_lbfgs::Result<()> {
    let (n, seed) = (5000, 3);
    let pairs = gen_random_pairs(n, 5, seed, 1e-8)?;
    let mut rng = rng_for(seed, 99);
    let a: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..2.0)).collect();
    let d: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..1.0)).collect();
    let r1 = gen_rhs(n, seed);
    let r2 = gen_rhs(n, seed + 1);

    let sol = kkt_block_solve(&pairs, None, &a, &d, &r1, &r2, &GuardParams::default())?;
    println!("block residual         {:.3e}", sol.block_residual);
    println!("inner shifted residual {:.3e}", sol.report.rel_residual);
    println!("|v1| = {:.4}, |v2| = {:.4}", norm(&sol.v1), norm(&sol.v2));
    Ok(())
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
