//! Solve (B_k + G) x = y for a random tridiagonal G at n = 100 000.

use shifted_lbfgs::problems::{gen_random_pairs, gen_rhs, gen_tridiagonal_shift};
use shifted_lbfgs::shifted::{budget, solve_full, GuardParams};

fn main() -> shifted_lbfgs::Result<()> {
    let (n, k, seed) = (100_000, 5, 1);
    let pairs = gen_random_pairs(n, k, seed, 1e-8)?;
    let g = gen_tridiagonal_shift(n, 0.1, seed)?;
    let y = gen_rhs(n, seed);

    let report = solve_full(&pairs, &g, &y, &GuardParams::default())?;
    println!("n = {n}, k = {k}");
    println!("relative residual  {:.3e}", report.rel_residual);
    println!("solve time         {:.4} s", report.wall_time);
    println!(
        "inner products     {} (recursion {} + unrolling {}; budget {})",
        report.total_inner_products(),
        report.counters.inner_products,
        report.unrolling.inner_products,
        budget::recursion_inner_products(k) + budget::unrolling_inner_products(k)
    );
    println!("shifted solves     {}", report.counters.shift_solves);
    Ok(())
}
