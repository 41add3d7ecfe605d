//! Putting G into the two-loop recursion's B_0 step does not solve
//! (B_k + G) x = y.
//!
//! In one dimension with s = 1, y = 2 and G = 1: B_1 = 2, so the true
//! solution of (B_1 + G) x = 3 is x = 1, while the naive method returns 1.5.

use shifted_lbfgs::baselines::relative_residual;
use shifted_lbfgs::problems::{gen_random_pairs, gen_rhs, gen_tridiagonal_shift};
use shifted_lbfgs::shifted::{solve_full, GuardParams};
use shifted_lbfgs::{LbfgsPairs, ScalarShift};

fn main() -> shifted_lbfgs::Result<()> {
    let pairs = LbfgsPairs::from_pairs(1, 6, [(vec![1.0], vec![2.0])], 1e-8)?;
    let g = ScalarShift::new(1.0, 1)?;
    let naive = pairs.naive_shifted_two_loop(&g, &[3.0])?;
    let exact = solve_full(&pairs, &g, &[3.0], &GuardParams::default())?;
    println!("1-D: naive x = {}, recursion x = {}", naive[0], exact.x[0]);

    let n = 200;
    let pairs = gen_random_pairs(n, 5, 2, 1e-8)?;
    let g = gen_tridiagonal_shift(n, 0.1, 2)?;
    let y = gen_rhs(n, 2);
    let naive = pairs.naive_shifted_two_loop(&g, &y)?;
    let exact = solve_full(&pairs, &g, &y, &GuardParams::default())?;
    println!(
        "n = {n}: naive residual {:.3e}, recursion residual {:.3e}",
        relative_residual(&pairs, &g, &naive, &y)?,
        exact.rel_residual
    );
    Ok(())
}
