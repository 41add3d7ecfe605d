//! The guard refuses pairs that could make the recursion unstable; the
//! caller can then restart from B_0.

use shifted_lbfgs::problems::{gen_random_pairs, gen_rhs};
use shifted_lbfgs::shifted::{check_guard, precompute, solve_or_restart, GuardParams};
use shifted_lbfgs::ScalarShift;

fn main() -> shifted_lbfgs::Result<()> {
    let n = 200;
    let mut pairs = gen_random_pairs(n, 5, 4, 1e-8)?;
    let g = ScalarShift::new(0.2, n)?;

    let state = precompute(&pairs, &g, &GuardParams::default())?;
    println!("default guard: {:?}", check_guard(&pairs, &g, &GuardParams::default()));
    println!("even-index denominators:");
    for (i, d) in state.denominators().iter().enumerate().step_by(2) {
        println!("  {i}: {d:.4}");
    }
    println!(
        "bound violations: {}",
        state.stability_violations(&pairs)
    );

    // A Frobenius budget far below ‖Y‖_F^2 forces a rejection.
    let strict = GuardParams {
        eta: 1e-3,
        ..GuardParams::default()
    };
    println!("strict guard:  {:?}", check_guard(&pairs, &g, &strict));
    let (report, restarted) = solve_or_restart(&mut pairs, &g, &gen_rhs(n, 4), &strict)?;
    println!(
        "restarted = {restarted}, pairs left = {}, residual {:.2e}",
        pairs.len(),
        report.rel_residual
    );
    Ok(())
}
