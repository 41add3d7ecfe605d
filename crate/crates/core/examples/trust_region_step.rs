//! Trust-region style steps s(sigma) = -(B + sigma I)^{-1} g from pairs
//! gathered by five L-BFGS iterations on the extended Rosenbrock function.

use shifted_lbfgs::baselines::{cg_solve, IterativeConfig};
use shifted_lbfgs::linalg::norm2;
use shifted_lbfgs::problems::{gen_sigma, run_lbfgs_collect, trust_region_system, ObjectiveKind};
use shifted_lbfgs::shifted::{solve_full, GuardParams};

fn main() -> shifted_lbfgs::Result<()> {
    let n = 1000;
    let run = run_lbfgs_collect(ObjectiveKind::ExtendedRosenbrock, n, 5, 0)?;
    println!(
        "collected {} pairs in {} iterations, |g| = {:.3e}",
        run.pairs.len(),
        run.iterations,
        norm2(&run.gradient)
    );

    let random_sigma = gen_sigma(7);
    for sigma in [random_sigma, 1.0, 10.0, 1e3, 1e6] {
        let (shift, rhs) = trust_region_system(&run.pairs, &run.gradient, sigma)?;
        let rec = solve_full(&run.pairs, &shift, &rhs, &GuardParams::default())?;
        let cg = cg_solve(&run.pairs, &shift, &rhs, &IterativeConfig::default())?;
        println!(
            "sigma = {sigma:<10.4e} |s| = {:.4e}  residual {:.2e}  cg iterations {}",
            norm2(&rec.x),
            rec.rel_residual,
            cg.iterations
        );
    }
    Ok(())
}
