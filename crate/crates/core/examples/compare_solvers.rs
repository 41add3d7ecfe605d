//! Recursion, CG, Jacobi-PCG and the dense oracle on the same system.

use shifted_lbfgs::baselines::{
    cg_solve, dense_oracle_solve, pcg_jacobi_solve, IterativeConfig,
};
use shifted_lbfgs::linalg::rel_diff;
use shifted_lbfgs::problems::ProblemSpec;
use shifted_lbfgs::shift::ShiftKind;
use shifted_lbfgs::shifted::{solve_full, GuardParams};

fn main() -> shifted_lbfgs::Result<()> {
    for kind in ShiftKind::ALL {
        let spec = ProblemSpec {
            n: 500,
            k: 5,
            shift_kind: kind,
            sigma: 0.1,
            seed: 11,
            ..ProblemSpec::default()
        };
        let inst = spec.build()?;
        let cfg = IterativeConfig::default();
        let reports = [
            solve_full(&inst.pairs, &inst.shift, &inst.rhs, &GuardParams::default())?,
            cg_solve(&inst.pairs, &inst.shift, &inst.rhs, &cfg)?,
            pcg_jacobi_solve(&inst.pairs, &inst.shift, &inst.rhs, &cfg)?,
            dense_oracle_solve(&inst.pairs, &inst.shift, &inst.rhs)?,
        ];
        let oracle = &reports[3].x;
        println!("shift = {kind}");
        for r in &reports {
            println!(
                "  {:<9} iters {:>3}  residual {:.2e}  vs oracle {:.2e}  time {:.2e} s",
                r.method.as_str(),
                r.iterations,
                r.rel_residual,
                rel_diff(&r.x, oracle),
                r.wall_time
            );
        }
    }
    Ok(())
}
