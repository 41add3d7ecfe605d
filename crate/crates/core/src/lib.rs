//! Direct solves with shifted limited-memory BFGS matrices.
//!
//! Given stored pairs `(s_i, y_i)` defining an L-BFGS matrix `B_k` and a
//! symmetric positive definite `G` with cheap shifted solves, this crate
//! solves `(B_k + G) x = y` without forming either matrix. The shifted
//! solver unrolls `B_k + G` into `2k` rank-one updates of `I / gamma + G`
//! and applies Sherman-Morrison once per update, needing only `2k + 1`
//! solves with `G + I / gamma` per right-hand side once the update data is
//! precomputed.
//!
//! ```
//! use shifted_lbfgs::lbfgs::{LbfgsPairs, DEFAULT_DELTA};
//! use shifted_lbfgs::shift::ScalarShift;
//! use shifted_lbfgs::shifted::{solve_full, GuardParams};
//!
//! let pairs = LbfgsPairs::from_pairs(1, 6, [(vec![1.0], vec![2.0])], DEFAULT_DELTA)?;
//! let g = ScalarShift::new(1.0, 1)?;
//! let report = solve_full(&pairs, &g, &[3.0], &GuardParams::default())?;
//! assert!((report.x[0] - 1.0).abs() < 1e-15);
//! # Ok::<(), shifted_lbfgs::Error>(())
//! ```
//!
//! The `examples/` directory has one program per task: solving with a
//! tridiagonal shift, trust-region steps, the KKT block reduction, comparing
//! against CG and the dense oracle, the stability guard, the naive two-loop
//! counterexample, many right-hand sides, and pair files.

pub mod baselines;
pub mod bench;
pub mod error;
pub mod io;
pub mod lbfgs;
pub mod linalg;
pub mod problems;
pub mod shift;
pub mod shifted;

pub use error::{Error, Result};
pub use lbfgs::{LbfgsPairs, UnrolledFactors};
pub use linalg::OpCounters;
pub use problems::ProblemSpec;
pub use shift::{DiagonalShift, ScalarShift, Shift, ShiftKind, ShiftOperator, TridiagonalShift};
pub use shifted::{
    check_guard, precompute, solve_full, GuardParams, Method, ShiftedSolverState, SolveReport,
};
