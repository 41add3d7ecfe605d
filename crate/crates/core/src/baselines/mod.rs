//! Reference solvers for `(B_k + G) x = y`: conjugate gradients (plain and
//! Jacobi-preconditioned) on the matrix-free operator, and a dense oracle.

mod cg;
mod dense;

pub use cg::{cg_solve, pcg_jacobi_solve, IterativeConfig, Preconditioner};
pub use dense::{
    assemble_b, assemble_shift, assemble_shifted_system, dense_oracle_solve,
    dense_oracle_solve_capped, DEFAULT_ORACLE_CAP,
};

use crate::error::{Error, Result};
use crate::lbfgs::LbfgsPairs;
use crate::linalg::{norm2, OpCounters};
use crate::shift::ShiftOperator;

/// `(B_k + G) v`, matrix-free.
pub fn apply_shifted_operator<G: ShiftOperator + ?Sized>(
    pairs: &LbfgsPairs,
    g: &G,
    v: &[f64],
) -> Result<Vec<f64>> {
    apply_counted(pairs, g, v, &mut OpCounters::default())
}

pub(crate) fn apply_counted<G: ShiftOperator + ?Sized>(
    pairs: &LbfgsPairs,
    g: &G,
    v: &[f64],
    c: &mut OpCounters,
) -> Result<Vec<f64>> {
    Error::check_dim(pairs.dim(), v.len())?;
    Error::check_dim(pairs.dim(), g.dim())?;
    let factors = pairs.unrolled()?;
    let mut out = factors.apply(pairs.len(), v, c);
    for (o, gv) in out.iter_mut().zip(g.apply(v)) {
        *o += gv;
    }
    Ok(out)
}

/// `‖(B_k + G) x - y‖ / ‖y‖` (absolute when `y = 0`).
pub fn relative_residual<G: ShiftOperator + ?Sized>(
    pairs: &LbfgsPairs,
    g: &G,
    x: &[f64],
    y: &[f64],
) -> Result<f64> {
    Error::check_dim(pairs.dim(), y.len())?;
    let mut r = apply_shifted_operator(pairs, g, x)?;
    for (ri, yi) in r.iter_mut().zip(y) {
        *ri -= yi;
    }
    let yn = norm2(y);
    let rn = norm2(&r);
    Ok(if yn > 0.0 { rn / yn } else { rn })
}
