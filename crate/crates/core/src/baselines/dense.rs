//! Ground truth by explicit assembly.
//!
//! `B_k` is built from the pairs with the textbook rank-two recursion
//! `B_{i+1} = B_i - (B_i s_i)(B_i s_i)^T / (s_i^T B_i s_i) + y_i y_i^T / (y_i^T s_i)`
//! on dense matrices, independently of the unrolled factors the other
//! solvers use, then `B_k + G` is Cholesky-factored.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lbfgs::LbfgsPairs;
use crate::linalg::OpCounters;
use crate::shift::ShiftOperator;
use crate::shifted::{Method, SolveReport};

/// Largest `n` the oracle will factor by default.
pub const DEFAULT_ORACLE_CAP: usize = 2000;

/// Dense `B_k`.
pub fn assemble_b(pairs: &LbfgsPairs) -> DMatrix<f64> {
    let n = pairs.dim();
    let mut b = DMatrix::<f64>::identity(n, n) / pairs.gamma();
    for (s, y) in pairs.s_vectors().zip(pairs.y_vectors()) {
        let s = DVector::from_column_slice(s);
        let y = DVector::from_column_slice(y);
        let bs = &b * &s;
        let sbs = s.dot(&bs);
        let ys = y.dot(&s);
        b -= &bs * bs.transpose() / sbs;
        b += &y * y.transpose() / ys;
    }
    b
}

/// Dense `G`, probed column by column.
pub fn assemble_shift<G: ShiftOperator + ?Sized>(g: &G) -> DMatrix<f64> {
    let n = g.dim();
    let mut out = DMatrix::<f64>::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = g.apply(&e);
        out.set_column(j, &DVector::from_vec(col));
        e[j] = 0.0;
    }
    out
}

/// Dense `B_k + G`.
pub fn assemble_shifted_system<G: ShiftOperator + ?Sized>(
    pairs: &LbfgsPairs,
    g: &G,
) -> Result<DMatrix<f64>> {
    Error::check_dim(pairs.dim(), g.dim())?;
    Ok(assemble_b(pairs) + assemble_shift(g))
}

/// Solves `(B_k + G) x = y` densely, refusing `n > DEFAULT_ORACLE_CAP`.
pub fn dense_oracle_solve<G: ShiftOperator + ?Sized>(
    pairs: &LbfgsPairs,
    g: &G,
    y: &[f64],
) -> Result<SolveReport> {
    dense_oracle_solve_capped(pairs, g, y, DEFAULT_ORACLE_CAP)
}

pub fn dense_oracle_solve_capped<G: ShiftOperator + ?Sized>(
    pairs: &LbfgsPairs,
    g: &G,
    y: &[f64],
    cap: usize,
) -> Result<SolveReport> {
    let n = pairs.dim();
    if n > cap {
        return Err(Error::OracleCapExceeded { n, cap });
    }
    Error::check_dim(n, y.len())?;
    let start = Instant::now();
    let a = assemble_shifted_system(pairs, g)?;
    let chol = a.clone().cholesky().ok_or(Error::DenseFactorization)?;
    let rhs = DVector::from_column_slice(y);
    let x = chol.solve(&rhs);
    let wall_time = start.elapsed().as_secs_f64();

    let r = &a * &x - &rhs;
    let yn = rhs.norm();
    let rel_residual = if yn > 0.0 { r.norm() / yn } else { r.norm() };
    Ok(SolveReport {
        x: x.as_slice().to_vec(),
        rel_residual,
        wall_time,
        iterations: 0,
        counters: OpCounters::default(),
        unrolling: OpCounters::default(),
        method: Method::DenseOracle,
        preconditioner_fallback: false,
    })
}
