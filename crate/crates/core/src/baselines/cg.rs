use std::time::Instant;

use crate::baselines::{apply_counted, relative_residual};
use crate::error::{Error, Result};
use crate::lbfgs::LbfgsPairs;
use crate::linalg::{caxpy, cdot, OpCounters};
use crate::shift::ShiftOperator;
use crate::shifted::{Method, SolveReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preconditioner {
    None,
    Jacobi,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterativeConfig {
    /// Target for `‖r‖ / ‖y‖`.
    pub tol: f64,
    /// `None` means `10 n`.
    pub max_iterations: Option<usize>,
    pub preconditioner: Preconditioner,
}

impl Default for IterativeConfig {
    fn default() -> Self {
        IterativeConfig {
            tol: f64::EPSILON.sqrt(),
            max_iterations: None,
            preconditioner: Preconditioner::None,
        }
    }
}

impl IterativeConfig {
    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {}",
                self.tol
            )));
        }
        if self.max_iterations == Some(0) {
            return Err(Error::InvalidArgument("max_iterations must be >= 1".into()));
        }
        Ok(())
    }
}

/// Conjugate gradients on `B_k + G`, starting from zero.
///
/// Stops when the recursively updated residual satisfies
/// `‖r‖ <= tol ‖y‖`. On failure the error carries the last iterate.
pub fn cg_solve<G: ShiftOperator + ?Sized>(
    pairs: &LbfgsPairs,
    g: &G,
    y: &[f64],
    cfg: &IterativeConfig,
) -> Result<SolveReport> {
    run(pairs, g, y, cfg, None, Method::Cg)
}

/// CG preconditioned by `diag(B_k) + diag(G)`.
///
/// `diag(B_k)` comes from the unrolled factors in O(nk). If any entry of
/// the preconditioner is not positive, falls back to plain CG and sets
/// `preconditioner_fallback` in the report.
pub fn pcg_jacobi_solve<G: ShiftOperator + ?Sized>(
    pairs: &LbfgsPairs,
    g: &G,
    y: &[f64],
    cfg: &IterativeConfig,
) -> Result<SolveReport> {
    Error::check_dim(pairs.dim(), y.len())?;
    Error::check_dim(pairs.dim(), g.dim())?;
    let start = Instant::now();
    let factors = pairs.unrolled()?;
    let mut diag = if factors.is_empty() {
        vec![1.0 / pairs.gamma(); pairs.dim()]
    } else {
        factors.diagonal()
    };
    for (d, gd) in diag.iter_mut().zip(g.diagonal()) {
        *d += gd;
    }
    let setup = start.elapsed().as_secs_f64();

    if diag.iter().any(|d| !(*d > 0.0 && d.is_finite())) {
        let mut rep = run(pairs, g, y, cfg, None, Method::PcgDiag)?;
        rep.preconditioner_fallback = true;
        rep.wall_time += setup;
        return Ok(rep);
    }
    let inv: Vec<f64> = diag.iter().map(|d| 1.0 / d).collect();
    let mut rep = run(pairs, g, y, cfg, Some(&inv), Method::PcgDiag)?;
    rep.wall_time += setup;
    Ok(rep)
}

fn run<G: ShiftOperator + ?Sized>(
    pairs: &LbfgsPairs,
    g: &G,
    y: &[f64],
    cfg: &IterativeConfig,
    inv_diag: Option<&[f64]>,
    method: Method,
) -> Result<SolveReport> {
    cfg.validate()?;
    let n = pairs.dim();
    Error::check_dim(n, y.len())?;
    Error::check_dim(n, g.dim())?;
    let max_iter = cfg.max_iterations.unwrap_or(10 * n);
    let precondition = |r: &[f64]| -> Vec<f64> {
        match inv_diag {
            Some(m) => r.iter().zip(m).map(|(a, b)| a * b).collect(),
            None => r.to_vec(),
        }
    };

    let start = Instant::now();
    let mut c = OpCounters::default();
    let mut x = vec![0.0; n];
    let mut r = y.to_vec();
    let y_norm = cdot(&mut c, y, y).sqrt();
    let target = cfg.tol * y_norm;
    let mut r_norm = y_norm;
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = cdot(&mut c, &r, &z);
    let mut iterations = 0;

    while r_norm > target {
        if iterations == max_iter {
            return Err(Error::NotConverged {
                iterations,
                rel_residual: r_norm / y_norm,
                best: x,
            });
        }
        let ap = apply_counted(pairs, g, &p, &mut c)?;
        let pap = cdot(&mut c, &p, &ap);
        if !(pap > 0.0 && pap.is_finite()) {
            return Err(Error::NotConverged {
                iterations,
                rel_residual: r_norm / y_norm,
                best: x,
            });
        }
        let step = rz / pap;
        caxpy(&mut c, step, &p, &mut x);
        caxpy(&mut c, -step, &ap, &mut r);
        iterations += 1;
        r_norm = cdot(&mut c, &r, &r).sqrt();
        if r_norm <= target {
            break;
        }
        z = precondition(&r);
        let rz_next = cdot(&mut c, &r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        // p = z + beta p
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
        c.vector_updates += 1;
    }
    let wall_time = start.elapsed().as_secs_f64();
    let rel_residual = relative_residual(pairs, g, &x, y)?;

    Ok(SolveReport {
        x,
        rel_residual,
        wall_time,
        iterations,
        counters: c,
        unrolling: OpCounters::default(),
        method,
        preconditioner_fallback: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lbfgs::DEFAULT_DELTA;
    use crate::shift::{DiagonalShift, ScalarShift};

    #[test]
    fn identity_system_takes_one_iteration() {
        let mut pairs = LbfgsPairs::new(4, 2).unwrap();
        pairs.set_gamma(2.0).unwrap();
        let g = ScalarShift::new(0.5, 4).unwrap();
        let y = [1.0, -2.0, 3.0, 0.5];
        let rep = cg_solve(&pairs, &g, &y, &IterativeConfig::default()).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.rel_residual < 1e-15);
        assert_eq!(rep.method, Method::Cg);
    }

    #[test]
    fn jacobi_exact_for_diagonal_operator() {
        let mut pairs = LbfgsPairs::new(3, 2).unwrap();
        pairs.set_gamma(0.5).unwrap();
        let g = DiagonalShift::new(vec![1.0, 5.0, 10.0]).unwrap();
        let rep =
            pcg_jacobi_solve(&pairs, &g, &[1.0, 2.0, 3.0], &IterativeConfig::default()).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(!rep.preconditioner_fallback);
        assert!(rep.rel_residual < 1e-15);
    }

    #[test]
    fn zero_rhs_needs_no_iterations() {
        let pairs =
            LbfgsPairs::from_pairs(2, 2, [(vec![1.0, 0.0], vec![2.0, 0.5])], DEFAULT_DELTA)
                .unwrap();
        let g = ScalarShift::new(1.0, 2).unwrap();
        let rep = cg_solve(&pairs, &g, &[0.0, 0.0], &IterativeConfig::default()).unwrap();
        assert_eq!(rep.iterations, 0);
        assert_eq!(rep.x, vec![0.0, 0.0]);
    }

    #[test]
    fn iteration_cap_reports_last_iterate() {
        let pairs = LbfgsPairs::from_pairs(
            3,
            2,
            [
                (vec![1.0, 0.0, 0.5], vec![2.0, 0.5, 1.0]),
                (vec![0.0, 1.0, -0.5], vec![0.3, 3.0, -1.0]),
            ],
            DEFAULT_DELTA,
        )
        .unwrap();
        let g = DiagonalShift::new(vec![0.1, 1.0, 10.0]).unwrap();
        let cfg = IterativeConfig {
            max_iterations: Some(1),
            ..IterativeConfig::default()
        };
        match cg_solve(&pairs, &g, &[1.0, 1.0, 1.0], &cfg) {
            Err(Error::NotConverged {
                iterations, best, ..
            }) => {
                assert_eq!(iterations, 1);
                assert_eq!(best.len(), 3);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_config() {
        let pairs = LbfgsPairs::new(1, 1).unwrap();
        let g = ScalarShift::new(1.0, 1).unwrap();
        let cfg = IterativeConfig {
            tol: 0.0,
            ..IterativeConfig::default()
        };
        assert!(cg_solve(&pairs, &g, &[1.0], &cfg).is_err());
    }
}
