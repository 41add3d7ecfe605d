//! Direct solves with `B_k + G` by repeated Sherman-Morrison updates.
//!
//! Writing `B_k + G` as a chain of symmetric rank-one updates of
//! `C_0 = I / gamma + G`,
//!
//! ```text
//! C_{i+1} = C_i + (-1)^{i+1} u_i u_i^T,     C_{2k} = B_k + G,
//! ```
//!
//! with `u_{2j} = a_j` and `u_{2j+1} = b_j` (see [`UnrolledFactors`]), the
//! inverse unrolls into
//!
//! ```text
//! C_{2k}^{-1} z = C_0^{-1} z + sum_i (-1)^i tau_i (p_i . z) p_i
//! p_i   = C_i^{-1} u_i = C_0^{-1} u_i + sum_{l<i} (-1)^l tau_l (p_l . u_i) p_l
//! tau_i = 1 / (1 + (-1)^{i+1} u_i . p_i)
//! ```
//!
//! The `p_i` and `tau_i` depend only on the pairs and `G`, so they are
//! computed once by [`precompute`] and reused for every right-hand side.
//! Only solves with `G + I / gamma` and length-n inner products are needed.
//!
//! The even-index denominators `1 - u_i . p_i` are the only place the
//! recursion can lose accuracy. When every stored curvature is at least
//! `delta`, `‖Y‖_F^2 <= eta` and `gamma * theta_min(G) > epsilon`, they stay
//! above `theta_min / (1/gamma + eta/delta + theta_min)`. [`check_guard`]
//! tests those hypotheses up front and [`precompute`] checks the bound on
//! every denominator it forms.

use std::fmt;
use std::sync::Arc;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::lbfgs::{LbfgsPairs, UnrolledFactors, DEFAULT_DELTA};
use crate::linalg::{caxpy, cdot, dot, norm2, OpCounters};
use crate::shift::ShiftOperator;

/// Hypotheses enforced before a recursion solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuardParams {
    /// Curvature floor: every `y_i^T s_i >= delta`.
    pub delta: f64,
    /// Budget on `‖Y‖_F^2`.
    pub eta: f64,
    /// Floor on `gamma * theta_min(G)`.
    pub epsilon: f64,
    /// Relative margin allowed below the denominator bound.
    pub slack_fraction: f64,
}

impl Default for GuardParams {
    fn default() -> Self {
        GuardParams {
            delta: DEFAULT_DELTA,
            eta: 1e8,
            epsilon: 1e-4,
            slack_fraction: 1e-2,
        }
    }
}

impl GuardParams {
    fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if ok(self.delta) && ok(self.eta) && ok(self.epsilon) && ok(self.slack_fraction) {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "guard parameters must be positive: {self:?}"
            )))
        }
    }

    /// `min{1, theta / (1/gamma + eta/delta + theta)}`: the lower bound on
    /// every recursion denominator under the guard hypotheses.
    pub fn denominator_floor(&self, gamma: f64, theta_min: f64) -> f64 {
        lemma_bound(1.0 / gamma, self.eta, self.delta, theta_min).min(1.0)
    }
}

/// `theta / (inv_gamma + frob_sq / delta + theta)`.
pub fn lemma_bound(inv_gamma: f64, frob_sq: f64, delta: f64, theta_min: f64) -> f64 {
    theta_min / (inv_gamma + frob_sq / delta + theta_min)
}

/// Which guard hypothesis failed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GuardRejection {
    Curvature { index: usize, curvature: f64, delta: f64 },
    Frobenius { frob_sq: f64, eta: f64 },
    Scaling { product: f64, epsilon: f64 },
}

impl fmt::Display for GuardRejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GuardRejection::Curvature { index, curvature, delta } => write!(
                f,
                "curvature y_{index}^T s_{index} = {curvature:e} below delta = {delta:e}"
            ),
            GuardRejection::Frobenius { frob_sq, eta } => {
                write!(f, "‖Y‖_F^2 = {frob_sq:e} exceeds eta = {eta:e}")
            }
            GuardRejection::Scaling { product, epsilon } => write!(
                f,
                "gamma * theta_min = {product:e} not above epsilon = {epsilon:e}"
            ),
        }
    }
}

impl GuardRejection {
    pub fn as_str(&self) -> &'static str {
        match self {
            GuardRejection::Curvature { .. } => "curvature",
            GuardRejection::Frobenius { .. } => "frobenius",
            GuardRejection::Scaling { .. } => "scaling",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GuardVerdict {
    Ok,
    Reject(GuardRejection),
}

impl GuardVerdict {
    pub fn is_ok(&self) -> bool {
        matches!(self, GuardVerdict::Ok)
    }
}

/// Checks the stability hypotheses. On rejection the caller should discard
/// every pair and restart (see [`solve_or_restart`]).
pub fn check_guard<G: ShiftOperator + ?Sized>(
    pairs: &LbfgsPairs,
    g: &G,
    guard: &GuardParams,
) -> GuardVerdict {
    guard_counted(pairs, g, guard, &mut OpCounters::default())
}

fn guard_counted<G: ShiftOperator + ?Sized>(
    pairs: &LbfgsPairs,
    g: &G,
    guard: &GuardParams,
    c: &mut OpCounters,
) -> GuardVerdict {
    if let Some((index, curvature)) = pairs
        .curvatures()
        .enumerate()
        .find(|(_, cv)| !(*cv >= guard.delta))
    {
        return GuardVerdict::Reject(GuardRejection::Curvature {
            index,
            curvature,
            delta: guard.delta,
        });
    }
    let frob_sq: f64 = pairs.y_vectors().map(|y| cdot(c, y, y)).sum();
    if !(frob_sq <= guard.eta) {
        return GuardVerdict::Reject(GuardRejection::Frobenius {
            frob_sq,
            eta: guard.eta,
        });
    }
    let product = pairs.gamma() * g.theta_min();
    if !(product > guard.epsilon) {
        return GuardVerdict::Reject(GuardRejection::Scaling {
            product,
            epsilon: guard.epsilon,
        });
    }
    GuardVerdict::Ok
}

/// Recursion budgets in inner products and vector updates for `k` pairs.
pub mod budget {
    /// Inner products of the recursion proper: `2k^2 + 5k + 3`.
    pub fn recursion_inner_products(k: usize) -> usize {
        2 * k * k + 5 * k + 3
    }

    /// Inner products for unrolling the BFGS factors: `k^2 + k`.
    pub fn unrolling_inner_products(k: usize) -> usize {
        k * k + k
    }

    /// Vector updates of the recursion proper: `2k^2 - 2k + 1`.
    pub fn recursion_vector_updates(k: usize) -> usize {
        2 * k * k + 1 - 2 * k
    }

    /// Allowed excess over the published counts.
    pub fn slack(k: usize) -> usize {
        4 * k
    }
}

/// Solver tag carried by a [`SolveReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    Recursion,
    Cg,
    PcgDiag,
    DenseOracle,
    NaiveWrong,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Recursion => "recursion",
            Method::Cg => "cg",
            Method::PcgDiag => "pcg",
            Method::DenseOracle => "oracle",
            Method::NaiveWrong => "naive",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "recursion" => Ok(Method::Recursion),
            "cg" => Ok(Method::Cg),
            "pcg" | "pcg_diag" => Ok(Method::PcgDiag),
            "oracle" | "dense" => Ok(Method::DenseOracle),
            "naive" => Ok(Method::NaiveWrong),
            other => Err(Error::InvalidArgument(format!("unknown method '{other}'"))),
        }
    }
}

/// Solution plus instrumentation.
#[derive(Debug, Clone)]
pub struct SolveReport {
    pub x: Vec<f64>,
    /// `‖(B_k + G) x - y‖ / ‖y‖`; not included in `counters`.
    pub rel_residual: f64,
    /// Seconds spent in the solve itself.
    pub wall_time: f64,
    /// Iterations for iterative methods, 0 for direct ones.
    pub iterations: usize,
    pub counters: OpCounters,
    /// Cost of building the unrolled factors (zero when not applicable).
    pub unrolling: OpCounters,
    pub method: Method,
    /// Set when PCG fell back to plain CG.
    pub preconditioner_fallback: bool,
}

impl SolveReport {
    pub fn total_inner_products(&self) -> usize {
        self.counters.inner_products + self.unrolling.inner_products
    }
}

/// How the right-hand side is folded through the update chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OuterUpdate {
    /// `x += (-1)^i tau_i (p_i . y) p_i`, inner products against the
    /// original right-hand side.
    AgainstRhs,
    /// `x += (-1)^i tau_i (u_i . x) p_i`, carrying `x = C_i^{-1} y`.
    Running,
    /// `x += (-1)^{i+1} tau_i (p_i . x) p_i`. This is **wrong** and exists
    /// only so regression tests can confirm it is detected.
    FlippedSign,
}

/// Precomputed recursion data for one `(pairs, G)` combination.
///
/// Immutable once built; [`ShiftedSolverState::solve`] may be called
/// concurrently from many threads.
#[derive(Debug, Clone)]
pub struct ShiftedSolverState {
    factors: Arc<UnrolledFactors>,
    p: Vec<Vec<f64>>,
    tau: Vec<f64>,
    denominators: Vec<f64>,
    alpha: f64,
    theta_min: f64,
    guard: GuardParams,
    n: usize,
    counters: OpCounters,
}

/// Builds the `p_i` and `tau_i` for `pairs` and `g`.
///
/// Fails with [`Error::GuardRejected`] if the guard rejects the pairs and
/// with [`Error::Stability`] if any denominator falls below the guarded
/// floor.
pub fn precompute<G: ShiftOperator + ?Sized>(
    pairs: &LbfgsPairs,
    g: &G,
    guard: &GuardParams,
) -> Result<ShiftedSolverState> {
    guard.validate()?;
    let n = pairs.dim();
    Error::check_dim(n, g.dim())?;

    let mut c = OpCounters::default();
    if let GuardVerdict::Reject(r) = guard_counted(pairs, g, guard, &mut c) {
        return Err(Error::GuardRejected(r));
    }

    let factors = pairs.unrolled()?;
    let alpha = 1.0 / pairs.gamma();
    let theta_min = g.theta_min();
    let floor = guard.denominator_floor(pairs.gamma(), theta_min);
    let min_allowed = floor - guard.slack_fraction * floor;

    let m = 2 * pairs.len();
    let mut p: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut tau = Vec::with_capacity(m);
    let mut denominators = Vec::with_capacity(m);

    for j in 0..m {
        let u = factors.u(j);
        let mut pj = g.solve_shifted(alpha, u)?;
        c.shift_solves += 1;
        for i in 0..j {
            let coef = sign(i) * tau[i] * cdot(&mut c, &p[i], u);
            caxpy(&mut c, coef, &p[i], &mut pj);
        }
        let denom = 1.0 - sign(j) * cdot(&mut c, &pj, u);
        let stable = if j % 2 == 0 {
            denom >= min_allowed
        } else {
            denom > 0.0
        };
        if !(stable && denom.is_finite()) {
            return Err(Error::Stability {
                index: j,
                denominator: denom,
                bound: min_allowed,
            });
        }
        p.push(pj);
        tau.push(1.0 / denom);
        denominators.push(denom);
    }

    Ok(ShiftedSolverState {
        factors,
        p,
        tau,
        denominators,
        alpha,
        theta_min,
        guard: *guard,
        n,
        counters: c,
    })
}

/// `(-1)^i`
#[inline]
fn sign(i: usize) -> f64 {
    if i % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl ShiftedSolverState {
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of pairs `k`.
    pub fn pairs_len(&self) -> usize {
        self.p.len() / 2
    }

    /// The inner shift `1 / gamma`, so `C_0 = G + alpha I`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta_min(&self) -> f64 {
        self.theta_min
    }

    pub fn guard(&self) -> &GuardParams {
        &self.guard
    }

    pub fn factors(&self) -> &UnrolledFactors {
        &self.factors
    }

    pub fn u(&self, i: usize) -> &[f64] {
        self.factors.u(i)
    }

    pub fn p(&self, i: usize) -> &[f64] {
        &self.p[i]
    }

    pub fn tau(&self) -> &[f64] {
        &self.tau
    }

    /// `1 + (-1)^{i+1} u_i . p_i` for each `i`.
    pub fn denominators(&self) -> &[f64] {
        &self.denominators
    }

    /// Work done by the guard check and precomputation.
    pub fn counters(&self) -> OpCounters {
        self.counters
    }

    /// `x = (B_k + G)^{-1} y`, with the residual check.
    pub fn solve<G: ShiftOperator + ?Sized>(&self, g: &G, y: &[f64]) -> Result<SolveReport> {
        self.solve_with(g, y, OuterUpdate::AgainstRhs)
    }

    /// As [`solve`](Self::solve), choosing the form of the outer update.
    pub fn solve_with<G: ShiftOperator + ?Sized>(
        &self,
        g: &G,
        y: &[f64],
        update: OuterUpdate,
    ) -> Result<SolveReport> {
        let start = Instant::now();
        let mut c = OpCounters::default();
        let x = self.apply_inverse(g, y, update, &mut c)?;
        let wall_time = start.elapsed().as_secs_f64();
        let rel_residual = residual_from_factors(&self.factors, g, &x, y);
        Ok(SolveReport {
            x,
            rel_residual,
            wall_time,
            iterations: 0,
            counters: c,
            unrolling: OpCounters::default(),
            method: Method::Recursion,
            preconditioner_fallback: false,
        })
    }

    fn apply_inverse<G: ShiftOperator + ?Sized>(
        &self,
        g: &G,
        y: &[f64],
        update: OuterUpdate,
        c: &mut OpCounters,
    ) -> Result<Vec<f64>> {
        Error::check_dim(self.n, y.len())?;
        Error::check_dim(self.n, g.dim())?;
        let mut x = g.solve_shifted(self.alpha, y)?;
        c.shift_solves += 1;
        for (i, (p, tau)) in self.p.iter().zip(&self.tau).enumerate() {
            let coef = match update {
                OuterUpdate::AgainstRhs => sign(i) * tau * cdot(c, p, y),
                OuterUpdate::Running => sign(i) * tau * cdot(c, self.factors.u(i), &x),
                OuterUpdate::FlippedSign => -sign(i) * tau * cdot(c, p, &x),
            };
            caxpy(c, coef, p, &mut x);
        }
        Ok(x)
    }

    /// Number of even-index denominators below
    /// `theta / (1/gamma + ‖Y‖_F^2 / delta_min + theta)` less the slack,
    /// plus odd-index `tau` outside `(0, 1)`.
    pub fn stability_violations(&self, pairs: &LbfgsPairs) -> usize {
        let frob_sq = pairs.y_frobenius_sq(pairs.len());
        let delta_min = pairs.min_curvature().unwrap_or(f64::INFINITY);
        let bound = lemma_bound(self.alpha, frob_sq, delta_min, self.theta_min);
        let min_allowed = bound - self.guard.slack_fraction * bound;
        self.denominators
            .iter()
            .zip(&self.tau)
            .enumerate()
            .filter(|(i, (d, t))| {
                if i % 2 == 0 {
                    !(**d >= min_allowed && **t >= 1.0 && t.is_finite())
                } else {
                    !(**t > 0.0 && **t < 1.0)
                }
            })
            .count()
    }
}

/// `(B_k + G)^{-1} y`: guard check, precomputation and one solve.
pub fn solve_full<G: ShiftOperator + ?Sized>(
    pairs: &LbfgsPairs,
    g: &G,
    y: &[f64],
    guard: &GuardParams,
) -> Result<SolveReport> {
    Error::check_dim(pairs.dim(), y.len())?;
    let start = Instant::now();
    let state = precompute(pairs, g, guard)?;
    let mut c = state.counters();
    let x = state.apply_inverse(g, y, OuterUpdate::AgainstRhs, &mut c)?;
    let wall_time = start.elapsed().as_secs_f64();

    let k = pairs.len();
    debug_assert!(
        c.inner_products + state.factors.counters.inner_products
            <= budget::recursion_inner_products(k)
                + budget::unrolling_inner_products(k)
                + budget::slack(k)
    );
    debug_assert!(c.vector_updates <= budget::recursion_vector_updates(k) + budget::slack(k));
    debug_assert_eq!(c.shift_solves, 2 * k + 1);

    let rel_residual = residual_from_factors(&state.factors, g, &x, y);
    Ok(SolveReport {
        x,
        rel_residual,
        wall_time,
        iterations: 0,
        counters: c,
        unrolling: state.factors.counters,
        method: Method::Recursion,
        preconditioner_fallback: false,
    })
}

/// Like [`solve_full`], but on guard rejection discards every stored pair
/// and solves with `B_0 + G` instead. Returns whether a restart happened.
pub fn solve_or_restart<G: ShiftOperator + ?Sized>(
    pairs: &mut LbfgsPairs,
    g: &G,
    y: &[f64],
    guard: &GuardParams,
) -> Result<(SolveReport, bool)> {
    match solve_full(pairs, g, y, guard) {
        Err(Error::GuardRejected(_)) if !pairs.is_empty() => {
            pairs.clear();
            solve_full(pairs, g, y, guard).map(|r| (r, true))
        }
        other => other.map(|r| (r, false)),
    }
}

pub(crate) fn residual_from_factors<G: ShiftOperator + ?Sized>(
    factors: &UnrolledFactors,
    g: &G,
    x: &[f64],
    y: &[f64],
) -> f64 {
    let mut scratch = OpCounters::default();
    let mut r = factors.apply(factors.len(), x, &mut scratch);
    for ((ri, gi), yi) in r.iter_mut().zip(g.apply(x)).zip(y) {
        *ri += gi - yi;
    }
    let rn = norm2(&r);
    let yn = dot(y, y).sqrt();
    if yn > 0.0 {
        rn / yn
    } else {
        rn
    }
}
