//! Limited-memory BFGS pair storage and matrix-free operations with `B_k`.
//!
//! `B_k` is never formed. It is represented by the stored pairs `(s_i, y_i)`
//! and the scaling `gamma` (with `B_0 = I / gamma`), and applied through the
//! unrolled form
//!
//! ```text
//! B_j v = v / gamma + sum_{i<j} (b_i . v) b_i - (a_i . v) a_i
//! a_i = B_i s_i / sqrt(s_i . B_i s_i),   b_i = y_i / sqrt(y_i . s_i)
//! ```

use std::collections::VecDeque;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::linalg::{caxpy, cdot, dot, scale, OpCounters};
use crate::shift::ShiftOperator;

/// Default maximum number of stored pairs.
pub const DEFAULT_CAPACITY: usize = 6;

/// Default curvature floor: pairs with `y^T s` below this are rejected.
pub const DEFAULT_DELTA: f64 = 1e-8;

/// Result of [`LbfgsPairs::push_pair`].
#[must_use]
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PushOutcome {
    /// The pair was stored. `evicted` is set when the oldest pair was
    /// dropped to make room.
    Accepted { evicted: bool },
    /// `y^T s` was below the curvature floor; the store is unchanged.
    Rejected { curvature: f64 },
}

impl PushOutcome {
    pub fn is_accepted(&self) -> bool {
        matches!(self, PushOutcome::Accepted { .. })
    }
}

/// The stored update pairs of an L-BFGS matrix.
///
/// Pairs are kept oldest first. At most `capacity` pairs are held; pushing
/// onto a full store evicts the oldest. Every push recomputes `gamma` from
/// the newest pair, which changes `B_0` for all stored updates, so the
/// cached unrolled factors are dropped on any mutation.
#[derive(Debug, Clone)]
pub struct LbfgsPairs {
    n: usize,
    capacity: usize,
    s: VecDeque<Vec<f64>>,
    y: VecDeque<Vec<f64>>,
    curvatures: VecDeque<f64>,
    gamma: f64,
    factors: OnceLock<Arc<UnrolledFactors>>,
}

impl LbfgsPairs {
    /// Empty store for vectors of dimension `n`, with `gamma = 1`.
    pub fn new(n: usize, capacity: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if capacity == 0 {
            return Err(Error::InvalidArgument("capacity must be positive".into()));
        }
        Ok(LbfgsPairs {
            n,
            capacity,
            s: VecDeque::with_capacity(capacity),
            y: VecDeque::with_capacity(capacity),
            curvatures: VecDeque::with_capacity(capacity),
            gamma: 1.0,
            factors: OnceLock::new(),
        })
    }

    /// Builds a store by pushing `pairs` in order. Fails if any pair is
    /// rejected, since callers of this constructor expect all of them kept.
    pub fn from_pairs<I>(n: usize, capacity: usize, pairs: I, delta: f64) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<f64>, Vec<f64>)>,
    {
        let mut store = LbfgsPairs::new(n, capacity)?;
        for (i, (s, y)) in pairs.into_iter().enumerate() {
            if let PushOutcome::Rejected { curvature } = store.push_pair(s, y, delta)? {
                return Err(Error::InvalidArgument(format!(
                    "pair {i} has curvature {curvature:e} below floor {delta:e}"
                )));
            }
        }
        Ok(store)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of stored pairs `k`.
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn s(&self, i: usize) -> &[f64] {
        &self.s[i]
    }

    pub fn y(&self, i: usize) -> &[f64] {
        &self.y[i]
    }

    /// Cached `y_i^T s_i`.
    pub fn curvature(&self, i: usize) -> f64 {
        self.curvatures[i]
    }

    pub fn curvatures(&self) -> impl Iterator<Item = f64> + '_ {
        self.curvatures.iter().copied()
    }

    pub fn min_curvature(&self) -> Option<f64> {
        self.curvatures.iter().copied().reduce(f64::min)
    }

    pub fn s_vectors(&self) -> impl Iterator<Item = &[f64]> {
        self.s.iter().map(Vec::as_slice)
    }

    pub fn y_vectors(&self) -> impl Iterator<Item = &[f64]> {
        self.y.iter().map(Vec::as_slice)
    }

    /// Squared Frobenius norm of the first `count` columns of `Y`.
    pub fn y_frobenius_sq(&self, count: usize) -> f64 {
        self.y.iter().take(count).map(|y| dot(y, y)).sum()
    }

    /// Appends `(s, y)` if `y^T s >= delta`, evicting the oldest pair when
    /// full. A rejected pair is reported, not treated as an error.
    pub fn push_pair(&mut self, s: Vec<f64>, y: Vec<f64>, delta: f64) -> Result<PushOutcome> {
        Error::check_dim(self.n, s.len())?;
        Error::check_dim(self.n, y.len())?;
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "curvature floor must be positive, got {delta}"
            )));
        }
        let curvature = dot(&y, &s);
        if !(curvature >= delta && curvature.is_finite()) {
            return Ok(PushOutcome::Rejected { curvature });
        }
        let yy = dot(&y, &y);

        let evicted = self.s.len() == self.capacity;
        if evicted {
            self.s.pop_front();
            self.y.pop_front();
            self.curvatures.pop_front();
        }
        self.s.push_back(s);
        self.y.push_back(y);
        self.curvatures.push_back(curvature);
        self.gamma = curvature / yy;
        self.factors = OnceLock::new();
        Ok(PushOutcome::Accepted { evicted })
    }

    /// Overrides the `B_0` scaling. Subsequent pushes recompute it again.
    pub fn set_gamma(&mut self, gamma: f64) -> Result<()> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "gamma must be positive and finite, got {gamma}"
            )));
        }
        self.gamma = gamma;
        self.factors = OnceLock::new();
        Ok(())
    }

    /// Discards every pair and resets `gamma` to 1 (restart).
    pub fn clear(&mut self) {
        self.s.clear();
        self.y.clear();
        self.curvatures.clear();
        self.gamma = 1.0;
        self.factors = OnceLock::new();
    }

    /// Drops the cached unrolled factors so the next use rebuilds them.
    pub fn reset_factor_cache(&mut self) {
        self.factors = OnceLock::new();
    }

    /// Unrolled factors, built on first use and cached until the next
    /// mutation.
    pub fn unrolled(&self) -> Result<Arc<UnrolledFactors>> {
        if let Some(f) = self.factors.get() {
            return Ok(Arc::clone(f));
        }
        let built = Arc::new(self.build_unrolled()?);
        // A concurrent reader may have won the race; either value is identical.
        let _ = self.factors.set(Arc::clone(&built));
        Ok(built)
    }

    /// Computes the unrolled factors `{a_j, b_j}` without touching the cache.
    pub fn build_unrolled(&self) -> Result<UnrolledFactors> {
        let k = self.len();
        let inv_gamma = 1.0 / self.gamma;
        let mut counters = OpCounters::default();
        let mut a: Vec<Vec<f64>> = Vec::with_capacity(k);
        let mut b: Vec<Vec<f64>> = Vec::with_capacity(k);

        for j in 0..k {
            let s = &self.s[j];
            let mut bs: Vec<f64> = s.iter().map(|x| x * inv_gamma).collect();
            for i in 0..j {
                let bi = cdot(&mut counters, &b[i], s);
                let ai = cdot(&mut counters, &a[i], s);
                caxpy(&mut counters, bi, &b[i], &mut bs);
                caxpy(&mut counters, -ai, &a[i], &mut bs);
            }
            let sbs = cdot(&mut counters, s, &bs);
            if !(sbs > 0.0 && sbs.is_finite()) {
                return Err(Error::Inconsistent { index: j, value: sbs });
            }
            scale(1.0 / sbs.sqrt(), &mut bs);
            a.push(bs);

            let mut yj = self.y[j].clone();
            scale(1.0 / self.curvatures[j].sqrt(), &mut yj);
            b.push(yj);
        }

        Ok(UnrolledFactors {
            a,
            b,
            gamma: self.gamma,
            counters,
        })
    }

    /// `B_j v` for `0 <= j <= k`.
    pub fn apply_b(&self, j: usize, v: &[f64]) -> Result<Vec<f64>> {
        if j > self.len() {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: self.len(),
            });
        }
        Error::check_dim(self.n, v.len())?;
        let factors = self.unrolled()?;
        let mut c = OpCounters::default();
        Ok(factors.apply(j, v, &mut c))
    }

    /// `B_k v`.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.apply_b(self.len(), v)
    }

    /// `B_k^{-1} r` by the two-loop recursion.
    pub fn two_loop_solve(&self, r: &[f64]) -> Result<Vec<f64>> {
        Error::check_dim(self.n, r.len())?;
        let (alphas, q) = self.first_loop(r);
        let x: Vec<f64> = q.iter().map(|v| v * self.gamma).collect();
        Ok(self.second_loop(&alphas, x))
    }

    /// Two-loop recursion with the middle step `B_0^{-1} q` replaced by
    /// `(B_0 + G)^{-1} q`.
    ///
    /// This does **not** solve `(B_k + G) x = r` once `k >= 1`: the
    /// recursion then inverts a different matrix whose updates are built on
    /// `B_0 + G`. Kept as a negative control for tests and benchmarks.
    pub fn naive_shifted_two_loop<G: ShiftOperator + ?Sized>(
        &self,
        g: &G,
        r: &[f64],
    ) -> Result<Vec<f64>> {
        Error::check_dim(self.n, r.len())?;
        Error::check_dim(self.n, g.dim())?;
        let (alphas, q) = self.first_loop(r);
        let x = g.solve_shifted(1.0 / self.gamma, &q)?;
        Ok(self.second_loop(&alphas, x))
    }

    fn first_loop(&self, r: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let k = self.len();
        let mut q = r.to_vec();
        let mut alphas = vec![0.0; k];
        for i in (0..k).rev() {
            alphas[i] = dot(&self.s[i], &q) / self.curvatures[i];
            crate::linalg::axpy(-alphas[i], &self.y[i], &mut q);
        }
        (alphas, q)
    }

    fn second_loop(&self, alphas: &[f64], mut x: Vec<f64>) -> Vec<f64> {
        for (i, alpha) in alphas.iter().enumerate() {
            let beta = dot(&self.y[i], &x) / self.curvatures[i];
            crate::linalg::axpy(alpha - beta, &self.s[i], &mut x);
        }
        x
    }
}

/// Normalized rank-one factors of `B_k`.
///
/// `a_j = B_j s_j / sqrt(s_j^T B_j s_j)` (subtracted) and
/// `b_j = y_j / sqrt(y_j^T s_j)` (added), so that
/// `B_k = I / gamma + sum_j (b_j b_j^T - a_j a_j^T)`.
#[derive(Debug, Clone)]
pub struct UnrolledFactors {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<Vec<f64>>,
    pub gamma: f64,
    /// Work spent building the factors.
    pub counters: OpCounters,
}

impl UnrolledFactors {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// The interleaved update vector `u_i`: `a_{i/2}` for even `i`,
    /// `b_{(i-1)/2}` for odd `i`.
    pub fn u(&self, i: usize) -> &[f64] {
        if i % 2 == 0 {
            &self.a[i / 2]
        } else {
            &self.b[i / 2]
        }
    }

    /// `B_j v` using the first `j` factor pairs.
    pub fn apply(&self, j: usize, v: &[f64], c: &mut OpCounters) -> Vec<f64> {
        let mut out: Vec<f64> = v.iter().map(|x| x / self.gamma).collect();
        for i in 0..j {
            let bv = cdot(c, &self.b[i], v);
            let av = cdot(c, &self.a[i], v);
            caxpy(c, bv, &self.b[i], &mut out);
            caxpy(c, -av, &self.a[i], &mut out);
        }
        out
    }

    /// `diag(B_k)`.
    pub fn diagonal(&self) -> Vec<f64> {
        let n = self.a.first().map_or(0, Vec::len);
        let mut d = vec![1.0 / self.gamma; n];
        for (a, b) in self.a.iter().zip(&self.b) {
            for ((di, ai), bi) in d.iter_mut().zip(a).zip(b) {
                *di += bi * bi - ai * ai;
            }
        }
        d
    }
}
