//! Synthetic test instances.
//!
//! All randomness comes from ChaCha8 seeded with the caller's 64-bit seed.
//! Each kind of quantity draws from its own stream (see [`stream`]) so that,
//! for example, changing `k` does not change the shift drawn for the same
//! seed.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Open01, StandardNormal};

use crate::error::{Error, Result};
use crate::lbfgs::{LbfgsPairs, PushOutcome, DEFAULT_CAPACITY, DEFAULT_DELTA};
use crate::linalg::{dot, norm2};
use crate::shift::{DiagonalShift, ScalarShift, Shift, ShiftKind, ShiftOperator, TridiagonalShift};
use crate::shifted::{solve_full, GuardParams, GuardRejection, SolveReport};

/// RNG stream ids.
pub mod stream {
    pub const PAIRS: u64 = 1;
    pub const SHIFT: u64 = 2;
    pub const RHS: u64 = 3;
    pub const SIGMA: u64 = 4;
    pub const OBJECTIVE: u64 = 5;
}

pub fn rng_for(seed: u64, stream_id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream_id);
    rng
}

fn open01(rng: &mut ChaCha8Rng) -> f64 {
    Open01.sample(rng)
}

fn normal_vec(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n)
        .map(|_| { let z: f64 = StandardNormal.sample(rng); scale * z })
        .collect()
}

/// Random symmetric tridiagonal shift: diagonal `2 + sigma + U(0,1)`,
/// off-diagonal `U(-1, 0)`. Its Gershgorin floor is above `sigma`.
pub fn gen_tridiagonal_shift(n: usize, sigma: f64, seed: u64) -> Result<TridiagonalShift> {
    check_sigma(sigma)?;
    let mut rng = rng_for(seed, stream::SHIFT);
    let main: Vec<f64> = (0..n).map(|_| 2.0 + sigma + open01(&mut rng)).collect();
    let off: Vec<f64> = (0..n.saturating_sub(1)).map(|_| -open01(&mut rng)).collect();
    TridiagonalShift::new(main, off)
}

/// Random positive diagonal shift with entries `sigma + 2 U(0,1)`.
pub fn gen_diagonal_shift(n: usize, sigma: f64, seed: u64) -> Result<DiagonalShift> {
    check_sigma(sigma)?;
    let mut rng = rng_for(seed, stream::SHIFT);
    DiagonalShift::new((0..n).map(|_| sigma + 2.0 * open01(&mut rng)).collect())
}

pub fn gen_shift(kind: ShiftKind, n: usize, sigma: f64, seed: u64) -> Result<Shift> {
    Ok(match kind {
        ShiftKind::Scalar => ScalarShift::new(sigma, n)?.into(),
        ShiftKind::Diagonal => gen_diagonal_shift(n, sigma, seed)?.into(),
        ShiftKind::Tridiagonal => gen_tridiagonal_shift(n, sigma, seed)?.into(),
    })
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma > 0.0 && sigma.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("sigma must be positive, got {sigma}")))
    }
}

/// `k` pairs from a random convex quadratic: `y_i = Q s_i` with
/// `Q = I + sum_r c_r w_r w_r^T` (three terms, `c_r` in `(0.5, 5)`), and
/// `s_i ~ N(0, I/n)`. Capacity is `max(k, DEFAULT_CAPACITY)`.
pub fn gen_random_pairs(n: usize, k: usize, seed: u64, delta: f64) -> Result<LbfgsPairs> {
    gen_random_pairs_with_capacity(n, k, k.max(DEFAULT_CAPACITY), seed, delta)
}

pub fn gen_random_pairs_with_capacity(
    n: usize,
    k: usize,
    capacity: usize,
    seed: u64,
    delta: f64,
) -> Result<LbfgsPairs> {
    if k > capacity {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds capacity {capacity}"
        )));
    }
    let mut pairs = LbfgsPairs::new(n, capacity)?;
    let mut rng = rng_for(seed, stream::PAIRS);
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    let terms: Vec<(f64, Vec<f64>)> = (0..3)
        .map(|_| {
            let c = 0.5 + 4.5 * open01(&mut rng);
            (c, normal_vec(&mut rng, n, inv_sqrt_n))
        })
        .collect();
    let apply_q = |s: &[f64]| -> Vec<f64> {
        let mut y = s.to_vec();
        for (c, w) in &terms {
            let coef = c * dot(w, s);
            for (yi, wi) in y.iter_mut().zip(w) {
                *yi += coef * wi;
            }
        }
        y
    };

    let mut attempts = 0;
    while pairs.len() < k {
        attempts += 1;
        if attempts > 100 * (k + 1) {
            return Err(Error::InvalidArgument(format!(
                "could not draw pairs with curvature >= {delta:e}"
            )));
        }
        let s = normal_vec(&mut rng, n, inv_sqrt_n);
        let y = apply_q(&s);
        let _ = pairs.push_pair(s, y, delta)?;
    }
    Ok(pairs)
}

/// Standard normal right-hand side.
pub fn gen_rhs(n: usize, seed: u64) -> Vec<f64> {
    normal_vec(&mut rng_for(seed, stream::RHS), n, 1.0)
}

/// `U(0, 1)` draw for the scalar shift, as used for trust-region systems.
pub fn gen_sigma(seed: u64) -> f64 {
    open01(&mut rng_for(seed, stream::SIGMA))
}

/// Smooth built-in test functions.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// `f(x) = 1/2 x^T diag(d) x`, started from all ones.
    Quadratic(Vec<f64>),
    /// `sum_i 100 (x_{2i+1} - x_{2i}^2)^2 + (1 - x_{2i})^2` on even `n`,
    /// started from `(-1.2, 1, -1.2, 1, ...)`.
    ExtendedRosenbrock(usize),
}

impl Objective {
    pub fn dim(&self) -> usize {
        match self {
            Objective::Quadratic(d) => d.len(),
            Objective::ExtendedRosenbrock(n) => *n,
        }
    }

    pub fn start(&self) -> Vec<f64> {
        match self {
            Objective::Quadratic(d) => vec![1.0; d.len()],
            Objective::ExtendedRosenbrock(n) => (0..*n)
                .map(|i| if i % 2 == 0 { -1.2 } else { 1.0 })
                .collect(),
        }
    }

    pub fn value_and_gradient(&self, x: &[f64]) -> (f64, Vec<f64>) {
        match self {
            Objective::Quadratic(d) => {
                let g: Vec<f64> = x.iter().zip(d).map(|(xi, di)| xi * di).collect();
                (0.5 * dot(x, &g), g)
            }
            Objective::ExtendedRosenbrock(_) => {
                let mut f = 0.0;
                let mut g = vec![0.0; x.len()];
                for i in (0..x.len()).step_by(2) {
                    let t = x[i + 1] - x[i] * x[i];
                    let u = 1.0 - x[i];
                    f += 100.0 * t * t + u * u;
                    g[i] = -400.0 * x[i] * t - 2.0 * u;
                    g[i + 1] = 200.0 * t;
                }
                (f, g)
            }
        }
    }
}

/// Objective selector for problem specs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObjectiveKind {
    None,
    Quadratic,
    ExtendedRosenbrock,
}

impl ObjectiveKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ObjectiveKind::None => "none",
            ObjectiveKind::Quadratic => "quadratic",
            ObjectiveKind::ExtendedRosenbrock => "extended_rosenbrock",
        }
    }

    /// The concrete objective at dimension `n`; quadratics draw
    /// `d_i = 1 + 9 U(0,1)` from `seed`.
    pub fn instantiate(&self, n: usize, seed: u64) -> Result<Option<Objective>> {
        match self {
            ObjectiveKind::None => Ok(None),
            ObjectiveKind::Quadratic => {
                let mut rng = rng_for(seed, stream::OBJECTIVE);
                Ok(Some(Objective::Quadratic(
                    (0..n).map(|_| 1.0 + 9.0 * open01(&mut rng)).collect(),
                )))
            }
            ObjectiveKind::ExtendedRosenbrock => {
                if n == 0 || n % 2 != 0 {
                    return Err(Error::InvalidArgument(format!(
                        "extended Rosenbrock needs an even dimension, got {n}"
                    )));
                }
                Ok(Some(Objective::ExtendedRosenbrock(n)))
            }
        }
    }
}

impl fmt::Display for ObjectiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ObjectiveKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(ObjectiveKind::None),
            "quadratic" => Ok(ObjectiveKind::Quadratic),
            "extended_rosenbrock" | "rosenbrock" => Ok(ObjectiveKind::ExtendedRosenbrock),
            other => Err(Error::InvalidArgument(format!("unknown objective '{other}'"))),
        }
    }
}

/// Pairs and final state of a short L-BFGS run.
#[derive(Debug, Clone)]
pub struct LbfgsRun {
    pub pairs: LbfgsPairs,
    pub x: Vec<f64>,
    pub gradient: Vec<f64>,
    pub iterations: usize,
}

const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;
const MAX_EXTRAPOLATIONS: usize = 30;
const GRADIENT_TOL: f64 = 1e-10;

/// Runs L-BFGS on a built-in objective until `num_pairs` pairs are stored.
pub fn run_lbfgs_collect(
    kind: ObjectiveKind,
    n: usize,
    num_pairs: usize,
    seed: u64,
) -> Result<LbfgsRun> {
    let objective = kind
        .instantiate(n, seed)?
        .ok_or_else(|| Error::InvalidArgument("no objective selected".into()))?;
    collect_pairs(&objective, num_pairs, DEFAULT_DELTA)
}

/// L-BFGS with two-loop directions and backtracking Armijo steps (halving
/// from 1). A step whose pair would fail the curvature floor is doubled
/// while it still satisfies Armijo; pairs that still fail are skipped and
/// the run continues.
pub fn collect_pairs(objective: &Objective, num_pairs: usize, delta: f64) -> Result<LbfgsRun> {
    let n = objective.dim();
    let mut pairs = LbfgsPairs::new(n, num_pairs.max(1))?;
    let mut x = objective.start();
    let (mut f, mut g) = objective.value_and_gradient(&x);
    let max_iterations = 100 * (num_pairs + 1);

    for iteration in 0..max_iterations {
        if pairs.len() == num_pairs {
            return Ok(LbfgsRun {
                pairs,
                x,
                gradient: g,
                iterations: iteration,
            });
        }
        if g.iter().all(|gi| gi.abs() <= GRADIENT_TOL) {
            return Err(Error::EarlyConvergence {
                collected: pairs.len(),
                requested: num_pairs,
            });
        }
        let mut d = pairs.two_loop_solve(&g)?;
        d.iter_mut().for_each(|di| *di = -*di);
        let slope = dot(&g, &d);
        if !(slope < 0.0) {
            return Err(Error::LineSearch { iteration });
        }

        let trial_at = |t: f64| {
            let trial: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + t * di).collect();
            let (ft, gt) = objective.value_and_gradient(&trial);
            let armijo = ft.is_finite() && ft <= f + ARMIJO_C1 * t * slope;
            (armijo, trial, ft, gt)
        };
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACKS {
            let (armijo, trial, ft, gt) = trial_at(t);
            if armijo {
                accepted = Some((trial, ft, gt));
                break;
            }
            t *= 0.5;
        }
        let (mut x_new, mut f_new, mut g_new) =
            accepted.ok_or(Error::LineSearch { iteration })?;

        // Through negative curvature the accepted step can give y^T s < delta
        // and the matrix would never change; stretch it while Armijo holds.
        for _ in 0..MAX_EXTRAPOLATIONS {
            let ys: f64 = (0..n).map(|i| (g_new[i] - g[i]) * (x_new[i] - x[i])).sum();
            if ys >= delta {
                break;
            }
            t *= 2.0;
            let (armijo, trial, ft, gt) = trial_at(t);
            if !armijo {
                break;
            }
            (x_new, f_new, g_new) = (trial, ft, gt);
        }

        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        if let PushOutcome::Rejected { .. } = pairs.push_pair(s, y, delta)? {
            // Skipped; keep iterating from the new point.
        }
        x = x_new;
        f = f_new;
        g = g_new;
    }
    if pairs.len() == num_pairs {
        return Ok(LbfgsRun {
            pairs,
            x,
            gradient: g,
            iterations: max_iterations,
        });
    }
    Err(Error::LineSearch {
        iteration: max_iterations,
    })
}

/// The trust-region system `(B + sigma I) s = -g`.
pub fn trust_region_system(
    pairs: &LbfgsPairs,
    gradient: &[f64],
    sigma: f64,
) -> Result<(ScalarShift, Vec<f64>)> {
    Error::check_dim(pairs.dim(), gradient.len())?;
    check_sigma(sigma)?;
    let shift = ScalarShift::new(sigma, pairs.dim())?;
    Ok((shift, gradient.iter().map(|v| -v).collect()))
}

/// Result of [`kkt_block_solve`].
#[derive(Debug, Clone)]
pub struct KktSolution {
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
    /// Relative residual of the full block system.
    pub block_residual: f64,
    /// Report of the inner shifted solve.
    pub report: SolveReport,
}

/// Solves
///
/// ```text
/// [ B + G_inner + 2 A^T D^{-1} A   A^T ] [v1]   [r1]
/// [ A                              D   ] [v2] = [r2]
/// ```
///
/// for diagonal `A = diag(a)` and `D = diag(d) > 0` by the two-step
/// reduction `(B + G_inner + A^T D^{-1} A) v1 = r1 - A^T D^{-1} r2`,
/// `v2 = D^{-1} (r2 - A v1)`. The first system is a shifted L-BFGS system
/// with diagonal (or tridiagonal, if `G_inner` is) shift.
pub fn kkt_block_solve(
    pairs: &LbfgsPairs,
    g_inner: Option<&Shift>,
    a: &[f64],
    d: &[f64],
    r1: &[f64],
    r2: &[f64],
    guard: &GuardParams,
) -> Result<KktSolution> {
    let n = pairs.dim();
    for len in [a.len(), d.len(), r1.len(), r2.len()] {
        Error::check_dim(n, len)?;
    }
    if let Some(i) = d.iter().position(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument(format!(
            "D must be positive; entry {i} is {}",
            d[i]
        )));
    }
    let extra: Vec<f64> = a.iter().zip(d).map(|(ai, di)| ai * ai / di).collect();
    let combined = match g_inner {
        Some(inner) => inner.add_diagonal(&extra)?,
        None => {
            if extra.iter().any(|e| !(*e > 0.0)) {
                return Err(Error::GuardRejected(GuardRejection::Scaling {
                    product: 0.0,
                    epsilon: guard.epsilon,
                }));
            }
            DiagonalShift::new(extra.clone())?.into()
        }
    };

    let rhs: Vec<f64> = (0..n).map(|i| r1[i] - a[i] * r2[i] / d[i]).collect();
    let report = solve_full(pairs, &combined, &rhs, guard)?;
    let v1 = report.x.clone();
    let v2: Vec<f64> = (0..n).map(|i| (r2[i] - a[i] * v1[i]) / d[i]).collect();

    let mut top = pairs.apply(&v1)?;
    if let Some(inner) = g_inner {
        for (t, gv) in top.iter_mut().zip(inner.apply(&v1)) {
            *t += gv;
        }
    }
    let mut sq = 0.0;
    for i in 0..n {
        let t = top[i] + 2.0 * extra[i] * v1[i] + a[i] * v2[i] - r1[i];
        let b = a[i] * v1[i] + d[i] * v2[i] - r2[i];
        sq += t * t + b * b;
    }
    let rhs_norm = (dot(r1, r1) + dot(r2, r2)).sqrt();
    let block_residual = if rhs_norm > 0.0 {
        sq.sqrt() / rhs_norm
    } else {
        sq.sqrt()
    };
    Ok(KktSolution {
        v1,
        v2,
        block_residual,
        report,
    })
}

/// Parameters of a generated benchmark instance.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub n: usize,
    pub k: usize,
    /// Maximum stored pairs `M`.
    pub capacity: usize,
    pub shift_kind: ShiftKind,
    pub sigma: f64,
    pub seed: u64,
    pub objective: ObjectiveKind,
}

impl Default for ProblemSpec {
    fn default() -> Self {
        ProblemSpec {
            n: 10_000,
            k: 5,
            capacity: DEFAULT_CAPACITY,
            shift_kind: ShiftKind::Tridiagonal,
            sigma: 0.1,
            seed: 1,
            objective: ObjectiveKind::None,
        }
    }
}

/// A concrete system `(B_k + G) x = rhs`.
#[derive(Debug, Clone)]
pub struct Instance {
    pub pairs: LbfgsPairs,
    pub shift: Shift,
    pub rhs: Vec<f64>,
}

impl ProblemSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        if self.k > self.capacity {
            return Err(Error::InvalidArgument(format!(
                "k = {} exceeds capacity M = {}",
                self.k, self.capacity
            )));
        }
        check_sigma(self.sigma)
    }

    /// Generates the instance. With an objective, the pairs come from an
    /// L-BFGS run and the right-hand side is the negated final gradient;
    /// otherwise both are random.
    pub fn build(&self) -> Result<Instance> {
        self.validate()?;
        let shift = gen_shift(self.shift_kind, self.n, self.sigma, self.seed)?;
        let (pairs, rhs) = match self.objective.instantiate(self.n, self.seed)? {
            Some(obj) => {
                let run = collect_pairs(&obj, self.k, DEFAULT_DELTA)?;
                let rhs = run.gradient.iter().map(|v| -v).collect();
                (run.pairs, rhs)
            }
            None => (
                gen_random_pairs_with_capacity(
                    self.n,
                    self.k,
                    self.capacity,
                    self.seed,
                    DEFAULT_DELTA,
                )?,
                gen_rhs(self.n, self.seed),
            ),
        };
        Ok(Instance { pairs, shift, rhs })
    }

    /// Flat `key=value` form, one per line.
    pub fn to_kv(&self) -> String {
        format!(
            "n={}\nk={}\nM={}\nshift={}\nsigma={:e}\nseed={}\nobjective={}\n",
            self.n, self.k, self.capacity, self.shift_kind, self.sigma, self.seed, self.objective
        )
    }

    /// Parses the `key=value` form. Unknown keys are errors; missing keys
    /// keep their defaults. `#` starts a comment.
    pub fn from_kv(text: &str, origin: &Path) -> Result<Self> {
        let mut spec = ProblemSpec::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| Error::Parse {
                path: origin.to_path_buf(),
                line: idx + 1,
                msg,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected key=value, got '{line}'")))?;
            let value = value.trim();
            let bad = |e: &dyn fmt::Display| err(format!("bad value for {}: {e}", key.trim()));
            match key.trim() {
                "n" => spec.n = value.parse().map_err(|e| bad(&e))?,
                "k" => spec.k = value.parse().map_err(|e| bad(&e))?,
                "M" | "capacity" => spec.capacity = value.parse().map_err(|e| bad(&e))?,
                "shift" => spec.shift_kind = value.parse().map_err(|e| bad(&e))?,
                "sigma" => spec.sigma = value.parse().map_err(|e| bad(&e))?,
                "seed" => spec.seed = value.parse().map_err(|e| bad(&e))?,
                "objective" => spec.objective = value.parse().map_err(|e| bad(&e))?,
                other => return Err(err(format!("unknown key '{other}'"))),
            }
        }
        Ok(spec)
    }

    pub fn read(path: &Path) -> Result<Self> {
        ProblemSpec::from_kv(&std::fs::read_to_string(path)?, path)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_kv())?;
        Ok(())
    }
}

/// Random `U(lo, hi)` draw, exposed for test-instance sweeps.
pub fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Relative distance between two vectors, `‖a - b‖ / ‖b‖`.
pub fn relative_distance(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm2(&diff) / norm2(b).max(f64::MIN_POSITIVE)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shifted::check_guard;

    #[test]
    fn tridiagonal_entries_in_range() {
        let sigma = 0.1;
        let t = gen_tridiagonal_shift(10_000, sigma, 3).unwrap();
        assert!(t
            .main_diagonal()
            .iter()
            .all(|d| *d > 2.0 + sigma && *d < 3.0 + sigma));
        assert!(t.off_diagonal().iter().all(|e| *e > -1.0 && *e < 0.0));
        assert!(t.theta_min() >= sigma);
    }

    #[test]
    fn tridiagonal_single_row() {
        let t = gen_tridiagonal_shift(1, 0.5, 0).unwrap();
        assert_eq!(t.main_diagonal().len(), 1);
        assert!(t.off_diagonal().is_empty());
    }

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(
            gen_tridiagonal_shift(50, 0.1, 9).unwrap(),
            gen_tridiagonal_shift(50, 0.1, 9).unwrap()
        );
        assert_ne!(
            gen_tridiagonal_shift(50, 0.1, 9).unwrap(),
            gen_tridiagonal_shift(50, 0.1, 10).unwrap()
        );
        let a = gen_random_pairs(20, 3, 4, DEFAULT_DELTA).unwrap();
        let b = gen_random_pairs(20, 3, 4, DEFAULT_DELTA).unwrap();
        for i in 0..3 {
            assert_eq!(a.s(i), b.s(i));
            assert_eq!(a.y(i), b.y(i));
        }
        assert_eq!(gen_rhs(10, 1), gen_rhs(10, 1));
        assert_ne!(gen_rhs(10, 1), gen_rhs(10, 2));
    }

    #[test]
    fn random_pairs_have_positive_curvature() {
        let pairs = gen_random_pairs(30, 7, 1, DEFAULT_DELTA).unwrap();
        assert_eq!(pairs.len(), 7);
        assert!(pairs.curvatures().all(|c| c >= DEFAULT_DELTA));
        let empty = gen_random_pairs(30, 0, 1, DEFAULT_DELTA).unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.gamma(), 1.0);
    }

    #[test]
    fn generated_instances_pass_default_guard() {
        for seed in 0..20 {
            for kind in ShiftKind::ALL {
                let spec = ProblemSpec {
                    n: 40,
                    k: 5,
                    shift_kind: kind,
                    sigma: 0.1,
                    seed,
                    ..ProblemSpec::default()
                };
                let inst = spec.build().unwrap();
                assert!(check_guard(&inst.pairs, &inst.shift, &GuardParams::default()).is_ok());
            }
        }
    }

    #[test]
    fn quadratic_run_collects_exact_differences() {
        let run = run_lbfgs_collect(ObjectiveKind::Quadratic, 50, 5, 2).unwrap();
        let Some(Objective::Quadratic(d)) = ObjectiveKind::Quadratic.instantiate(50, 2).unwrap()
        else {
            unreachable!()
        };
        assert_eq!(run.pairs.len(), 5);
        for i in 0..5 {
            let ds: Vec<f64> = run.pairs.s(i).iter().zip(&d).map(|(s, d)| s * d).collect();
            assert!(relative_distance(run.pairs.y(i), &ds) < 1e-12);
        }
    }

    #[test]
    fn early_convergence_is_reported() {
        let obj = Objective::Quadratic(vec![1.0; 4]);
        match collect_pairs(&obj, 5, DEFAULT_DELTA) {
            Err(Error::EarlyConvergence {
                collected: 1,
                requested: 5,
            }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rosenbrock_needs_even_dimension() {
        assert!(run_lbfgs_collect(ObjectiveKind::ExtendedRosenbrock, 5, 5, 0).is_err());
    }

    #[test]
    fn rosenbrock_gradient_matches_finite_differences() {
        let obj = Objective::ExtendedRosenbrock(4);
        let x = [0.3, -0.7, 1.1, 0.4];
        let (_, g) = obj.value_and_gradient(&x);
        let h = 1e-6;
        for i in 0..4 {
            let mut xp = x;
            let mut xm = x;
            xp[i] += h;
            xm[i] -= h;
            let fd = (obj.value_and_gradient(&xp).0 - obj.value_and_gradient(&xm).0) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-5 * g[i].abs().max(1.0));
        }
    }

    #[test]
    fn kkt_identity_blocks_without_pairs() {
        let mut pairs = LbfgsPairs::new(3, 2).unwrap();
        pairs.set_gamma(0.5).unwrap();
        let ones = vec![1.0; 3];
        let r1 = [4.0, 7.0, 1.0];
        let r2 = [1.0, 1.0, -2.0];
        let sol =
            kkt_block_solve(&pairs, None, &ones, &ones, &r1, &r2, &GuardParams::default())
                .unwrap();
        for i in 0..3 {
            // (2 + 1) v1 = r1 - r2, v2 = r2 - v1
            let v1 = (r1[i] - r2[i]) / 3.0;
            assert!((sol.v1[i] - v1).abs() < 1e-15);
            assert!((sol.v2[i] - (r2[i] - v1)).abs() < 1e-15);
        }
        assert!(sol.block_residual < 1e-15);
    }

    #[test]
    fn kkt_zero_column_without_inner_shift_is_rejected() {
        let pairs = LbfgsPairs::new(2, 2).unwrap();
        let err = kkt_block_solve(
            &pairs,
            None,
            &[1.0, 0.0],
            &[1.0, 1.0],
            &[1.0, 1.0],
            &[1.0, 1.0],
            &GuardParams::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::GuardRejected(_)));
    }

    #[test]
    fn spec_kv_round_trip() {
        let spec = ProblemSpec {
            n: 123,
            k: 4,
            capacity: 7,
            shift_kind: ShiftKind::Diagonal,
            sigma: 0.375,
            seed: 99,
            objective: ObjectiveKind::ExtendedRosenbrock,
        };
        let back = ProblemSpec::from_kv(&spec.to_kv(), Path::new("spec.txt")).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn spec_kv_reports_line_numbers() {
        let err = ProblemSpec::from_kv("n=5\n\nk=abc\n", Path::new("bad.txt")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");
        let err = ProblemSpec::from_kv("color=red", Path::new("bad.txt")).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }
}
