//! Library side of the `shifted-lbfgs` command: single solves, size sweeps,
//! the self-test suites and residual verification.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::mpsc;

use rand::Rng;

use crate::baselines::{
    assemble_shifted_system, cg_solve, dense_oracle_solve, pcg_jacobi_solve, relative_residual,
    IterativeConfig, Preconditioner,
};
use crate::error::{Error, Result};
use crate::io;
use crate::lbfgs::{LbfgsPairs, DEFAULT_CAPACITY};
use crate::linalg::{norm2, rel_diff, OpCounters};
use crate::problems::{gen_random_pairs, gen_rhs, gen_shift, gen_sigma, rng_for, Instance, ProblemSpec};
use crate::shift::{ScalarShift, Shift, ShiftKind};
use crate::shifted::{
    budget, check_guard, precompute, GuardParams, GuardRejection, GuardVerdict, Method,
    OuterUpdate, SolveReport,
};

pub const CSV_HEADER: &str =
    "method,n,k,shift,sigma,seed,time_s,iters,rel_residual,inner_products,guard";

/// Process exit status for an error: 2 guard rejection, 3 non-convergence,
/// 4 I/O or parse failure, 1 anything else.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::GuardRejected(_) | Error::Stability { .. } => 2,
        Error::NotConverged { .. } => 3,
        Error::Io(_) | Error::Parse { .. } => 4,
        _ => 1,
    }
}

/// One CSV row.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    /// Method tag, suffixed with `:median` on summary rows.
    pub method: String,
    pub n: usize,
    pub k: usize,
    pub shift: ShiftKind,
    pub sigma: f64,
    pub seed: u64,
    pub time_s: f64,
    pub iters: usize,
    pub rel_residual: f64,
    pub inner_products: usize,
    pub guard: String,
}

impl BenchRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{:e},{},{:e},{},{:e},{},{}",
            self.method,
            self.n,
            self.k,
            self.shift,
            self.sigma,
            self.seed,
            self.time_s,
            self.iters,
            self.rel_residual,
            self.inner_products,
            self.guard
        )
    }

    /// Parses a line produced by [`to_csv`](Self::to_csv).
    pub fn from_csv(line: &str) -> Result<Self> {
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != 11 {
            return Err(Error::InvalidArgument(format!(
                "expected 11 CSV fields, found {}",
                f.len()
            )));
        }
        let bad = |name: &str| Error::InvalidArgument(format!("bad CSV field {name}"));
        Ok(BenchRow {
            method: f[0].to_string(),
            n: f[1].parse().map_err(|_| bad("n"))?,
            k: f[2].parse().map_err(|_| bad("k"))?,
            shift: f[3].parse()?,
            sigma: f[4].parse().map_err(|_| bad("sigma"))?,
            seed: f[5].parse().map_err(|_| bad("seed"))?,
            time_s: f[6].parse().map_err(|_| bad("time_s"))?,
            iters: f[7].parse().map_err(|_| bad("iters"))?,
            rel_residual: f[8].parse().map_err(|_| bad("rel_residual"))?,
            inner_products: f[9].parse().map_err(|_| bad("inner_products"))?,
            guard: f[10].to_string(),
        })
    }
}

pub fn guard_status(verdict: &GuardVerdict) -> String {
    match verdict {
        GuardVerdict::Ok => "ok".to_string(),
        GuardVerdict::Reject(r) => format!("reject:{}", r.as_str()),
    }
}

/// Human-readable table of rows.
pub fn format_table(rows: &[BenchRow]) -> String {
    let mut out = format!(
        "{:<18} {:>9} {:>3} {:>8} {:>12} {:>6} {:>11} {:>9} {:>8}\n",
        "method", "n", "k", "shift", "time_s", "iters", "residual", "dots", "guard"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:<18} {:>9} {:>3} {:>8} {:>12.6} {:>6} {:>11.3e} {:>9} {:>8}",
            r.method, r.n, r.k, r.shift, r.time_s, r.iters, r.rel_residual, r.inner_products, r.guard
        );
    }
    out
}

/// Solver settings shared by `solve` and `bench`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub method: Method,
    pub tol: f64,
    pub max_iterations: Option<usize>,
    pub guard: GuardParams,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            method: Method::Recursion,
            tol: f64::EPSILON.sqrt(),
            max_iterations: None,
            guard: GuardParams::default(),
        }
    }
}

/// Solves `(B_k + G) x = y` with the chosen method.
pub fn run_method(
    pairs: &LbfgsPairs,
    shift: &Shift,
    rhs: &[f64],
    opts: &SolveOptions,
) -> Result<SolveReport> {
    let iterative = |pre| IterativeConfig {
        tol: opts.tol,
        max_iterations: opts.max_iterations,
        preconditioner: pre,
    };
    match opts.method {
        Method::Recursion => crate::shifted::solve_full(pairs, shift, rhs, &opts.guard),
        Method::Cg => cg_solve(pairs, shift, rhs, &iterative(Preconditioner::None)),
        Method::PcgDiag => pcg_jacobi_solve(pairs, shift, rhs, &iterative(Preconditioner::Jacobi)),
        Method::DenseOracle => dense_oracle_solve(pairs, shift, rhs),
        Method::NaiveWrong => {
            let start = std::time::Instant::now();
            let x = pairs.naive_shifted_two_loop(shift, rhs)?;
            let wall_time = start.elapsed().as_secs_f64();
            let rel_residual = relative_residual(pairs, shift, &x, rhs)?;
            Ok(SolveReport {
                x,
                rel_residual,
                wall_time,
                iterations: 0,
                counters: OpCounters::default(),
                unrolling: OpCounters::default(),
                method: Method::NaiveWrong,
                preconditioner_fallback: false,
            })
        }
    }
}

fn row_from_report(rep: &SolveReport, spec: &RowContext, guard: &str) -> BenchRow {
    BenchRow {
        method: rep.method.as_str().to_string(),
        n: spec.n,
        k: spec.k,
        shift: spec.shift,
        sigma: spec.sigma,
        seed: spec.seed,
        time_s: rep.wall_time,
        iters: rep.iterations,
        rel_residual: rep.rel_residual,
        inner_products: rep.total_inner_products(),
        guard: guard.to_string(),
    }
}

struct RowContext {
    n: usize,
    k: usize,
    shift: ShiftKind,
    sigma: f64,
    seed: u64,
}

/// Where `solve` gets its system from.
#[derive(Debug, Clone)]
pub enum InstanceSource {
    Generate(ProblemSpec),
    Files {
        pairs: PathBuf,
        /// Required unless the shift is scalar.
        shift_file: Option<PathBuf>,
        shift_kind: ShiftKind,
        /// Used for scalar shifts and reported in the row.
        sigma: f64,
        rhs: PathBuf,
        seed: u64,
    },
}

impl InstanceSource {
    fn load(&self, delta: f64) -> Result<(Instance, RowContext)> {
        match self {
            InstanceSource::Generate(spec) => {
                let inst = spec.build()?;
                let ctx = RowContext {
                    n: spec.n,
                    k: inst.pairs.len(),
                    shift: spec.shift_kind,
                    sigma: spec.sigma,
                    seed: spec.seed,
                };
                Ok((inst, ctx))
            }
            InstanceSource::Files {
                pairs,
                shift_file,
                shift_kind,
                sigma,
                rhs,
                seed,
            } => {
                let pairs = io::read_pairs(pairs, delta)?;
                let shift = match (shift_kind, shift_file) {
                    (ShiftKind::Scalar, _) => ScalarShift::new(*sigma, pairs.dim())?.into(),
                    (kind, Some(path)) => io::read_shift(path, *kind)?,
                    (kind, None) => {
                        return Err(Error::InvalidArgument(format!(
                            "a shift file is required for shift kind '{kind}'"
                        )))
                    }
                };
                let rhs = io::read_vector(rhs)?;
                let ctx = RowContext {
                    n: pairs.dim(),
                    k: pairs.len(),
                    shift: *shift_kind,
                    sigma: *sigma,
                    seed: *seed,
                };
                Ok((Instance { pairs, shift, rhs }, ctx))
            }
        }
    }
}

/// Writes `pairs.txt`, `rhs.txt`, `spec.txt` and (for non-scalar shifts)
/// `shift.txt` into `dir`.
pub fn dump_instance(dir: &Path, inst: &Instance, spec: Option<&ProblemSpec>) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    io::write_pairs(&dir.join("pairs.txt"), &inst.pairs)?;
    io::write_vector(&dir.join("rhs.txt"), &inst.rhs)?;
    io::write_shift(&dir.join("shift.txt"), &inst.shift)?;
    if let Some(spec) = spec {
        spec.write(&dir.join("spec.txt"))?;
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct SolveArgs {
    pub source: InstanceSource,
    pub opts: SolveOptions,
    /// Solution vector file.
    pub out: Option<PathBuf>,
    pub dump_instance: Option<PathBuf>,
}

/// Loads or generates one system, solves it and writes the solution.
pub fn run_solve(args: &SolveArgs) -> Result<(BenchRow, SolveReport)> {
    let (inst, ctx) = args.source.load(args.opts.guard.delta)?;
    if let Some(dir) = &args.dump_instance {
        let spec = match &args.source {
            InstanceSource::Generate(spec) => Some(spec),
            InstanceSource::Files { .. } => None,
        };
        dump_instance(dir, &inst, spec)?;
    }
    let guard = guard_status(&check_guard(&inst.pairs, &inst.shift, &args.opts.guard));
    let rep = run_method(&inst.pairs, &inst.shift, &inst.rhs, &args.opts)?;
    if let Some(out) = &args.out {
        io::write_vector(out, &rep.x)?;
    }
    Ok((row_from_report(&rep, &ctx, &guard), rep))
}

/// Recomputes `‖(B_k + G) x - y‖ / ‖y‖` from files.
pub fn verify_residual(
    pairs: &Path,
    shift: &Shift,
    rhs: &Path,
    solution: &Path,
    delta: f64,
) -> Result<f64> {
    let pairs = io::read_pairs(pairs, delta)?;
    let rhs = io::read_vector(rhs)?;
    let x = io::read_vector(solution)?;
    Error::check_dim(pairs.dim(), x.len())?;
    relative_residual(&pairs, shift, &x, &rhs)
}

/// Size sweep settings.
#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub sizes: Vec<usize>,
    pub methods: Vec<Method>,
    pub k: usize,
    pub capacity: usize,
    pub shift: ShiftKind,
    /// `None`: 0.1, or `U(0,1)` per seed for scalar shifts.
    pub sigma: Option<f64>,
    pub seed: u64,
    pub reps: usize,
    /// Worker threads; cells run in parallel when greater than 1.
    pub jobs: usize,
    pub opts: SolveOptions,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: vec![10_000, 20_000, 50_000],
            methods: vec![Method::Recursion, Method::Cg, Method::PcgDiag],
            k: 5,
            capacity: DEFAULT_CAPACITY,
            shift: ShiftKind::Tridiagonal,
            sigma: None,
            seed: 1,
            reps: 1,
            jobs: 1,
            opts: SolveOptions::default(),
        }
    }
}

/// `sigma` default: 0.1, except scalar shifts draw `U(0,1)` from the seed.
pub fn default_sigma(kind: ShiftKind, seed: u64) -> f64 {
    match kind {
        ShiftKind::Scalar => gen_sigma(seed),
        _ => 0.1,
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    }
}

fn median_row(rows: &[BenchRow]) -> BenchRow {
    let mut times: Vec<f64> = rows.iter().map(|r| r.time_s).collect();
    let mut res: Vec<f64> = rows.iter().map(|r| r.rel_residual).collect();
    let mut iters: Vec<f64> = rows.iter().map(|r| r.iters as f64).collect();
    let mut dots: Vec<f64> = rows.iter().map(|r| r.inner_products as f64).collect();
    BenchRow {
        method: format!("{}:median", rows[0].method),
        time_s: median(&mut times),
        rel_residual: median(&mut res),
        iters: median(&mut iters).round() as usize,
        inner_products: median(&mut dots).round() as usize,
        ..rows[0].clone()
    }
}

/// Runs every `(size, method)` cell `reps` times. Rows come back ordered by
/// size, then method as listed, then repetition, with a median row closing
/// each cell when `reps > 1`.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<BenchRow>> {
    if cfg.reps == 0 || cfg.sizes.is_empty() || cfg.methods.is_empty() {
        return Err(Error::InvalidArgument(
            "need at least one size, one method and one repetition".into(),
        ));
    }
    let sigma = cfg.sigma.unwrap_or_else(|| default_sigma(cfg.shift, cfg.seed));
    let specs: Vec<ProblemSpec> = cfg
        .sizes
        .iter()
        .map(|&n| ProblemSpec {
            n,
            k: cfg.k,
            capacity: cfg.capacity.max(cfg.k),
            shift_kind: cfg.shift,
            sigma,
            seed: cfg.seed,
            ..ProblemSpec::default()
        })
        .collect();
    let instances = specs
        .iter()
        .map(ProblemSpec::build)
        .collect::<Result<Vec<_>>>()?;

    let cells: Vec<(usize, usize)> = (0..specs.len())
        .flat_map(|i| (0..cfg.methods.len()).map(move |m| (i, m)))
        .collect();
    let run_cell = |&(i, m): &(usize, usize)| -> Result<Vec<BenchRow>> {
        let inst = &instances[i];
        let spec = &specs[i];
        let opts = SolveOptions {
            method: cfg.methods[m],
            ..cfg.opts
        };
        let guard = guard_status(&check_guard(&inst.pairs, &inst.shift, &opts.guard));
        let ctx = RowContext {
            n: spec.n,
            k: inst.pairs.len(),
            shift: spec.shift_kind,
            sigma: spec.sigma,
            seed: spec.seed,
        };
        let mut rows = Vec::with_capacity(cfg.reps + 1);
        for _ in 0..cfg.reps {
            let rep = run_method(&inst.pairs, &inst.shift, &inst.rhs, &opts)?;
            rows.push(row_from_report(&rep, &ctx, &guard));
        }
        if cfg.reps > 1 {
            rows.push(median_row(&rows));
        }
        Ok(rows)
    };

    let mut results: Vec<(usize, Result<Vec<BenchRow>>)> = if cfg.jobs <= 1 {
        cells.iter().map(run_cell).enumerate().collect()
    } else {
        let (tx, rx) = mpsc::channel();
        let next = std::sync::atomic::AtomicUsize::new(0);
        std::thread::scope(|scope| {
            for _ in 0..cfg.jobs.min(cells.len()) {
                let tx = tx.clone();
                let next = &next;
                let cells = &cells;
                let run_cell = &run_cell;
                scope.spawn(move || loop {
                    let idx = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    let Some(cell) = cells.get(idx) else { break };
                    if tx.send((idx, run_cell(cell))).is_err() {
                        break;
                    }
                });
            }
        });
        drop(tx);
        rx.into_iter().collect()
    };
    results.sort_by_key(|(idx, _)| *idx);

    let mut rows = Vec::new();
    for (_, r) in results {
        rows.extend(r?);
    }
    Ok(rows)
}

/// Self-test suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Suite {
    Oracle,
    Guard,
    Counters,
    Negative,
}

impl Suite {
    pub const ALL: [Suite; 4] = [Suite::Oracle, Suite::Guard, Suite::Counters, Suite::Negative];

    pub fn as_str(&self) -> &'static str {
        match self {
            Suite::Oracle => "oracle",
            Suite::Guard => "guard",
            Suite::Counters => "counters",
            Suite::Negative => "negative",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Clone)]
pub struct SelftestConfig {
    pub suites: Vec<Suite>,
    pub cases: usize,
    pub seed: u64,
    /// Outer update used by the oracle suite. Anything other than the
    /// default is expected to fail it.
    pub outer_update: OuterUpdate,
}

impl Default for SelftestConfig {
    fn default() -> Self {
        SelftestConfig {
            suites: Suite::ALL.to_vec(),
            cases: 200,
            seed: 0,
            outer_update: OuterUpdate::AgainstRhs,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteResult {
    pub suite: Suite,
    pub passed: usize,
    pub failed: usize,
    pub first_failure: Option<String>,
}

impl SuiteResult {
    fn new(suite: Suite) -> Self {
        SuiteResult {
            suite,
            passed: 0,
            failed: 0,
            first_failure: None,
        }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
            if self.first_failure.is_none() {
                self.first_failure = Some(what());
            }
        }
    }

    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

/// Random small instance for the self-tests: `n` in `[1, 300]`, `k` in
/// `[0, 7]`, any shift kind.
fn small_instance(seed: u64, min_k: usize) -> Result<(Instance, String)> {
    let mut rng = rng_for(seed, crate::problems::stream::SIGMA);
    let n = rng.random_range(1..=300);
    let k = rng.random_range(min_k..=7);
    let kind = ShiftKind::ALL[rng.random_range(0..3)];
    let sigma = 0.05 + 0.95 * rng.random::<f64>();
    let inst = Instance {
        pairs: gen_random_pairs(n, k, seed, GuardParams::default().delta)?,
        shift: gen_shift(kind, n, sigma, seed)?,
        rhs: gen_rhs(n, seed),
    };
    Ok((inst, format!("seed={seed} n={n} k={k} shift={kind}")))
}

/// Dense solve of `(B_k + G) x = y`, independent of the recursion.
fn dense_reference(inst: &Instance) -> Result<Vec<f64>> {
    let a = assemble_shifted_system(&inst.pairs, &inst.shift)?;
    let chol = a.cholesky().ok_or(Error::DenseFactorization)?;
    let x = chol.solve(&nalgebra::DVector::from_column_slice(&inst.rhs));
    Ok(x.as_slice().to_vec())
}

fn oracle_suite(cfg: &SelftestConfig) -> Result<SuiteResult> {
    let mut res = SuiteResult::new(Suite::Oracle);
    // 1x1: B_1 = 2 after s = 1, y = 2; with G = 1, (B_1 + G) x = 3 gives x = 1.
    let pairs = LbfgsPairs::from_pairs(1, 6, [(vec![1.0], vec![2.0])], 1e-8)?;
    let g: Shift = ScalarShift::new(1.0, 1)?.into();
    let state = precompute(&pairs, &g, &GuardParams::default())?;
    let x = state.solve_with(&g, &[3.0], cfg.outer_update)?.x[0];
    res.record((x - 1.0).abs() <= 1e-14, || format!("1x1 example gave x = {x}"));

    for case in 0..cfg.cases {
        let seed = cfg.seed.wrapping_add(case as u64);
        let (inst, label) = small_instance(seed, 0)?;
        let state = precompute(&inst.pairs, &inst.shift, &GuardParams::default())?;
        let x = state.solve_with(&inst.shift, &inst.rhs, cfg.outer_update)?.x;
        let err = rel_diff(&x, &dense_reference(&inst)?);
        res.record(err <= 1e-10, || format!("{label}: relative error {err:e}"));
    }
    Ok(res)
}

fn guard_suite(cfg: &SelftestConfig) -> Result<SuiteResult> {
    let mut res = SuiteResult::new(Suite::Guard);
    for case in 0..cfg.cases {
        let seed = cfg.seed.wrapping_add(case as u64);
        let (inst, label) = small_instance(seed, 0)?;
        let state = precompute(&inst.pairs, &inst.shift, &GuardParams::default())?;
        let v = state.stability_violations(&inst.pairs);
        res.record(v == 0, || format!("{label}: {v} bound violations"));
    }

    let n = 4;
    let base = gen_random_pairs(n, 3, cfg.seed, 1e-8)?;
    let g: Shift = ScalarShift::new(0.5, n)?.into();
    let strict = |delta, eta, epsilon| GuardParams {
        delta,
        eta,
        epsilon,
        ..GuardParams::default()
    };
    let fixtures: [(&str, GuardParams, fn(&GuardRejection) -> bool); 3] = [
        ("curvature", strict(1e6, 1e8, 1e-4), |r| {
            matches!(r, GuardRejection::Curvature { .. })
        }),
        ("frobenius", strict(1e-8, 1e-12, 1e-4), |r| {
            matches!(r, GuardRejection::Frobenius { .. })
        }),
        ("scaling", strict(1e-8, 1e8, 1e6), |r| {
            matches!(r, GuardRejection::Scaling { .. })
        }),
    ];
    for (name, params, expect) in fixtures {
        let verdict = check_guard(&base, &g, &params);
        let ok = matches!(&verdict, GuardVerdict::Reject(r) if expect(r));
        res.record(ok, || format!("{name} fixture gave {verdict:?}"));
        let refused = matches!(
            precompute(&base, &g, &params),
            Err(Error::GuardRejected(_))
        );
        res.record(refused, || format!("{name} fixture was not refused by precompute"));
    }
    Ok(res)
}

fn counters_suite(cfg: &SelftestConfig) -> Result<SuiteResult> {
    let mut res = SuiteResult::new(Suite::Counters);
    for k in 1..=7 {
        let n = 50;
        let seed = cfg.seed.wrapping_add(k as u64);
        let pairs = gen_random_pairs(n, k, seed, 1e-8)?;
        let g = gen_shift(ShiftKind::Tridiagonal, n, 0.1, seed)?;
        let rep = crate::shifted::solve_full(&pairs, &g, &gen_rhs(n, seed), &GuardParams::default())?;
        let dots = rep.total_inner_products();
        let dot_budget =
            budget::recursion_inner_products(k) + budget::unrolling_inner_products(k) + budget::slack(k);
        res.record(dots <= dot_budget, || {
            format!("k={k}: {dots} inner products > {dot_budget}")
        });
        let updates = rep.counters.vector_updates;
        let update_budget = budget::recursion_vector_updates(k) + budget::slack(k);
        res.record(updates <= update_budget, || {
            format!("k={k}: {updates} vector updates > {update_budget}")
        });
        let solves = rep.counters.shift_solves;
        res.record(solves == 2 * k + 1, || {
            format!("k={k}: {solves} shifted solves, expected {}", 2 * k + 1)
        });
    }
    Ok(res)
}

fn negative_suite(cfg: &SelftestConfig) -> Result<SuiteResult> {
    let mut res = SuiteResult::new(Suite::Negative);
    for case in 0..cfg.cases.min(100) {
        let seed = cfg.seed.wrapping_add(case as u64);
        let (inst, label) = small_instance(seed, 1)?;
        if inst.pairs.dim() > 200 {
            continue;
        }
        let good = crate::shifted::solve_full(
            &inst.pairs,
            &inst.shift,
            &inst.rhs,
            &GuardParams::default(),
        )?
        .rel_residual;
        let naive = inst.pairs.naive_shifted_two_loop(&inst.shift, &inst.rhs)?;
        let bad = relative_residual(&inst.pairs, &inst.shift, &naive, &inst.rhs)?;
        res.record(bad >= 1e6 * good, || {
            format!("{label}: naive residual {bad:e} vs recursion {good:e}")
        });
    }
    Ok(res)
}

/// Runs the selected suites in a fixed order.
pub fn run_selftest(cfg: &SelftestConfig) -> Result<Vec<SuiteResult>> {
    let mut suites = cfg.suites.clone();
    suites.sort();
    suites.dedup();
    suites
        .into_iter()
        .map(|s| match s {
            Suite::Oracle => oracle_suite(cfg),
            Suite::Guard => guard_suite(cfg),
            Suite::Counters => counters_suite(cfg),
            Suite::Negative => negative_suite(cfg),
        })
        .collect()
}

/// Relative distance between two solution vectors.
pub fn solution_distance(a: &[f64], b: &[f64]) -> f64 {
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    norm2(&diff) / norm2(b).max(f64::MIN_POSITIVE)
}
