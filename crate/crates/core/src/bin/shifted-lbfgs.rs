use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use shifted_lbfgs::bench::{
    default_sigma, exit_code, format_table, run_bench, run_selftest, run_solve, verify_residual,
    BenchConfig, InstanceSource, SelftestConfig, SolveArgs, SolveOptions, Suite, CSV_HEADER,
};
use shifted_lbfgs::io::read_shift;
use shifted_lbfgs::problems::ObjectiveKind;
use shifted_lbfgs::shifted::{GuardParams, Method, OuterUpdate};
use shifted_lbfgs::{Error, ProblemSpec, ScalarShift, ShiftKind};

#[derive(Parser)]
#[command(name = "shifted-lbfgs", version, about = "Solve and benchmark shifted L-BFGS systems (B + G) x = y")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one system and print a CSV row.
    Solve(SolveCmd),
    /// Sweep sizes and methods, printing CSV rows.
    Bench(BenchCmd),
    /// Run the built-in property suites.
    Selftest(SelftestCmd),
    /// Recompute the relative residual of a solution from files.
    Verify(VerifyCmd),
}

#[derive(Args, Clone)]
struct SolverFlags {
    #[arg(long, default_value = "recursion")]
    method: Method,
    /// Iterative tolerance (default sqrt of machine epsilon).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long, default_value_t = 1e-8)]
    delta: f64,
    #[arg(long, default_value_t = 1e8)]
    eta: f64,
    #[arg(long, default_value_t = 1e-4)]
    epsilon: f64,
}

impl SolverFlags {
    fn options(&self) -> SolveOptions {
        SolveOptions {
            method: self.method,
            tol: self.tol.unwrap_or(f64::EPSILON.sqrt()),
            max_iterations: self.max_iter,
            guard: GuardParams {
                delta: self.delta,
                eta: self.eta,
                epsilon: self.epsilon,
                ..GuardParams::default()
            },
        }
    }
}

#[derive(Args)]
struct SolveCmd {
    /// Shift structure to generate (alias of --shift).
    #[arg(long, alias = "shift", default_value = "tridiag")]
    gen: ShiftKind,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Pair capacity.
    #[arg(long = "M", default_value_t = 6)]
    capacity: usize,
    /// Default 0.1, or U(0,1) from the seed for scalar shifts.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "none")]
    objective: ObjectiveKind,
    /// Read pairs from a file instead of generating.
    #[arg(long, requires = "rhs")]
    pairs: Option<PathBuf>,
    /// Diagonal or tridiagonal shift file (with --pairs).
    #[arg(long)]
    shift_file: Option<PathBuf>,
    /// Right-hand side file (with --pairs).
    #[arg(long)]
    rhs: Option<PathBuf>,
    /// Write pairs, shift, rhs and spec files into this directory.
    #[arg(long)]
    dump_instance: Option<PathBuf>,
    /// Solution vector file.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
struct BenchCmd {
    /// Comma-separated sizes.
    #[arg(long = "n", value_delimiter = ',', default_value = "10000,20000,50000")]
    sizes: Vec<usize>,
    /// Comma-separated methods.
    #[arg(long, value_delimiter = ',', default_value = "recursion,cg,pcg")]
    methods: Vec<Method>,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long = "M", default_value_t = 6)]
    capacity: usize,
    #[arg(long, default_value = "tridiag")]
    shift: ShiftKind,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// CSV output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long, default_value_t = 1e-8)]
    delta: f64,
    #[arg(long, default_value_t = 1e8)]
    eta: f64,
    #[arg(long, default_value_t = 1e-4)]
    epsilon: f64,
}

#[derive(Args)]
struct SelftestCmd {
    /// Run only these suites (oracle, guard, counters, negative).
    #[arg(long = "suite")]
    suites: Vec<Suite>,
    #[arg(long, default_value_t = 200)]
    cases: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Use the sign-flipped outer update; the oracle suite must then fail.
    #[arg(long)]
    inject_flipped_sign: bool,
}

#[derive(Args)]
struct VerifyCmd {
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long, default_value = "tridiag")]
    shift: ShiftKind,
    #[arg(long)]
    shift_file: Option<PathBuf>,
    /// Scalar shift value.
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    rhs: PathBuf,
    #[arg(long)]
    solution: PathBuf,
    /// Reported residual to compare against (absolute tolerance 1e-15).
    #[arg(long)]
    reported: Option<f64>,
    #[arg(long, default_value_t = 1e-8)]
    delta: f64,
}

fn solve(cmd: SolveCmd) -> Result<(), Error> {
    let sigma = cmd.sigma.unwrap_or_else(|| default_sigma(cmd.gen, cmd.seed));
    let source = match (&cmd.pairs, &cmd.rhs) {
        (Some(pairs), Some(rhs)) => InstanceSource::Files {
            pairs: pairs.clone(),
            shift_file: cmd.shift_file.clone(),
            shift_kind: cmd.gen,
            sigma,
            rhs: rhs.clone(),
            seed: cmd.seed,
        },
        _ => InstanceSource::Generate(ProblemSpec {
            n: cmd.n,
            k: cmd.k,
            capacity: cmd.capacity,
            shift_kind: cmd.gen,
            sigma,
            seed: cmd.seed,
            objective: cmd.objective,
        }),
    };
    let args = SolveArgs {
        source,
        opts: cmd.solver.options(),
        out: cmd.out,
        dump_instance: cmd.dump_instance,
    };
    let (row, _) = run_solve(&args)?;
    println!("{CSV_HEADER}");
    println!("{}", row.to_csv());
    eprint!("{}", format_table(std::slice::from_ref(&row)));
    Ok(())
}

fn bench(cmd: BenchCmd) -> Result<(), Error> {
    let cfg = BenchConfig {
        sizes: cmd.sizes,
        methods: cmd.methods,
        k: cmd.k,
        capacity: cmd.capacity,
        shift: cmd.shift,
        sigma: cmd.sigma,
        seed: cmd.seed,
        reps: cmd.reps,
        jobs: cmd.jobs,
        opts: SolveOptions {
            tol: cmd.tol.unwrap_or(f64::EPSILON.sqrt()),
            max_iterations: cmd.max_iter,
            guard: GuardParams {
                delta: cmd.delta,
                eta: cmd.eta,
                epsilon: cmd.epsilon,
                ..GuardParams::default()
            },
            ..SolveOptions::default()
        },
    };
    let rows = run_bench(&cfg)?;
    let mut csv = format!("{CSV_HEADER}\n");
    for r in &rows {
        csv.push_str(&r.to_csv());
        csv.push('\n');
    }
    match cmd.out {
        Some(path) => std::fs::write(path, csv)?,
        None => std::io::stdout().write_all(csv.as_bytes())?,
    }
    eprint!("{}", format_table(&rows));
    Ok(())
}

fn selftest(cmd: SelftestCmd) -> Result<bool, Error> {
    let cfg = SelftestConfig {
        suites: if cmd.suites.is_empty() {
            Suite::ALL.to_vec()
        } else {
            cmd.suites
        },
        cases: cmd.cases,
        seed: cmd.seed,
        outer_update: if cmd.inject_flipped_sign {
            OuterUpdate::FlippedSign
        } else {
            OuterUpdate::AgainstRhs
        },
    };
    let mut all_ok = true;
    for r in run_selftest(&cfg)? {
        let status = if r.ok() { "PASS" } else { "FAIL" };
        println!(
            "{status} {:<9} passed={} failed={}",
            r.suite.as_str(),
            r.passed,
            r.failed
        );
        if let Some(msg) = &r.first_failure {
            println!("     first failure: {msg}");
        }
        all_ok &= r.ok();
    }
    Ok(all_ok)
}

fn verify(cmd: VerifyCmd) -> Result<bool, Error> {
    let shift = match (cmd.shift, &cmd.shift_file) {
        (ShiftKind::Scalar, _) => {
            let sigma = cmd.sigma.ok_or_else(|| {
                Error::InvalidArgument("--sigma is required for a scalar shift".into())
            })?;
            let n = shifted_lbfgs::io::read_vector(&cmd.rhs)?.len();
            ScalarShift::new(sigma, n)?.into()
        }
        (kind, Some(path)) => read_shift(path, kind)?,
        (kind, None) => {
            return Err(Error::InvalidArgument(format!(
                "--shift-file is required for shift kind '{kind}'"
            )))
        }
    };
    let res = verify_residual(&cmd.pairs, &shift, &cmd.rhs, &cmd.solution, cmd.delta)?;
    println!("rel_residual={res:e}");
    Ok(match cmd.reported {
        Some(reported) => {
            let diff = (res - reported).abs();
            println!("reported={reported:e} abs_diff={diff:e}");
            diff <= 1e-15
        }
        None => true,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(c) => solve(c).map(|()| true),
        Command::Bench(c) => bench(c).map(|()| true),
        Command::Selftest(c) => selftest(c),
        Command::Verify(c) => verify(c),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
