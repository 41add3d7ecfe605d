//! Export an instance to text files, read it back and solve from the files.

use shifted_lbfgs::baselines::relative_residual;
use shifted_lbfgs::io;
use shifted_lbfgs::problems::ProblemSpec;
use shifted_lbfgs::shift::ShiftKind;
use shifted_lbfgs::shifted::{solve_full, GuardParams};

fn main() -> shifted_lbfgs::Result<()> {
    let dir = std::env::temp_dir().join(format!("shifted-lbfgs-pairs-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let spec = ProblemSpec {
        n: 1000,
        k: 4,
        shift_kind: ShiftKind::Tridiagonal,
        seed: 5,
        ..ProblemSpec::default()
    };
    let inst = spec.build()?;

    let (pairs_path, shift_path, rhs_path) =
        (dir.join("pairs.txt"), dir.join("shift.txt"), dir.join("rhs.txt"));
    io::write_pairs(&pairs_path, &inst.pairs)?;
    io::write_shift(&shift_path, &inst.shift)?;
    io::write_vector(&rhs_path, &inst.rhs)?;
    spec.write(&dir.join("spec.txt"))?;
    println!("wrote {}", dir.display());

    let pairs = io::read_pairs(&pairs_path, 1e-8)?;
    let g = io::read_shift(&shift_path, ShiftKind::Tridiagonal)?;
    let y = io::read_vector(&rhs_path)?;
    let report = solve_full(&pairs, &g, &y, &GuardParams::default())?;
    io::write_vector(&dir.join("x.txt"), &report.x)?;

    let x = io::read_vector(&dir.join("x.txt"))?;
    println!("reported residual   {:e}", report.rel_residual);
    println!("recomputed residual {:e}", relative_residual(&pairs, &g, &x, &y)?);
    println!("gamma round trip    {}", pairs.gamma() == inst.pairs.gamma());

    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
