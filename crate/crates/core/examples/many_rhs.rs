//! Precompute once, then solve many right-hand sides concurrently.

use std::time::Instant;

use shifted_lbfgs::problems::{gen_random_pairs, gen_rhs, gen_tridiagonal_shift};
use shifted_lbfgs::shifted::{precompute, GuardParams};

fn main() -> shifted_lbfgs::Result<()> {
    let n = 50_000;
    let pairs = gen_random_pairs(n, 5, 8, 1e-8)?;
    let g = gen_tridiagonal_shift(n, 0.1, 8)?;

    let t = Instant::now();
    let state = precompute(&pairs, &g, &GuardParams::default())?;
    println!("precompute: {:.4} s", t.elapsed().as_secs_f64());

    let rhs: Vec<Vec<f64>> = (0..8).map(|i| gen_rhs(n, 100 + i)).collect();
    let t = Instant::now();
    let reports = std::thread::scope(|scope| {
        let handles: Vec<_> = rhs
            .iter()
            .map(|y| scope.spawn(|| state.solve(&g, y)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("solver thread panicked"))
            .collect::<shifted_lbfgs::Result<Vec<_>>>()
    })?;
    println!("{} solves: {:.4} s", reports.len(), t.elapsed().as_secs_f64());
    for (i, r) in reports.iter().enumerate() {
        println!(
            "  rhs {i}: residual {:.2e}, inner products {}, shifted solves {}",
            r.rel_residual, r.counters.inner_products, r.counters.shift_solves
        );
    }
    Ok(())
}
