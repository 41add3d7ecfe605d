//! Shift operators `G`: symmetric positive definite matrices for which
//! `(G + alpha I)^{-1} v` is cheap and stable.

use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};

/// Contract every shift `G` must satisfy.
pub trait ShiftOperator: Send + Sync {
    fn dim(&self) -> usize;

    /// `G v`
    fn apply(&self, v: &[f64]) -> Vec<f64>;

    /// `(G + alpha I)^{-1} v` for `alpha >= 0`.
    fn solve_shifted(&self, alpha: f64, v: &[f64]) -> Result<Vec<f64>>;

    /// `diag(G)`
    fn diagonal(&self) -> Vec<f64>;

    /// A positive lower bound on the eigenvalues of `G`.
    fn theta_min(&self) -> f64;
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha >= 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "shift alpha must be finite and nonnegative, got {alpha}"
        )))
    }
}

/// `G = sigma I` of dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarShift {
    sigma: f64,
    n: usize,
}

impl ScalarShift {
    pub fn new(sigma: f64, n: usize) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        Ok(ScalarShift { sigma, n })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// `v / (sigma + alpha)`.
pub fn scalar_shift_solve(sigma: f64, alpha: f64, v: &[f64]) -> Result<Vec<f64>> {
    let denom = sigma + alpha;
    if !(denom > 0.0 && denom.is_finite()) {
        return Err(Error::Domain(format!(
            "sigma + alpha must be positive, got {denom}"
        )));
    }
    Ok(v.iter().map(|x| x / denom).collect())
}

impl ShiftOperator for ScalarShift {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        v.iter().map(|x| x * self.sigma).collect()
    }

    fn solve_shifted(&self, alpha: f64, v: &[f64]) -> Result<Vec<f64>> {
        check_alpha(alpha)?;
        Error::check_dim(self.n, v.len())?;
        scalar_shift_solve(self.sigma, alpha, v)
    }

    fn diagonal(&self) -> Vec<f64> {
        vec![self.sigma; self.n]
    }

    fn theta_min(&self) -> f64 {
        self.sigma
    }
}

/// `G = diag(d)` with every `d_i > 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalShift {
    d: Vec<f64>,
    min: f64,
}

impl DiagonalShift {
    pub fn new(d: Vec<f64>) -> Result<Self> {
        if d.is_empty() {
            return Err(Error::InvalidArgument("empty diagonal".into()));
        }
        if let Some((i, v)) = d
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v > 0.0 && v.is_finite()))
        {
            return Err(Error::Domain(format!(
                "diagonal entry {i} must be positive, got {v}"
            )));
        }
        let min = d.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(DiagonalShift { d, min })
    }

    pub fn values(&self) -> &[f64] {
        &self.d
    }
}

/// Componentwise `v_i / (d_i + alpha)`.
pub fn diagonal_shift_solve(d: &[f64], alpha: f64, v: &[f64]) -> Result<Vec<f64>> {
    Error::check_dim(d.len(), v.len())?;
    check_alpha(alpha)?;
    Ok(v.iter().zip(d).map(|(x, di)| x / (di + alpha)).collect())
}

impl ShiftOperator for DiagonalShift {
    fn dim(&self) -> usize {
        self.d.len()
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        v.iter().zip(&self.d).map(|(x, d)| x * d).collect()
    }

    fn solve_shifted(&self, alpha: f64, v: &[f64]) -> Result<Vec<f64>> {
        diagonal_shift_solve(&self.d, alpha, v)
    }

    fn diagonal(&self) -> Vec<f64> {
        self.d.clone()
    }

    fn theta_min(&self) -> f64 {
        self.min
    }
}

/// `LDL^T` factors of `T + alpha I`: unit lower bidiagonal `L` with
/// subdiagonal `l`, diagonal `D = pivots`.
#[derive(Debug, Clone)]
struct TridiagonalLdl {
    alpha: f64,
    pivots: Vec<f64>,
    l: Vec<f64>,
}

impl TridiagonalLdl {
    fn factor(main: &[f64], off: &[f64], alpha: f64) -> Result<Self> {
        let n = main.len();
        let mut pivots = Vec::with_capacity(n);
        let mut l = Vec::with_capacity(off.len());
        let mut prev = main[0] + alpha;
        if !(prev > 0.0 && prev.is_finite()) {
            return Err(Error::NonPositivePivot { row: 0, pivot: prev });
        }
        pivots.push(prev);
        for i in 1..n {
            let li = off[i - 1] / prev;
            let pivot = main[i] + alpha - li * off[i - 1];
            if !(pivot > 0.0 && pivot.is_finite()) {
                return Err(Error::NonPositivePivot { row: i, pivot });
            }
            l.push(li);
            pivots.push(pivot);
            prev = pivot;
        }
        Ok(TridiagonalLdl { alpha, pivots, l })
    }

    fn solve(&self, v: &[f64]) -> Vec<f64> {
        let n = v.len();
        let mut x = v.to_vec();
        for i in 1..n {
            x[i] -= self.l[i - 1] * x[i - 1];
        }
        for (xi, p) in x.iter_mut().zip(&self.pivots) {
            *xi /= p;
        }
        for i in (0..n.saturating_sub(1)).rev() {
            x[i] -= self.l[i] * x[i + 1];
        }
        x
    }
}

/// Symmetric tridiagonal `G` with main diagonal `main` and off-diagonal
/// `off` (`off[i] = G[i][i+1] = G[i+1][i]`).
///
/// Shifted solves use an unpivoted `LDL^T` factorization. The factors for
/// the most recently used `alpha` are kept, so repeated solves with the same
/// shift cost two O(n) sweeps.
#[derive(Debug)]
pub struct TridiagonalShift {
    main: Vec<f64>,
    off: Vec<f64>,
    floor: f64,
    cache: Mutex<Option<Arc<TridiagonalLdl>>>,
}

impl Clone for TridiagonalShift {
    fn clone(&self) -> Self {
        TridiagonalShift {
            main: self.main.clone(),
            off: self.off.clone(),
            floor: self.floor,
            cache: Mutex::new(None),
        }
    }
}

impl PartialEq for TridiagonalShift {
    fn eq(&self, other: &Self) -> bool {
        self.main == other.main && self.off == other.off
    }
}

impl TridiagonalShift {
    /// Requires `off.len() == main.len() - 1` and a positive Gershgorin
    /// floor `min_i (main_i - |off_{i-1}| - |off_i|)`.
    pub fn new(main: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if main.is_empty() {
            return Err(Error::InvalidArgument("empty diagonal".into()));
        }
        Error::check_dim(main.len() - 1, off.len())?;
        if main.iter().chain(&off).any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite tridiagonal entry".into()));
        }
        let floor = gershgorin_floor(&main, &off);
        if floor <= 0.0 {
            return Err(Error::Domain(format!(
                "Gershgorin floor {floor} is not positive"
            )));
        }
        Ok(TridiagonalShift {
            main,
            off,
            floor,
            cache: Mutex::new(None),
        })
    }

    pub fn main_diagonal(&self) -> &[f64] {
        &self.main
    }

    pub fn off_diagonal(&self) -> &[f64] {
        &self.off
    }

    fn factors(&self, alpha: f64) -> Result<Arc<TridiagonalLdl>> {
        let mut slot = self.cache.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(f) = slot.as_ref() {
            if f.alpha.to_bits() == alpha.to_bits() {
                return Ok(Arc::clone(f));
            }
        }
        let f = Arc::new(TridiagonalLdl::factor(&self.main, &self.off, alpha)?);
        *slot = Some(Arc::clone(&f));
        Ok(f)
    }
}

fn gershgorin_floor(main: &[f64], off: &[f64]) -> f64 {
    let n = main.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { off[i].abs() } else { 0.0 };
            main[i] - left - right
        })
        .fold(f64::INFINITY, f64::min)
}

/// `(T + alpha I)^{-1} v`.
pub fn tridiagonal_shift_solve(t: &TridiagonalShift, alpha: f64, v: &[f64]) -> Result<Vec<f64>> {
    Error::check_dim(t.main.len(), v.len())?;
    check_alpha(alpha)?;
    Ok(t.factors(alpha)?.solve(v))
}

impl ShiftOperator for TridiagonalShift {
    fn dim(&self) -> usize {
        self.main.len()
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        let n = self.main.len();
        let mut out: Vec<f64> = v.iter().zip(&self.main).map(|(x, d)| x * d).collect();
        for i in 0..n.saturating_sub(1) {
            out[i] += self.off[i] * v[i + 1];
            out[i + 1] += self.off[i] * v[i];
        }
        out
    }

    fn solve_shifted(&self, alpha: f64, v: &[f64]) -> Result<Vec<f64>> {
        tridiagonal_shift_solve(self, alpha, v)
    }

    fn diagonal(&self) -> Vec<f64> {
        self.main.clone()
    }

    fn theta_min(&self) -> f64 {
        self.floor
    }
}

/// The three supported shift structures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ShiftKind {
    Scalar,
    Diagonal,
    Tridiagonal,
}

impl ShiftKind {
    pub const ALL: [ShiftKind; 3] = [ShiftKind::Scalar, ShiftKind::Diagonal, ShiftKind::Tridiagonal];

    pub fn as_str(&self) -> &'static str {
        match self {
            ShiftKind::Scalar => "scalar",
            ShiftKind::Diagonal => "diag",
            ShiftKind::Tridiagonal => "tridiag",
        }
    }
}

impl fmt::Display for ShiftKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ShiftKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scalar" => Ok(ShiftKind::Scalar),
            "diag" | "diagonal" => Ok(ShiftKind::Diagonal),
            "tridiag" | "tridiagonal" => Ok(ShiftKind::Tridiagonal),
            other => Err(Error::InvalidArgument(format!("unknown shift kind '{other}'"))),
        }
    }
}

/// Any of the concrete shifts, for code that picks the structure at runtime.
#[derive(Debug, Clone, PartialEq)]
pub enum Shift {
    Scalar(ScalarShift),
    Diagonal(DiagonalShift),
    Tridiagonal(TridiagonalShift),
}

impl Shift {
    pub fn kind(&self) -> ShiftKind {
        match self {
            Shift::Scalar(_) => ShiftKind::Scalar,
            Shift::Diagonal(_) => ShiftKind::Diagonal,
            Shift::Tridiagonal(_) => ShiftKind::Tridiagonal,
        }
    }

    fn inner(&self) -> &dyn ShiftOperator {
        match self {
            Shift::Scalar(s) => s,
            Shift::Diagonal(s) => s,
            Shift::Tridiagonal(s) => s,
        }
    }

    /// `G + diag(extra)` for a nonnegative `extra` of length `n`. The result
    /// keeps the band structure (diagonal or tridiagonal).
    pub fn add_diagonal(&self, extra: &[f64]) -> Result<Shift> {
        let n = extra.len();
        match self {
            Shift::Scalar(s) => {
                Error::check_dim(s.n, n)?;
                Ok(Shift::Diagonal(DiagonalShift::new(
                    extra.iter().map(|e| s.sigma + e).collect(),
                )?))
            }
            Shift::Diagonal(d) => {
                Error::check_dim(d.d.len(), n)?;
                Ok(Shift::Diagonal(DiagonalShift::new(
                    d.d.iter().zip(extra).map(|(a, b)| a + b).collect(),
                )?))
            }
            Shift::Tridiagonal(t) => {
                Error::check_dim(t.main.len(), n)?;
                Ok(Shift::Tridiagonal(TridiagonalShift::new(
                    t.main.iter().zip(extra).map(|(a, b)| a + b).collect(),
                    t.off.clone(),
                )?))
            }
        }
    }
}

impl From<ScalarShift> for Shift {
    fn from(s: ScalarShift) -> Self {
        Shift::Scalar(s)
    }
}

impl From<DiagonalShift> for Shift {
    fn from(s: DiagonalShift) -> Self {
        Shift::Diagonal(s)
    }
}

impl From<TridiagonalShift> for Shift {
    fn from(s: TridiagonalShift) -> Self {
        Shift::Tridiagonal(s)
    }
}

impl ShiftOperator for Shift {
    fn dim(&self) -> usize {
        self.inner().dim()
    }

    fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.inner().apply(v)
    }

    fn solve_shifted(&self, alpha: f64, v: &[f64]) -> Result<Vec<f64>> {
        self.inner().solve_shifted(alpha, v)
    }

    fn diagonal(&self) -> Vec<f64> {
        self.inner().diagonal()
    }

    fn theta_min(&self) -> f64 {
        self.inner().theta_min()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::rel_diff;

    #[test]
    fn scalar_identity_and_division() {
        assert_eq!(scalar_shift_solve(1.0, 0.0, &[3.0]).unwrap(), vec![3.0]);
        assert_eq!(
            scalar_shift_solve(0.5, 2.0, &[5.0, 10.0]).unwrap(),
            vec![2.0, 4.0]
        );
        assert!(matches!(
            scalar_shift_solve(0.5, -1.0, &[1.0]),
            Err(Error::Domain(_))
        ));
        let s = ScalarShift::new(0.3, 2).unwrap();
        assert_eq!(s.theta_min(), 0.3);
        let v = [1.5, -2.0];
        let gv: Vec<f64> = s.apply(&v).iter().zip(&v).map(|(g, x)| g + 0.7 * x).collect();
        let back = s.solve_shifted(0.7, &gv).unwrap();
        assert!(rel_diff(&back, &v) < 1e-15);
        assert!(ScalarShift::new(0.0, 2).is_err());
        assert!(s.solve_shifted(0.7, &[1.0]).is_err());
    }

    #[test]
    fn diagonal_examples() {
        let id = DiagonalShift::new(vec![1.0, 1.0]).unwrap();
        assert_eq!(id.solve_shifted(0.0, &[4.0, 5.0]).unwrap(), vec![4.0, 5.0]);
        let d = DiagonalShift::new(vec![2.0, 4.0]).unwrap();
        assert_eq!(d.solve_shifted(1.0, &[6.0, 10.0]).unwrap(), vec![2.0, 2.0]);
        assert_eq!(d.theta_min(), 2.0);
        assert!(matches!(
            DiagonalShift::new(vec![1.0, 0.0]),
            Err(Error::Domain(_))
        ));
        assert!(d.solve_shifted(1.0, &[1.0]).is_err());
    }

    #[test]
    fn tridiagonal_two_by_two() {
        let t = TridiagonalShift::new(vec![3.0, 3.0], vec![-1.0]).unwrap();
        let x = t.solve_shifted(0.0, &[2.0, 2.0]).unwrap();
        assert!(rel_diff(&x, &[1.0, 1.0]) < 1e-15);
        assert_eq!(t.theta_min(), 2.0);
        assert_eq!(t.apply(&[1.0, 1.0]), vec![2.0, 2.0]);
    }

    #[test]
    fn tridiagonal_without_band_matches_diagonal() {
        let main = vec![1.5, 2.0, 0.5, 4.0];
        let t = TridiagonalShift::new(main.clone(), vec![0.0; 3]).unwrap();
        let v = [1.0, -2.0, 3.0, 0.25];
        let a = t.solve_shifted(0.3, &v).unwrap();
        let b = diagonal_shift_solve(&main, 0.3, &v).unwrap();
        assert!(rel_diff(&a, &b) < 1e-15);
    }

    #[test]
    fn tridiagonal_single_entry() {
        let t = TridiagonalShift::new(vec![2.0], vec![]).unwrap();
        assert_eq!(t.solve_shifted(2.0, &[8.0]).unwrap(), vec![2.0]);
        assert_eq!(t.theta_min(), 2.0);
    }

    #[test]
    fn tridiagonal_rejects_bad_input() {
        assert!(TridiagonalShift::new(vec![1.0, 1.0], vec![-1.0]).is_err());
        assert!(TridiagonalShift::new(vec![3.0, 3.0], vec![]).is_err());
        assert!(TridiagonalShift::new(vec![], vec![]).is_err());
    }

    #[test]
    fn ldl_reports_nonpositive_pivot() {
        // Bypass the Gershgorin check to hit the factorization guard.
        let err = TridiagonalLdl::factor(&[1.0, 1.0], &[2.0], 0.0).unwrap_err();
        assert!(matches!(err, Error::NonPositivePivot { row: 1, .. }));
    }

    #[test]
    fn factor_cache_reused_for_same_alpha() {
        let t = TridiagonalShift::new(vec![3.0, 3.0, 3.0], vec![-1.0, -1.0]).unwrap();
        let f1 = t.factors(0.5).unwrap();
        let f2 = t.factors(0.5).unwrap();
        assert!(Arc::ptr_eq(&f1, &f2));
        let f3 = t.factors(0.25).unwrap();
        assert!(!Arc::ptr_eq(&f1, &f3));
    }

    #[test]
    fn add_diagonal_keeps_structure() {
        let extra = [1.0, 2.0];
        let s: Shift = ScalarShift::new(0.5, 2).unwrap().into();
        assert_eq!(
            s.add_diagonal(&extra).unwrap(),
            Shift::Diagonal(DiagonalShift::new(vec![1.5, 2.5]).unwrap())
        );
        let t: Shift = TridiagonalShift::new(vec![3.0, 3.0], vec![-1.0]).unwrap().into();
        let t2 = t.add_diagonal(&extra).unwrap();
        assert_eq!(t2.kind(), ShiftKind::Tridiagonal);
        assert_eq!(t2.diagonal(), vec![4.0, 5.0]);
    }

    #[test]
    fn shift_kind_round_trip() {
        for k in ShiftKind::ALL {
            assert_eq!(k.as_str().parse::<ShiftKind>().unwrap(), k);
        }
        assert!("circulant".parse::<ShiftKind>().is_err());
    }
}
