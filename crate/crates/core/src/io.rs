//! Plain-text import and export.
//!
//! All values are written in shortest round-trip scientific notation, so a
//! write followed by a read reproduces every `f64` bit for bit.
//!
//! * pairs: header `n k gamma`, then `S` as `n` rows of `k` values, then `Y`
//!   the same way;
//! * tridiagonal shift: line 1 `n`, line 2 the main diagonal, line 3 the
//!   off-diagonal (`n - 1` values);
//! * diagonal shift: line 1 `n`, line 2 the diagonal;
//! * vectors: one value per line.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::lbfgs::{LbfgsPairs, PushOutcome, DEFAULT_CAPACITY};
use crate::shift::{DiagonalShift, Shift, ShiftKind, TridiagonalShift};

struct Lines<'a> {
    path: &'a Path,
    lines: Vec<&'a str>,
    next: usize,
}

impl<'a> Lines<'a> {
    fn new(path: &'a Path, text: &'a str) -> Self {
        Lines {
            path,
            lines: text.lines().collect(),
            next: 0,
        }
    }

    fn err(&self, line: usize, msg: impl Into<String>) -> Error {
        Error::Parse {
            path: self.path.to_path_buf(),
            line,
            msg: msg.into(),
        }
    }

    /// Next line split into `count` values. An empty row may be omitted
    /// entirely at the end of the file.
    fn row<T: FromStr>(&mut self, count: usize, what: &str) -> Result<Vec<T>>
    where
        T::Err: std::fmt::Display,
    {
        let lineno = self.next + 1;
        let Some(line) = self.lines.get(self.next) else {
            if count == 0 {
                return Ok(Vec::new());
            }
            return Err(self.err(lineno, format!("missing {what}")));
        };
        self.next += 1;
        let values = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<T>()
                    .map_err(|e| self.err(lineno, format!("bad value '{tok}' in {what}: {e}")))
            })
            .collect::<Result<Vec<T>>>()?;
        if values.len() != count {
            return Err(self.err(
                lineno,
                format!("{what}: expected {count} values, found {}", values.len()),
            ));
        }
        Ok(values)
    }

    fn finish(&self) -> Result<()> {
        match self.lines[self.next.min(self.lines.len())..]
            .iter()
            .position(|l| !l.trim().is_empty())
        {
            Some(offset) => Err(self.err(self.next + offset + 1, "unexpected trailing data")),
            None => Ok(()),
        }
    }
}

fn push_row(out: &mut String, values: impl IntoIterator<Item = f64>) {
    let mut first = true;
    for v in values {
        if !first {
            out.push(' ');
        }
        first = false;
        let _ = write!(out, "{v:e}");
    }
    out.push('\n');
}

fn dimension(lines: &mut Lines<'_>) -> Result<usize> {
    let n = lines.row::<usize>(1, "dimension header")?[0];
    if n == 0 {
        return Err(lines.err(1, "dimension must be at least 1"));
    }
    Ok(n)
}

pub fn pairs_to_string(pairs: &LbfgsPairs) -> String {
    let (n, k) = (pairs.dim(), pairs.len());
    let mut out = format!("{n} {k} {:e}\n", pairs.gamma());
    for vectors in [
        pairs.s_vectors().collect::<Vec<_>>(),
        pairs.y_vectors().collect(),
    ] {
        for row in 0..n {
            push_row(&mut out, vectors.iter().map(|v| v[row]));
        }
    }
    out
}

/// Parses a pairs file. Pairs are pushed oldest first (column 0) and the
/// header `gamma` is applied last. Capacity is `max(k, capacity)`.
pub fn pairs_from_str(text: &str, origin: &Path, capacity: usize, delta: f64) -> Result<LbfgsPairs> {
    let mut lines = Lines::new(origin, text);
    let header: Vec<&str> = lines
        .lines
        .first()
        .map(|l| l.split_whitespace().collect())
        .unwrap_or_default();
    if header.len() != 3 {
        return Err(lines.err(1, "expected header 'n k gamma'"));
    }
    let n: usize = header[0]
        .parse()
        .map_err(|e| lines.err(1, format!("bad n: {e}")))?;
    let k: usize = header[1]
        .parse()
        .map_err(|e| lines.err(1, format!("bad k: {e}")))?;
    let gamma: f64 = header[2]
        .parse()
        .map_err(|e| lines.err(1, format!("bad gamma: {e}")))?;
    if n == 0 {
        return Err(lines.err(1, "n must be at least 1"));
    }
    lines.next = 1;

    let mut s = vec![vec![0.0; n]; k];
    let mut y = vec![vec![0.0; n]; k];
    for (matrix, name) in [(&mut s, "S row"), (&mut y, "Y row")] {
        for row in 0..n {
            for (col, v) in lines.row::<f64>(k, name)?.into_iter().enumerate() {
                matrix[col][row] = v;
            }
        }
    }
    lines.finish()?;

    let mut pairs = LbfgsPairs::new(n, k.max(capacity))?;
    for (i, (s, y)) in s.into_iter().zip(y).enumerate() {
        if let PushOutcome::Rejected { curvature } = pairs.push_pair(s, y, delta)? {
            return Err(lines.err(
                1,
                format!("pair {i} has curvature {curvature:e} below {delta:e}"),
            ));
        }
    }
    pairs
        .set_gamma(gamma)
        .map_err(|e| lines.err(1, e.to_string()))?;
    Ok(pairs)
}

pub fn write_pairs(path: &Path, pairs: &LbfgsPairs) -> Result<()> {
    std::fs::write(path, pairs_to_string(pairs))?;
    Ok(())
}

pub fn read_pairs(path: &Path, delta: f64) -> Result<LbfgsPairs> {
    pairs_from_str(&std::fs::read_to_string(path)?, path, DEFAULT_CAPACITY, delta)
}

pub fn tridiagonal_to_string(t: &TridiagonalShift) -> String {
    let mut out = format!("{}\n", t.main_diagonal().len());
    push_row(&mut out, t.main_diagonal().iter().copied());
    push_row(&mut out, t.off_diagonal().iter().copied());
    out
}

pub fn tridiagonal_from_str(text: &str, origin: &Path) -> Result<TridiagonalShift> {
    let mut lines = Lines::new(origin, text);
    let n = dimension(&mut lines)?;
    let main = lines.row(n, "main diagonal")?;
    let off = lines.row(n - 1, "off-diagonal")?;
    lines.finish()?;
    TridiagonalShift::new(main, off).map_err(|e| lines.err(2, e.to_string()))
}

pub fn diagonal_to_string(d: &DiagonalShift) -> String {
    let mut out = format!("{}\n", d.values().len());
    push_row(&mut out, d.values().iter().copied());
    out
}

pub fn diagonal_from_str(text: &str, origin: &Path) -> Result<DiagonalShift> {
    let mut lines = Lines::new(origin, text);
    let n = dimension(&mut lines)?;
    let d = lines.row(n, "diagonal")?;
    lines.finish()?;
    DiagonalShift::new(d).map_err(|e| lines.err(2, e.to_string()))
}

/// Reads a diagonal or tridiagonal shift file. Scalar shifts have no file
/// form.
pub fn read_shift(path: &Path, kind: ShiftKind) -> Result<Shift> {
    let text = std::fs::read_to_string(path)?;
    match kind {
        ShiftKind::Scalar => Err(Error::InvalidArgument(
            "scalar shifts are given by sigma, not a file".into(),
        )),
        ShiftKind::Diagonal => Ok(diagonal_from_str(&text, path)?.into()),
        ShiftKind::Tridiagonal => Ok(tridiagonal_from_str(&text, path)?.into()),
    }
}

/// Writes a diagonal or tridiagonal shift; returns `false` (and writes
/// nothing) for a scalar shift.
pub fn write_shift(path: &Path, shift: &Shift) -> Result<bool> {
    let text = match shift {
        Shift::Scalar(_) => return Ok(false),
        Shift::Diagonal(d) => diagonal_to_string(d),
        Shift::Tridiagonal(t) => tridiagonal_to_string(t),
    };
    std::fs::write(path, text)?;
    Ok(true)
}

pub fn vector_to_string(v: &[f64]) -> String {
    let mut out = String::with_capacity(24 * v.len());
    for x in v {
        let _ = writeln!(out, "{x:e}");
    }
    out
}

/// One value per line; blank lines are ignored.
pub fn vector_from_str(text: &str, origin: &Path) -> Result<Vec<f64>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse::<f64>().map_err(|e| Error::Parse {
                path: origin.to_path_buf(),
                line: i + 1,
                msg: format!("bad value '{}': {e}", l.trim()),
            })
        })
        .collect()
}

pub fn write_vector(path: &Path, v: &[f64]) -> Result<()> {
    std::fs::write(path, vector_to_string(v))?;
    Ok(())
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    vector_from_str(&std::fs::read_to_string(path)?, path)
}
