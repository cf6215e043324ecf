//! Compressed sparse row storage with a shared symbolic pattern.

use num_complex::Complex64;
use std::io::Write;
use std::ops::{Add, AddAssign, Mul, Sub};
use std::path::Path;
use std::sync::Arc;

/// Symbolic sparsity: row offsets and sorted column indices.
#[derive(Debug, PartialEq, Eq)]
pub struct SparsityPattern {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<u32>,
}

impl SparsityPattern {
    /// Build a square pattern from per-row neighbor lists (self-links are
    /// the caller's responsibility; duplicates are removed).
    pub fn from_adjacency(mut rows: Vec<Vec<u32>>) -> Arc<Self> {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0usize);
        let mut col_idx = Vec::new();
        for r in rows.iter_mut() {
            r.sort_unstable();
            r.dedup();
            col_idx.extend_from_slice(r);
            row_ptr.push(col_idx.len());
        }
        Arc::new(SparsityPattern { n, row_ptr, col_idx })
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }

    /// Flat index of entry (row, col), if present.
    pub fn find(&self, row: usize, col: usize) -> Option<usize> {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        self.col_idx[lo..hi]
            .binary_search(&(col as u32))
            .ok()
            .map(|p| lo + p)
    }

    /// Pattern symmetry: (i,j) present iff (j,i) present.
    pub fn is_symmetric(&self) -> bool {
        for row in 0..self.n {
            for &c in &self.col_idx[self.row_ptr[row]..self.row_ptr[row + 1]] {
                if self.find(c as usize, row).is_none() {
                    return false;
                }
            }
        }
        true
    }
}

/// Minimal scalar abstraction shared by the real and complex matrices.
pub trait Scalar:
    Copy
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + AddAssign
    + Default
{
    fn zero() -> Self;
    fn abs(self) -> f64;
    fn conj(self) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn abs(self) -> f64 {
        f64::abs(self)
    }
    fn conj(self) -> Self {
        self
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn abs(self) -> f64 {
        self.norm()
    }
    fn conj(self) -> Self {
        Complex64::conj(&self)
    }
}

/// Square CSR matrix over `T`, values stored against a shared pattern.
#[derive(Clone)]
pub struct CsrMatrix<T> {
    pub pattern: Arc<SparsityPattern>,
    pub values: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    pub fn zeros(pattern: &Arc<SparsityPattern>) -> Self {
        CsrMatrix {
            pattern: pattern.clone(),
            values: vec![T::zero(); pattern.nnz()],
        }
    }

    pub fn n(&self) -> usize {
        self.pattern.n
    }

    /// Add `v` to entry (row, col); the position must exist in the pattern.
    #[inline]
    pub fn add_at(&mut self, row: usize, col: usize, v: T) {
        let pos = self
            .pattern
            .find(row, col)
            .unwrap_or_else(|| panic!("entry ({row},{col}) outside sparsity pattern"));
        self.values[pos] += v;
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.pattern
            .find(row, col)
            .map_or(T::zero(), |p| self.values[p])
    }

    /// y = A x.
    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        let p = &self.pattern;
        for row in 0..p.n {
            let mut acc = T::zero();
            for pos in p.row_ptr[row]..p.row_ptr[row + 1] {
                acc += self.values[pos] * x[p.col_idx[pos] as usize];
            }
            y[row] = acc;
        }
    }

    pub fn matvec_alloc(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n()];
        self.matvec(x, &mut y);
        y
    }

    /// max |A_ij − A_ji| over the pattern.
    pub fn symmetry_defect(&self) -> f64 {
        let p = &self.pattern;
        let mut defect = 0.0f64;
        for row in 0..p.n {
            for pos in p.row_ptr[row]..p.row_ptr[row + 1] {
                let col = p.col_idx[pos] as usize;
                let d = self.values[pos] - self.get(col, row);
                defect = defect.max(d.abs());
            }
        }
        defect
    }

    /// Symmetric constraint elimination with zero boundary values: zero the
    /// constrained rows and columns and set the diagonal to `diag`. Solving
    /// the modified system reproduces the reduced system's solution, with
    /// exact zeros in the constrained entries (for zero right-hand sides
    /// there).
    pub fn apply_constraints(&mut self, constrained: &[bool], diag: T) {
        let p = self.pattern.clone();
        for row in 0..p.n {
            if constrained[row] {
                for pos in p.row_ptr[row]..p.row_ptr[row + 1] {
                    self.values[pos] = if p.col_idx[pos] as usize == row {
                        diag
                    } else {
                        T::zero()
                    };
                }
            } else {
                for pos in p.row_ptr[row]..p.row_ptr[row + 1] {
                    if constrained[p.col_idx[pos] as usize] {
                        self.values[pos] = T::zero();
                    }
                }
            }
        }
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n()).map(|i| self.get(i, i)).collect()
    }

    pub fn scale(&mut self, s: T) {
        for v in &mut self.values {
            *v = *v * s;
        }
    }
}

impl CsrMatrix<f64> {
    /// self += alpha * other, where other's pattern is a subset of self's.
    pub fn add_scaled(&mut self, other: &CsrMatrix<f64>, alpha: f64) {
        add_scaled_impl(self, other, alpha);
    }

    /// y = A x for a complex vector over a real matrix.
    pub fn matvec_complex(&self, x: &[Complex64]) -> Vec<Complex64> {
        let p = &self.pattern;
        let mut y = vec![Complex64::new(0.0, 0.0); p.n];
        for row in 0..p.n {
            let mut acc = Complex64::new(0.0, 0.0);
            for pos in p.row_ptr[row]..p.row_ptr[row + 1] {
                acc += x[p.col_idx[pos] as usize] * self.values[pos];
            }
            y[row] = acc;
        }
        y
    }
}

impl CsrMatrix<Complex64> {
    /// self += alpha * other for a real-valued other with subset pattern.
    pub fn add_scaled_real(&mut self, other: &CsrMatrix<f64>, alpha: Complex64) {
        let sp = &other.pattern;
        if Arc::ptr_eq(&self.pattern, sp) {
            for (v, &o) in self.values.iter_mut().zip(&other.values) {
                *v += alpha * o;
            }
            return;
        }
        for row in 0..sp.n {
            for pos in sp.row_ptr[row]..sp.row_ptr[row + 1] {
                let col = sp.col_idx[pos] as usize;
                let dst = self
                    .pattern
                    .find(row, col)
                    .expect("subset pattern entry missing in destination");
                self.values[dst] += alpha * other.values[pos];
            }
        }
    }
}

fn add_scaled_impl(dst: &mut CsrMatrix<f64>, src: &CsrMatrix<f64>, alpha: f64) {
    if Arc::ptr_eq(&dst.pattern, &src.pattern) {
        for (v, &o) in dst.values.iter_mut().zip(&src.values) {
            *v += alpha * o;
        }
        return;
    }
    let sp = &src.pattern;
    let dp = dst.pattern.clone();
    for row in 0..sp.n {
        let mut dpos = dp.row_ptr[row];
        for pos in sp.row_ptr[row]..sp.row_ptr[row + 1] {
            let col = sp.col_idx[pos];
            // merged walk: destination columns are sorted and superset
            while dp.col_idx[dpos] != col {
                dpos += 1;
                debug_assert!(dpos < dp.row_ptr[row + 1], "pattern not a subset");
            }
            dst.values[dpos] += alpha * src.values[pos];
        }
    }
}

/// Dump a real matrix in MatrixMarket coordinate format (1-based).
pub fn write_matrix_market(path: &Path, m: &CsrMatrix<f64>) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(f, "{} {} {}", m.n(), m.n(), m.pattern.nnz())?;
    for row in 0..m.n() {
        for pos in m.pattern.row_ptr[row]..m.pattern.row_ptr[row + 1] {
            writeln!(
                f,
                "{} {} {:.16e}",
                row + 1,
                m.pattern.col_idx[pos] + 1,
                m.values[pos]
            )?;
        }
    }
    Ok(())
}

/// Dump a complex matrix in MatrixMarket coordinate format (1-based).
pub fn write_matrix_market_complex(path: &Path, m: &CsrMatrix<Complex64>) -> std::io::Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "%%MatrixMarket matrix coordinate complex general")?;
    writeln!(f, "{} {} {}", m.n(), m.n(), m.pattern.nnz())?;
    for row in 0..m.n() {
        for pos in m.pattern.row_ptr[row]..m.pattern.row_ptr[row + 1] {
            let v = m.values[pos];
            writeln!(
                f,
                "{} {} {:.16e} {:.16e}",
                row + 1,
                m.pattern.col_idx[pos] + 1,
                v.re,
                v.im
            )?;
        }
    }
    Ok(())
}
