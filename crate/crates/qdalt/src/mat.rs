//! Dense matrices over a [`Field`], with the echelon-form toolkit every code
//! operation sits on. Matrices are immutable value types; all operations
//! return fresh matrices. Dimension or field mismatches are programmer
//! errors and panic.

use std::fmt;
use std::sync::Arc;

use crate::field::{Fe, Field};

#[derive(Clone, PartialEq, Eq)]
pub struct Mat {
    field: Arc<Field>,
    rows: usize,
    cols: usize,
    data: Vec<Fe>,
}

impl fmt::Debug for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Mat {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|e| e.to_string()).collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

/// `dst ^= c * src`, elementwise over the field. The scalar is fixed for the
/// whole row, so fields with a full multiplication table get a branch-free loop.
#[inline]
fn row_addmul(f: &Field, dst: &mut [Fe], src: &[Fe], c: Fe) {
    debug_assert_eq!(dst.len(), src.len());
    if c.is_zero() {
        return;
    }
    if c == Fe::ONE {
        for (d, s) in dst.iter_mut().zip(src) {
            d.0 ^= s.0;
        }
        return;
    }
    if let Some(tab) = f.mul_row(c) {
        for (d, s) in dst.iter_mut().zip(src) {
            d.0 ^= tab[s.0 as usize];
        }
    } else {
        let lc = f.log_of(c);
        for (d, s) in dst.iter_mut().zip(src) {
            if s.0 != 0 {
                d.0 ^= f.exp_at(lc + f.log_of(*s));
            }
        }
    }
}

#[inline]
fn row_scale(f: &Field, row: &mut [Fe], c: Fe) {
    if c == Fe::ONE {
        return;
    }
    if let Some(tab) = f.mul_row(c) {
        for e in row.iter_mut() {
            e.0 = tab[e.0 as usize];
        }
    } else {
        let lc = f.log_of(c);
        for e in row.iter_mut() {
            if e.0 != 0 {
                e.0 = f.exp_at(lc + f.log_of(*e));
            }
        }
    }
}

impl Mat {
    pub fn new(field: Arc<Field>, rows: usize, cols: usize, data: Vec<Fe>) -> Self {
        assert_eq!(rows * cols, data.len());
        debug_assert!(data.iter().all(|e| (e.0 as u32) < field.qsq()));
        Mat {
            field,
            rows,
            cols,
            data,
        }
    }

    pub fn zeros(field: Arc<Field>, rows: usize, cols: usize) -> Self {
        Mat {
            field,
            rows,
            cols,
            data: vec![Fe::ZERO; rows * cols],
        }
    }

    pub fn identity(field: Arc<Field>, n: usize) -> Self {
        let mut m = Mat::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, Fe::ONE);
        }
        m
    }

    pub fn from_rows(field: Arc<Field>, cols: usize, rows: Vec<Vec<Fe>>) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in &rows {
            assert_eq!(r.len(), cols);
            data.extend_from_slice(r);
        }
        Mat::new(field, rows.len(), cols, data)
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Fe {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Fe) {
        self.data[r * self.cols + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[Fe] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[Fe]> {
        self.data.chunks_exact(self.cols.max(1)).take(self.rows)
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.field.clone(), self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c));
            }
        }
        out
    }

    pub fn stack(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.cols);
        assert_eq!(self.field, other.field);
        let mut data = self.data.clone();
        data.extend_from_slice(&other.data);
        Mat::new(self.field.clone(), self.rows + other.rows, self.cols, data)
    }

    pub fn select_cols(&self, keep: &[usize]) -> Mat {
        let mut out = Mat::zeros(self.field.clone(), self.rows, keep.len());
        for r in 0..self.rows {
            for (j, &c) in keep.iter().enumerate() {
                out.set(r, j, self.get(r, c));
            }
        }
        out
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        assert_eq!(self.field, other.field);
        let f = &*self.field;
        let mut out = Mat::zeros(self.field.clone(), self.rows, other.cols);
        for i in 0..self.rows {
            let (lo, hi) = (i * other.cols, (i + 1) * other.cols);
            for k in 0..self.cols {
                row_addmul(f, &mut out.data[lo..hi], other.row(k), self.get(i, k));
            }
        }
        out
    }

    /// `v * self` for a row vector `v` of length `rows`.
    pub fn left_mul_vec(&self, v: &[Fe]) -> Vec<Fe> {
        assert_eq!(v.len(), self.rows);
        let f = &*self.field;
        let mut out = vec![Fe::ZERO; self.cols];
        for (k, &c) in v.iter().enumerate() {
            row_addmul(f, &mut out, self.row(k), c);
        }
        out
    }

    /// `self * v^T` for a vector `v` of length `cols`.
    pub fn mul_vec(&self, v: &[Fe]) -> Vec<Fe> {
        assert_eq!(v.len(), self.cols);
        let f = &*self.field;
        self.row_iter()
            .map(|row| {
                let mut acc = Fe::ZERO;
                for (&a, &b) in row.iter().zip(v) {
                    acc = f.add(acc, f.mul(a, b));
                }
                acc
            })
            .collect()
    }

    /// Reduced row echelon form with zero rows dropped, plus the pivot columns.
    /// This is the canonical representative used for code equality.
    pub fn rref(&self) -> (Mat, Vec<usize>) {
        let f = self.field.clone();
        let mut data = self.data.clone();
        let cols = self.cols;
        let mut pivots = Vec::new();
        let mut r = 0;
        for col in 0..cols {
            let Some(pr) = (r..self.rows).find(|&i| !data[i * cols + col].is_zero()) else {
                continue;
            };
            if pr != r {
                for c in 0..cols {
                    data.swap(r * cols + c, pr * cols + c);
                }
            }
            let pivot = data[r * cols + col];
            row_scale(&f, &mut data[r * cols..(r + 1) * cols], f.inv_nz(pivot));
            let pivot_row: Vec<Fe> = data[r * cols..(r + 1) * cols].to_vec();
            for i in 0..self.rows {
                if i == r {
                    continue;
                }
                let c = data[i * cols + col];
                if !c.is_zero() {
                    row_addmul(&f, &mut data[i * cols..(i + 1) * cols], &pivot_row, c);
                }
            }
            pivots.push(col);
            r += 1;
            if r == self.rows {
                break;
            }
        }
        data.truncate(r * cols);
        (Mat::new(f, r, cols, data), pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().0.rows
    }

    /// Basis of `{ v : self * v^T = 0 }`, one row per kernel dimension.
    pub fn right_kernel(&self) -> Mat {
        let (r, pivots) = self.rref();
        let n = self.cols;
        let mut is_pivot = vec![false; n];
        for &p in &pivots {
            is_pivot[p] = true;
        }
        let free: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        let mut out = Mat::zeros(self.field.clone(), free.len(), n);
        for (i, &fc) in free.iter().enumerate() {
            out.set(i, fc, Fe::ONE);
            for (pr, &pc) in pivots.iter().enumerate() {
                // Characteristic 2: -x = x.
                out.set(i, pc, r.get(pr, fc));
            }
        }
        out
    }

    /// Any `v` with `self * v^T = b^T`, or `None` when the system is inconsistent.
    pub fn solve(&self, b: &[Fe]) -> Option<Vec<Fe>> {
        assert_eq!(b.len(), self.rows);
        let mut aug = Mat::zeros(self.field.clone(), self.rows, self.cols + 1);
        for (r, &rhs) in b.iter().enumerate() {
            for c in 0..self.cols {
                aug.set(r, c, self.get(r, c));
            }
            aug.set(r, self.cols, rhs);
        }
        let (r, pivots) = aug.rref();
        if pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut v = vec![Fe::ZERO; self.cols];
        for (i, &p) in pivots.iter().enumerate() {
            v[p] = r.get(i, self.cols);
        }
        Some(v)
    }

    /// Basis (in rref) of `rowspace(self) ∩ rowspace(other)`, computed through
    /// the duals: a vector lies in both row spaces iff it is orthogonal to
    /// both kernels.
    pub fn rowspace_intersect(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.cols);
        assert_eq!(self.field, other.field);
        let ka = self.right_kernel();
        let kb = other.right_kernel();
        ka.stack(&kb).right_kernel().rref().0
    }
}
