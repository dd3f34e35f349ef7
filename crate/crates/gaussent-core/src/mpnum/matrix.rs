//! Dense row-major matrix over arbitrary-precision reals.

use super::PrecisionContext;
use crate::error::{Error, Result};
use rug::{Assign, Float};
use std::fmt;
use std::ops::{Index, IndexMut};

#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Float>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize, ctx: &PrecisionContext) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: (0..rows * cols).map(|_| ctx.zero()).collect(),
        }
    }

    pub fn identity(n: usize, ctx: &PrecisionContext) -> Self {
        let mut m = Self::zeros(n, n, ctx);
        for i in 0..n {
            m[(i, i)] = ctx.one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, ctx: &PrecisionContext, mut f: impl FnMut(usize, usize) -> Float) -> Self {
        let mut m = Self::zeros(rows, cols, ctx);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build from f64 rows; for tests and integer-valued fixtures.
    pub fn from_rows_f64(rows: &[&[f64]], ctx: &PrecisionContext) -> Self {
        let r = rows.len();
        let c = rows[0].len();
        Self::from_fn(r, c, ctx, |i, j| ctx.real(rows[i][j]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    fn prec(&self) -> u32 {
        self.data[0].prec()
    }

    pub fn transpose(&self) -> Self {
        let mut out = self.clone();
        out.rows = self.cols;
        out.cols = self.rows;
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].clone();
            }
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let prec = self.prec().max(other.prec());
        let mut out = Matrix {
            rows: self.rows,
            cols: other.cols,
            data: (0..self.rows * other.cols).map(|_| Float::new(prec)).collect(),
        };
        let mut t = Float::new(prec);
        for i in 0..self.rows {
            for j in 0..other.cols {
                let acc = &mut out.data[i * other.cols + j];
                for k in 0..self.cols {
                    t.assign(&self.data[i * self.cols + k] * &other.data[k * other.cols + j]);
                    *acc += &t;
                }
            }
        }
        out
    }

    /// self * other^T without materializing the transpose.
    pub fn mul_transpose(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols, "mul_transpose dimension mismatch");
        let prec = self.prec().max(other.prec());
        let mut out = Matrix {
            rows: self.rows,
            cols: other.rows,
            data: (0..self.rows * other.rows).map(|_| Float::new(prec)).collect(),
        };
        let mut t = Float::new(prec);
        for i in 0..self.rows {
            for j in 0..other.rows {
                let acc = &mut out.data[i * other.rows + j];
                for k in 0..self.cols {
                    t.assign(&self.data[i * self.cols + k] * &other.data[j * other.cols + k]);
                    *acc += &t;
                }
            }
        }
        out
    }

    /// Congruence transform S * A * S^T.
    pub fn congruence(&self, a: &Self) -> Self {
        self.mul(a).mul_transpose(self)
    }

    pub fn mul_vec(&self, v: &[Float]) -> Vec<Float> {
        assert_eq!(self.cols, v.len());
        let prec = self.prec();
        let mut t = Float::new(prec);
        (0..self.rows)
            .map(|i| {
                let mut acc = Float::new(prec);
                for k in 0..self.cols {
                    t.assign(&self.data[i * self.cols + k] * &v[k]);
                    acc += &t;
                }
                acc
            })
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, s: &Float) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= s;
        }
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= -1i32;
        }
        out
    }

    /// Frobenius norm.
    pub fn norm_fro(&self) -> Float {
        let prec = self.prec();
        let mut acc = Float::new(prec);
        let mut t = Float::new(prec);
        for a in &self.data {
            t.assign(a * a);
            acc += &t;
        }
        acc.sqrt()
    }

    pub fn max_abs(&self) -> Float {
        let mut best = Float::new(self.prec());
        for a in &self.data {
            let mut t = a.clone();
            t.abs_mut();
            if t > best {
                best = t;
            }
        }
        best
    }

    /// Relative asymmetry ||A - A^T|| / ||A|| (max-abs norms); 0 for 1x1.
    pub fn asymmetry(&self) -> Float {
        assert!(self.is_square());
        let prec = self.prec();
        let mut worst = Float::new(prec);
        let mut t = Float::new(prec);
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                t.assign(&self.data[i * self.cols + j] - &self.data[j * self.cols + i]);
                t.abs_mut();
                if t > worst {
                    worst = t.clone();
                }
            }
        }
        let scale = self.max_abs();
        if scale.is_zero() {
            return worst;
        }
        worst / scale
    }

    /// Make exactly symmetric by averaging with the transpose.
    pub fn symmetrize(&self) -> Self {
        let mut out = self.clone();
        let mut t = Float::new(self.prec());
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                t.assign(&self.data[i * self.cols + j] + &self.data[j * self.cols + i]);
                t /= 2u32;
                out.data[i * self.cols + j] = t.clone();
                out.data[j * self.cols + i] = t.clone();
            }
        }
        out
    }

    pub fn block(&self, row0: usize, col0: usize, rows: usize, cols: usize) -> Self {
        assert!(row0 + rows <= self.rows && col0 + cols <= self.cols);
        let mut out = Matrix {
            rows,
            cols,
            data: Vec::with_capacity(rows * cols),
        };
        for i in 0..rows {
            for j in 0..cols {
                out.data.push(self.data[(row0 + i) * self.cols + (col0 + j)].clone());
            }
        }
        out
    }

    pub fn set_block(&mut self, row0: usize, col0: usize, b: &Self) {
        assert!(row0 + b.rows <= self.rows && col0 + b.cols <= self.cols);
        for i in 0..b.rows {
            for j in 0..b.cols {
                self.data[(row0 + i) * self.cols + (col0 + j)] = b.data[i * b.cols + j].clone();
            }
        }
    }

    /// Direct sum diag(self, other).
    pub fn direct_sum(&self, other: &Self, ctx: &PrecisionContext) -> Self {
        let mut out = Self::zeros(self.rows + other.rows, self.cols + other.cols, ctx);
        out.set_block(0, 0, self);
        out.set_block(self.rows, self.cols, other);
        out
    }

    /// Select rows and columns by index (used for mode reordering of
    /// covariance matrices, where indices come in coordinate pairs).
    pub fn select(&self, row_idx: &[usize], col_idx: &[usize]) -> Self {
        let mut out = Matrix {
            rows: row_idx.len(),
            cols: col_idx.len(),
            data: Vec::with_capacity(row_idx.len() * col_idx.len()),
        };
        for &i in row_idx {
            for &j in col_idx {
                out.data.push(self.data[i * self.cols + j].clone());
            }
        }
        out
    }

    /// LU factorization with partial pivoting; returns (LU, perm, sign).
    /// Zero pivots are left in place; callers check conditioning themselves.
    fn lu(&self) -> (Matrix, Vec<usize>, i32) {
        assert!(self.is_square());
        let n = self.rows;
        let mut lu = self.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1;
        let prec = self.prec();
        let mut t = Float::new(prec);
        for k in 0..n {
            // pivot
            let mut p = k;
            let mut best = lu.data[k * n + k].clone();
            best.abs_mut();
            for i in (k + 1)..n {
                let mut c = lu.data[i * n + k].clone();
                c.abs_mut();
                if c > best {
                    best = c;
                    p = i;
                }
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                sign = -sign;
            }
            if lu.data[k * n + k].is_zero() {
                continue;
            }
            for i in (k + 1)..n {
                let factor = {
                    let mut f = lu.data[i * n + k].clone();
                    f /= &lu.data[k * n + k];
                    f
                };
                lu.data[i * n + k] = factor.clone();
                for j in (k + 1)..n {
                    t.assign(&factor * &lu.data[k * n + j]);
                    lu.data[i * n + j] -= &t;
                }
            }
        }
        (lu, perm, sign)
    }

    /// Determinant via pivoted LU.
    pub fn det(&self) -> Float {
        let n = self.rows;
        let (lu, _, sign) = self.lu();
        let mut d = Float::with_val(self.prec(), sign);
        for k in 0..n {
            d *= &lu.data[k * n + k];
        }
        d
    }

    /// Solve self * x = b via pivoted LU. Errors if a pivot is exactly zero.
    pub fn lu_solve(&self, b: &[Float]) -> Result<Vec<Float>> {
        let n = self.rows;
        assert_eq!(b.len(), n);
        let (lu, perm, _) = self.lu();
        for k in 0..n {
            if lu.data[k * n + k].is_zero() {
                return Err(Error::NearSingular {
                    diagnostic: format!("zero pivot at {k}"),
                });
            }
        }
        let prec = self.prec();
        let mut y: Vec<Float> = perm.iter().map(|&p| b[p].clone()).collect();
        let mut t = Float::new(prec);
        for i in 0..n {
            for j in 0..i {
                t.assign(&lu.data[i * n + j] * &y[j]);
                y[i] -= &t;
            }
        }
        for i in (0..n).rev() {
            for j in (i + 1)..n {
                t.assign(&lu.data[i * n + j] * &y[j]);
                y[i] -= &t;
            }
            y[i] /= &lu.data[i * n + i];
        }
        Ok(y)
    }

    /// Inverse via LU; errors on zero pivot.
    pub fn inverse(&self, ctx: &PrecisionContext) -> Result<Self> {
        let n = self.rows;
        let mut out = Matrix::zeros(n, n, ctx);
        for j in 0..n {
            let mut e = vec![ctx.zero(); n];
            e[j] = ctx.one();
            let col = self.lu_solve(&e)?;
            for i in 0..n {
                out[(i, j)] = col[i].clone();
            }
        }
        Ok(out)
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = Float;
    fn index(&self, (i, j): (usize, usize)) -> &Float {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Float {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| {
                    let v = self.data[i * self.cols + j].to_f64();
                    format!("{v:>12.5e}")
                })
                .collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}
