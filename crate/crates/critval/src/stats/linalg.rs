//! Minimal dense linear algebra for the small systems this crate solves
//! (IRLS normal equations, OLS for VIF/partial correlation; k ≤ ~10).

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut m = Matrix::zeros(r, c);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), c, "ragged rows");
            for (j, v) in row.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// xᵀ · diag(w) · x for row-major x (n×k) and weights w (n).
    pub fn xtwx(x: &Matrix, w: &[f64]) -> Matrix {
        assert_eq!(x.rows, w.len());
        let k = x.cols;
        let mut out = Matrix::zeros(k, k);
        for i in 0..x.rows {
            let wi = w[i];
            for a in 0..k {
                let xa = x[(i, a)] * wi;
                for b in a..k {
                    out[(a, b)] += xa * x[(i, b)];
                }
            }
        }
        for a in 0..k {
            for b in 0..a {
                out[(a, b)] = out[(b, a)];
            }
        }
        out
    }

    /// xᵀ · v for row-major x (n×k) and v (n).
    pub fn xtv(x: &Matrix, v: &[f64]) -> Vec<f64> {
        assert_eq!(x.rows, v.len());
        let mut out = vec![0.0; x.cols];
        for i in 0..x.rows {
            for j in 0..x.cols {
                out[j] += x[(i, j)] * v[i];
            }
        }
        out
    }

    pub fn mat_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        let mut out = vec![0.0; self.rows];
        for i in 0..self.rows {
            let mut acc = 0.0;
            for j in 0..self.cols {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Failure modes of the small solvers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LinalgError {
    /// Pivot collapsed at this column during elimination.
    Singular { column: usize },
}

/// Solves `a · x = b` by Gaussian elimination with partial pivoting.
/// On singularity reports the column whose pivot collapsed.
pub fn solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    assert_eq!(a.rows, a.cols);
    assert_eq!(a.rows, b.len());
    let n = a.rows;
    let mut m = a.clone();
    let mut rhs = b.to_vec();

    // scale reference for the singularity threshold
    let scale = m
        .data
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1e-30);

    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = m[(col, col)].abs();
        for r in (col + 1)..n {
            if m[(r, col)].abs() > pivot_val {
                pivot_val = m[(r, col)].abs();
                pivot_row = r;
            }
        }
        if pivot_val <= scale * 1e-12 {
            return Err(LinalgError::Singular { column: col });
        }
        if pivot_row != col {
            for j in 0..n {
                let tmp = m[(col, j)];
                m[(col, j)] = m[(pivot_row, j)];
                m[(pivot_row, j)] = tmp;
            }
            rhs.swap(col, pivot_row);
        }
        for r in (col + 1)..n {
            let factor = m[(r, col)] / m[(col, col)];
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                m[(r, j)] -= factor * m[(col, j)];
            }
            rhs[r] -= factor * rhs[col];
        }
    }

    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = rhs[i];
        for j in (i + 1)..n {
            acc -= m[(i, j)] * x[j];
        }
        x[i] = acc / m[(i, i)];
    }
    Ok(x)
}

/// Inverse via Gauss-Jordan with partial pivoting.
pub fn invert(a: &Matrix) -> Result<Matrix, LinalgError> {
    assert_eq!(a.rows, a.cols);
    let n = a.rows;
    let mut m = a.clone();
    let mut inv = Matrix::identity(n);
    let scale = m
        .data
        .iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .max(1e-30);

    for col in 0..n {
        let mut pivot_row = col;
        let mut pivot_val = m[(col, col)].abs();
        for r in (col + 1)..n {
            if m[(r, col)].abs() > pivot_val {
                pivot_val = m[(r, col)].abs();
                pivot_row = r;
            }
        }
        if pivot_val <= scale * 1e-12 {
            return Err(LinalgError::Singular { column: col });
        }
        if pivot_row != col {
            for j in 0..n {
                let t = m[(col, j)];
                m[(col, j)] = m[(pivot_row, j)];
                m[(pivot_row, j)] = t;
                let t = inv[(col, j)];
                inv[(col, j)] = inv[(pivot_row, j)];
                inv[(pivot_row, j)] = t;
            }
        }
        let pivot = m[(col, col)];
        for j in 0..n {
            m[(col, j)] /= pivot;
            inv[(col, j)] /= pivot;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let factor = m[(r, col)];
            if factor == 0.0 {
                continue;
            }
            for j in 0..n {
                m[(r, j)] -= factor * m[(col, j)];
                inv[(r, j)] -= factor * inv[(col, j)];
            }
        }
    }
    Ok(inv)
}

/// Ordinary least squares fit of `y` on `x` (x includes any intercept column).
/// Returns coefficients; singular designs report the offending column.
pub fn ols(x: &Matrix, y: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let xtx = Matrix::xtwx(x, &vec![1.0; x.rows]);
    let xty = Matrix::xtv(x, y);
    solve(&xtx, &xty)
}
