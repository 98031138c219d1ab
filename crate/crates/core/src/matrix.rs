use crate::error::{invalid, Error, Result};
use crate::linalg::check_len;

/// Dense symmetric matrix with nonnegative entries, stored row-major.
///
/// Symmetry and nonnegativity are checked on construction and cannot be
/// broken afterwards; `zero_diagonal` records whether every diagonal entry is 0.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
    zero_diagonal: bool,
}

impl SymMatrix {
    /// Builds from a row-major buffer of length `n²`.
    pub fn from_dense(n: usize, data: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(invalid("matrix dimension must be positive"));
        }
        check_len(n * n, data.len())?;
        for i in 0..n {
            for j in i..n {
                let a = data[i * n + j];
                if !(a >= 0.0) || !a.is_finite() {
                    return Err(Error::NegativeEntry(i, j));
                }
                if a != data[j * n + i] {
                    return Err(Error::NotSymmetric(i, j));
                }
            }
        }
        let zero_diagonal = (0..n).all(|i| data[i * n + i] == 0.0);
        Ok(SymMatrix { n, data, zero_diagonal })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            check_len(n, row.len())?;
            data.extend_from_slice(row);
        }
        Self::from_dense(n, data)
    }

    /// Fills the upper triangle (including the diagonal) from `f(i, j)`, `i ≤ j`,
    /// visiting entries row by row, and mirrors it.
    pub fn from_upper_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let a = f(i, j);
                data[i * n + j] = a;
                data[j * n + i] = a;
            }
        }
        Self::from_dense(n, data)
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::from_dense(n, vec![0.0; n * n])
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_upper_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// `μ(J − I)`: every off-diagonal entry equal to `mu`.
    pub fn mean_matrix(n: usize, mu: f64) -> Result<Self> {
        Self::from_upper_fn(n, |i, j| if i == j { 0.0 } else { mu })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn zero_diagonal(&self) -> bool {
        self.zero_diagonal
    }

    /// Copy with the symmetric pair `(i, j)`, `(j, i)` set to `value`.
    pub fn with_entry(&self, i: usize, j: usize, value: f64) -> Result<Self> {
        if i >= self.n || j >= self.n {
            return Err(invalid(format!("index ({i}, {j}) out of range for n = {}", self.n)));
        }
        if !(value >= 0.0) || !value.is_finite() {
            return Err(Error::NegativeEntry(i, j));
        }
        let mut out = self.clone();
        out.data[i * self.n + j] = value;
        out.data[j * self.n + i] = value;
        out.zero_diagonal = (0..self.n).all(|k| out.data[k * self.n + k] == 0.0);
        Ok(out)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(invalid(format!("scale factor must be finite and nonnegative (c = {c})")));
        }
        let data = self.data.iter().map(|a| a * c).collect();
        Ok(SymMatrix { n: self.n, data, zero_diagonal: self.zero_diagonal })
    }

    /// Relabels vertices: entry `(i, j)` of the result is `a[perm[i]][perm[j]]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_len(self.n, perm.len())?;
        let mut seen = vec![false; self.n];
        for &k in perm {
            if k >= self.n || std::mem::replace(&mut seen[k], true) {
                return Err(invalid("not a permutation"));
            }
        }
        Self::from_upper_fn(self.n, |i, j| self.get(perm[i], perm[j]))
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.n, x.len())?;
        let mut out = vec![0.0; self.n];
        self.matvec_into(x, &mut out);
        Ok(out)
    }

    /// Unchecked product; callers guarantee `x.len() == out.len() == n`.
    pub(crate) fn matvec_into(&self, x: &[f64], out: &mut [f64]) {
        for (row, o) in self.data.chunks_exact(self.n).zip(out.iter_mut()) {
            *o = row.iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.data.chunks_exact(self.n).map(|row| row.iter().sum()).collect()
    }

    /// True when every row sum agrees with the first to relative tolerance `rel_tol`.
    pub fn has_constant_row_sums(&self, rel_tol: f64) -> bool {
        let sums = self.row_sums();
        let first = sums[0];
        sums.iter().all(|s| (s - first).abs() <= rel_tol * first.abs().max(f64::MIN_POSITIVE))
    }

    /// Sample mean and unbiased sample variance of the strictly upper-triangular entries.
    pub fn off_diagonal_moments(&self) -> (f64, f64) {
        let n = self.n;
        let count = (n * (n - 1) / 2) as f64;
        if count == 0.0 {
            return (0.0, 0.0);
        }
        let mut sum = 0.0;
        for i in 0..n {
            sum += self.row(i)[i + 1..].iter().sum::<f64>();
        }
        let mean = sum / count;
        let mut ss = 0.0;
        for i in 0..n {
            ss += self.row(i)[i + 1..].iter().map(|a| (a - mean) * (a - mean)).sum::<f64>();
        }
        let var = if count > 1.0 { ss / (count - 1.0) } else { 0.0 };
        (mean, var)
    }
}
