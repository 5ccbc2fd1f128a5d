use super::{LinalgError, DEFAULT_SIZE_LIMIT, PRUNE_EPS};

/// Row-major sparse real matrix. Each row keeps its entries sorted by column;
/// entries with |value| <= [`PRUNE_EPS`] are never stored.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Vec<(usize, f64)>>,
}

impl SparseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        SparseMatrix {
            rows,
            cols,
            data: vec![Vec::new(); rows],
        }
    }

    pub fn identity(n: usize) -> Self {
        let data = (0..n).map(|i| vec![(i, 1.0)]).collect();
        SparseMatrix {
            rows: n,
            cols: n,
            data,
        }
    }

    /// Matrix unit E_ij: the n x n matrix whose only nonzero entry is a 1 in
    /// row `i`, column `j`. Indices are 1-based, matching the usual E_ij
    /// notation.
    pub fn unit(i: usize, j: usize, n: usize) -> Result<Self, LinalgError> {
        if i < 1 || i > n || j < 1 || j > n {
            return Err(LinalgError::IndexOutOfRange(format!(
                "matrix unit ({i},{j}) outside 1..={n}"
            )));
        }
        let mut m = SparseMatrix::zeros(n, n);
        m.data[i - 1].push((j - 1, 1.0));
        Ok(m)
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = SparseMatrix::zeros(n, n);
        for (i, &v) in diag.iter().enumerate() {
            if v.abs() > PRUNE_EPS {
                m.data[i].push((i, v));
            }
        }
        m
    }

    /// Builds a matrix from (row, col, value) triplets with 0-based indices.
    /// Duplicate positions are accumulated.
    pub fn from_triplets<I>(rows: usize, cols: usize, triplets: I) -> Result<Self, LinalgError>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut acc: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); rows];
        for (r, c, v) in triplets {
            if r >= rows || c >= cols {
                return Err(LinalgError::IndexOutOfRange(format!(
                    "triplet ({r},{c}) outside {rows}x{cols}"
                )));
            }
            *acc[r].entry(c).or_insert(0.0) += v;
        }
        let data = acc
            .into_iter()
            .map(|row| {
                row.into_iter()
                    .filter(|(_, v)| v.abs() > PRUNE_EPS)
                    .collect()
            })
            .collect();
        Ok(SparseMatrix { rows, cols, data })
    }

    pub fn from_dense(dense: &[Vec<f64>]) -> Self {
        let rows = dense.len();
        let cols = dense.first().map_or(0, |r| r.len());
        let data = dense
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .filter(|(_, v)| v.abs() > PRUNE_EPS)
                    .map(|(j, &v)| (j, v))
                    .collect()
            })
            .collect();
        SparseMatrix { rows, cols, data }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.cols]; self.rows];
        for (i, row) in self.data.iter().enumerate() {
            for &(j, v) in row {
                out[i][j] = v;
            }
        }
        out
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().map(Vec::len).sum()
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r]
            .binary_search_by_key(&c, |&(j, _)| j)
            .map_or(0.0, |k| self.data[r][k].1)
    }

    pub fn row(&self, r: usize) -> &[(usize, f64)] {
        &self.data[r]
    }

    /// Iterates over stored entries as (row, col, value), row-major.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.data
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().map(move |&(j, v)| (i, j, v)))
    }

    fn check_same_shape(&self, other: &Self) -> Result<(), LinalgError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, LinalgError> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| merge_rows(a, b, 1.0))
            .collect();
        Ok(SparseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LinalgError> {
        self.check_same_shape(other)?;
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| merge_rows(a, b, -1.0))
            .collect();
        Ok(SparseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    pub fn scale(&self, factor: f64) -> Self {
        let data = self
            .data
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&(j, v)| (j, v * factor))
                    .filter(|(_, v)| v.abs() > PRUNE_EPS)
                    .collect()
            })
            .collect();
        SparseMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// Sums a non-empty sequence of equally shaped matrices.
    pub fn sum<I>(terms: I) -> Result<Self, LinalgError>
    where
        I: IntoIterator<Item = SparseMatrix>,
    {
        let mut it = terms.into_iter();
        let first = it.next().ok_or_else(|| {
            LinalgError::DimensionMismatch("sum of zero matrices has no shape".into())
        })?;
        let (rows, cols) = (first.rows, first.cols);
        let mut triplets: Vec<(usize, usize, f64)> = first.triplets().collect();
        for m in it {
            if m.rows != rows || m.cols != cols {
                return Err(LinalgError::DimensionMismatch(format!(
                    "{}x{} vs {}x{}",
                    rows, cols, m.rows, m.cols
                )));
            }
            triplets.extend(m.triplets());
        }
        SparseMatrix::from_triplets(rows, cols, triplets)
    }

    pub fn matmul(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut data = Vec::with_capacity(self.rows);
        for row in &self.data {
            let mut acc: std::collections::BTreeMap<usize, f64> = Default::default();
            for &(k, v) in row {
                for &(j, w) in &other.data[k] {
                    *acc.entry(j).or_insert(0.0) += v * w;
                }
            }
            data.push(
                acc.into_iter()
                    .filter(|(_, v)| v.abs() > PRUNE_EPS)
                    .collect(),
            );
        }
        Ok(SparseMatrix {
            rows: self.rows,
            cols: other.cols,
            data,
        })
    }

    pub fn transpose(&self) -> Self {
        let mut data: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.cols];
        for (i, j, v) in self.triplets() {
            data[j].push((i, v));
        }
        SparseMatrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// Kronecker product: entry ((i*k + r), (j*l + s)) = A_ij * B_rs for B of
    /// shape k x l. Refuses to build results with more than `limit` potential
    /// entries.
    pub fn kron_with_limit(&self, other: &Self, limit: u128) -> Result<Self, LinalgError> {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        if (rows as u128) * (cols as u128) > limit {
            return Err(LinalgError::SizeLimit { rows, cols, limit });
        }
        let mut data: Vec<Vec<(usize, f64)>> = vec![Vec::new(); rows];
        for (i, arow) in self.data.iter().enumerate() {
            for (r, brow) in other.data.iter().enumerate() {
                let target = &mut data[i * other.rows + r];
                for &(j, a) in arow {
                    for &(s, b) in brow {
                        let v = a * b;
                        if v.abs() > PRUNE_EPS {
                            target.push((j * other.cols + s, v));
                        }
                    }
                }
            }
        }
        for row in &mut data {
            row.sort_unstable_by_key(|&(j, _)| j);
        }
        Ok(SparseMatrix { rows, cols, data })
    }

    pub fn kron(&self, other: &Self) -> Result<Self, LinalgError> {
        self.kron_with_limit(other, DEFAULT_SIZE_LIMIT)
    }

    /// Frobenius norm: sqrt of the sum of squared entries.
    pub fn frobenius(&self) -> f64 {
        self.triplets()
            .fold(0.0, |acc, (_, _, v)| acc + v * v)
            .sqrt()
    }

    /// Entrywise l1 norm: sum of absolute values.
    pub fn l1(&self) -> f64 {
        self.triplets().fold(0.0, |acc, (_, _, v)| acc + v.abs())
    }

    pub fn max_abs(&self) -> f64 {
        self.triplets().map(|(_, _, v)| v.abs()).fold(0.0, f64::max)
    }

    /// Largest absolute entrywise difference; both matrices must share shape.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, LinalgError> {
        Ok(self.sub(other)?.max_abs())
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.data
            .iter()
            .map(|row| row.iter().fold(0.0, |acc, &(_, v)| acc + v))
            .collect()
    }

    pub fn is_row_stochastic(&self, tol: f64) -> bool {
        self.rows == self.cols && self.row_sums().iter().all(|s| (s - 1.0).abs() <= tol)
    }

    /// Moore-Penrose pseudo-inverse of a full-column-rank matrix, computed as
    /// (AᵗA)⁻¹Aᵗ with a dense solve on the (small) column dimension.
    pub fn pseudo_inverse(&self) -> Result<Self, LinalgError> {
        let k = self.cols;
        let at = self.transpose();
        // Gram matrix AᵗA, dense k x k.
        let mut gram = vec![vec![0.0; k]; k];
        for (i, j, v) in at.matmul(self)?.triplets() {
            gram[i][j] = v;
        }
        // Right-hand side Aᵗ, dense k x n.
        let n = self.rows;
        let mut rhs = vec![vec![0.0; n]; k];
        for (i, j, v) in at.triplets() {
            rhs[i][j] = v;
        }
        solve_dense(&mut gram, &mut rhs)?;
        Ok(SparseMatrix::from_dense(&rhs))
    }
}

/// Gauss-Jordan with partial pivoting, solving `a * x = b` in place
/// (`b` becomes the solution). Fails when `a` is singular.
fn solve_dense(a: &mut [Vec<f64>], b: &mut [Vec<f64>]) -> Result<(), LinalgError> {
    let k = a.len();
    let scale = a
        .iter()
        .flat_map(|r| r.iter().map(|v| v.abs()))
        .fold(0.0, f64::max)
        .max(1.0);
    for col in 0..k {
        let pivot_row = (col..k)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .unwrap();
        if a[pivot_row][col].abs() <= 1e-12 * scale {
            return Err(LinalgError::RankDeficient);
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        let pivot = a[col][col];
        for v in a[col].iter_mut() {
            *v /= pivot;
        }
        for v in b[col].iter_mut() {
            *v /= pivot;
        }
        let pivot_a = a[col].clone();
        let pivot_b = b[col].clone();
        for row in 0..k {
            if row == col {
                continue;
            }
            let factor = a[row][col];
            if factor == 0.0 {
                continue;
            }
            for (x, p) in a[row].iter_mut().zip(&pivot_a) {
                *x -= factor * p;
            }
            for (x, p) in b[row].iter_mut().zip(&pivot_b) {
                *x -= factor * p;
            }
        }
    }
    Ok(())
}

fn merge_rows(a: &[(usize, f64)], b: &[(usize, f64)], b_factor: f64) -> Vec<(usize, f64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let take_a = j >= b.len() || (i < a.len() && a[i].0 <= b[j].0);
        let take_b = i >= a.len() || (j < b.len() && b[j].0 <= a[i].0);
        let (col, v) = if take_a && take_b {
            let v = a[i].1 + b_factor * b[j].1;
            let col = a[i].0;
            i += 1;
            j += 1;
            (col, v)
        } else if take_a {
            let (col, v) = a[i];
            i += 1;
            (col, v)
        } else {
            let (col, v) = b[j];
            j += 1;
            (col, b_factor * v)
        };
        if v.abs() > PRUNE_EPS {
            out.push((col, v));
        }
    }
    out
}
