use super::{LinalgError, SparseMatrix, PRUNE_EPS};
use std::collections::BTreeMap;

/// Sparse row vector. Distributions over program configurations are
/// represented this way and evolved by post-multiplication with operators.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    dim: usize,
    entries: BTreeMap<usize, f64>,
}

impl StateVector {
    pub fn zeros(dim: usize) -> Self {
        StateVector {
            dim,
            entries: BTreeMap::new(),
        }
    }

    /// Unit vector e_i with a 1 in coordinate `i` (1-based, like e_1, e_2, ...).
    pub fn basis(i: usize, dim: usize) -> Result<Self, LinalgError> {
        if i < 1 || i > dim {
            return Err(LinalgError::IndexOutOfRange(format!(
                "basis vector {i} outside 1..={dim}"
            )));
        }
        let mut v = StateVector::zeros(dim);
        v.entries.insert(i - 1, 1.0);
        Ok(v)
    }

    pub fn from_dense(values: &[f64]) -> Self {
        let entries = values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.abs() > PRUNE_EPS)
            .map(|(i, &v)| (i, v))
            .collect();
        StateVector {
            dim: values.len(),
            entries,
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (&i, &v) in &self.entries {
            out[i] = v;
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.entries.get(&i).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, i: usize, v: f64) {
        if v.abs() > PRUNE_EPS {
            self.entries.insert(i, v);
        } else {
            self.entries.remove(&i);
        }
    }

    /// Iterates over nonzero entries in index order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.entries.iter().map(|(&i, &v)| (i, v))
    }

    pub fn sum(&self) -> f64 {
        self.entries.values().fold(0.0, |acc, v| acc + v)
    }

    pub fn l1(&self) -> f64 {
        self.entries.values().fold(0.0, |acc, v| acc + v.abs())
    }

    pub fn scale(&self, factor: f64) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(&i, &v)| (i, v * factor))
            .filter(|(_, v)| v.abs() > PRUNE_EPS)
            .collect();
        StateVector {
            dim: self.dim,
            entries,
        }
    }

    /// Rescales to total mass 1. Returns an error on (numerically) zero mass.
    pub fn normalized(&self) -> Result<Self, LinalgError> {
        let total = self.sum();
        if total.abs() <= PRUNE_EPS {
            return Err(LinalgError::DimensionMismatch(
                "cannot normalize a zero vector".into(),
            ));
        }
        Ok(self.scale(1.0 / total))
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LinalgError> {
        if self.dim != other.dim {
            return Err(LinalgError::DimensionMismatch(format!(
                "{} vs {}",
                self.dim, other.dim
            )));
        }
        let mut entries = self.entries.clone();
        for (&i, &v) in &other.entries {
            let cur = entries.entry(i).or_insert(0.0);
            *cur -= v;
        }
        entries.retain(|_, v| v.abs() > PRUNE_EPS);
        Ok(StateVector {
            dim: self.dim,
            entries,
        })
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64, LinalgError> {
        Ok(self
            .sub(other)?
            .entries
            .values()
            .map(|v| v.abs())
            .fold(0.0, f64::max))
    }

    /// Kronecker product of row vectors: (x ⊗ y)_[i*m + j] = x_i * y_j.
    pub fn kron(&self, other: &Self) -> Self {
        let mut entries = BTreeMap::new();
        for (&i, &a) in &self.entries {
            for (&j, &b) in &other.entries {
                let v = a * b;
                if v.abs() > PRUNE_EPS {
                    entries.insert(i * other.dim + j, v);
                }
            }
        }
        StateVector {
            dim: self.dim * other.dim,
            entries,
        }
    }

    /// Row-vector times matrix: (x · A)_j = Σ_i x_i A_ij.
    pub fn mul_mat(&self, a: &SparseMatrix) -> Result<Self, LinalgError> {
        if self.dim != a.rows() {
            return Err(LinalgError::DimensionMismatch(format!(
                "vector dim {} vs matrix rows {}",
                self.dim,
                a.rows()
            )));
        }
        let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
        for (&i, &v) in &self.entries {
            for &(j, w) in a.row(i) {
                *acc.entry(j).or_insert(0.0) += v * w;
            }
        }
        acc.retain(|_, v| v.abs() > PRUNE_EPS);
        Ok(StateVector {
            dim: a.cols(),
            entries: acc,
        })
    }
}
