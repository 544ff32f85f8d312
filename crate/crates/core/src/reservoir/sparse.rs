use crate::error::{Error, Result};
use crate::Matrix;

/// Square matrix in compressed sparse row form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds from per-row `(column, value)` lists; columns need not be sorted.
    pub fn from_rows(n: usize, rows: Vec<Vec<(usize, f64)>>) -> Self {
        assert_eq!(rows.len(), n);
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(j, _)| j);
            for (j, v) in row {
                assert!(j < n);
                col_idx.push(j);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn zeros(n: usize) -> Self {
        Self::from_rows(n, vec![Vec::new(); n])
    }

    pub fn from_dense(m: &Matrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                what: "internal matrix columns",
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let rows = (0..m.nrows())
            .map(|i| {
                (0..m.ncols())
                    .filter(|&j| m[(i, j)] != 0.0)
                    .map(|j| (j, m[(i, j)]))
                    .collect()
            })
            .collect();
        Ok(Self::from_rows(m.nrows(), rows))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `out = A x`.
    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate().take(self.n) {
            let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
            *o = self.col_idx[lo..hi]
                .iter()
                .zip(&self.values[lo..hi])
                .map(|(&j, &v)| v * x[j])
                .sum();
        }
    }

    pub fn scale(&mut self, factor: f64) {
        self.values.iter_mut().for_each(|v| *v *= factor);
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m[(i, self.col_idx[k])] = self.values[k];
            }
        }
        m
    }
}

/// Input weights with exactly one non-zero entry per reservoir node.
#[derive(Debug, Clone, PartialEq)]
pub struct InputMatrix {
    n_inputs: usize,
    columns: Vec<usize>,
    weights: Vec<f64>,
}

impl InputMatrix {
    pub fn new(n_inputs: usize, columns: Vec<usize>, weights: Vec<f64>) -> Result<Self> {
        if columns.len() != weights.len() {
            return Err(Error::DimensionMismatch {
                what: "input weights",
                expected: columns.len(),
                found: weights.len(),
            });
        }
        if let Some(&j) = columns.iter().find(|&&j| j >= n_inputs) {
            return Err(Error::InvalidParameter(format!(
                "input column {j} out of range for {n_inputs} inputs"
            )));
        }
        Ok(Self {
            n_inputs,
            columns,
            weights,
        })
    }

    /// Rows with no non-zero entry get a zero weight on column 0.
    pub fn from_dense(m: &Matrix) -> Result<Self> {
        let mut columns = Vec::with_capacity(m.nrows());
        let mut weights = Vec::with_capacity(m.nrows());
        for i in 0..m.nrows() {
            let nz: Vec<usize> = (0..m.ncols()).filter(|&j| m[(i, j)] != 0.0).collect();
            match nz.as_slice() {
                [] => {
                    columns.push(0);
                    weights.push(0.0);
                }
                [j] => {
                    columns.push(*j);
                    weights.push(m[(i, *j)]);
                }
                _ => {
                    return Err(Error::InvalidParameter(format!(
                        "input matrix row {i} has {} non-zero entries",
                        nz.len()
                    )))
                }
            }
        }
        Self::new(m.ncols(), columns, weights)
    }

    pub fn n_nodes(&self) -> usize {
        self.columns.len()
    }

    pub fn n_inputs(&self) -> usize {
        self.n_inputs
    }

    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `out += B u`.
    pub fn add_mul_vec(&self, u: &[f64], out: &mut [f64]) {
        for ((o, &j), &w) in out.iter_mut().zip(&self.columns).zip(&self.weights) {
            *o += w * u[j];
        }
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.columns.len(), self.n_inputs);
        for (i, (&j, &w)) in self.columns.iter().zip(&self.weights).enumerate() {
            m[(i, j)] = w;
        }
        m
    }
}
