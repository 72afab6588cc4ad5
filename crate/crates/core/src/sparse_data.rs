//! Dual-indexed sparse design matrix, LIBSVM reader/writer and masked norms.
//!
//! Feature screening walks columns while sample screening walks rows, so the
//! matrix keeps both a compressed-row and a compressed-column copy of the
//! same nonzeros.

use std::fmt::Write as _;
use std::io::Read;

use crate::error::{Error, Result};
use crate::scalar::Float;

/// Immutable sparse matrix stored in both CSR and CSC orientation.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDesignMatrix<F> {
    n: usize,
    d: usize,
    row_ptr: Vec<usize>,
    row_cols: Vec<usize>,
    row_vals: Vec<F>,
    col_ptr: Vec<usize>,
    col_rows: Vec<usize>,
    col_vals: Vec<F>,
}

impl<F: Float> SparseDesignMatrix<F> {
    /// Builds the matrix from per-row lists of `(feature, value)` pairs.
    ///
    /// Each list must be strictly increasing in the feature id and every id
    /// must be `< d`.
    pub fn from_rows(d: usize, rows: &[Vec<(usize, F)>]) -> Result<Self> {
        let n = rows.len();
        let nnz: usize = rows.iter().map(Vec::len).sum();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut row_cols = Vec::with_capacity(nnz);
        let mut row_vals = Vec::with_capacity(nnz);
        let mut col_counts = vec![0usize; d];
        row_ptr.push(0);
        for (i, row) in rows.iter().enumerate() {
            let mut prev: Option<usize> = None;
            for &(j, v) in row {
                if j >= d {
                    return Err(Error::InvalidParameter(format!(
                        "feature index {j} out of range (d = {d}) in row {i}"
                    )));
                }
                if prev.is_some_and(|p| j <= p) {
                    return Err(Error::InvalidParameter(format!(
                        "non-increasing feature index in row {i}"
                    )));
                }
                prev = Some(j);
                row_cols.push(j);
                row_vals.push(v);
                col_counts[j] += 1;
            }
            row_ptr.push(row_cols.len());
        }

        let mut col_ptr = Vec::with_capacity(d + 1);
        col_ptr.push(0);
        for c in &col_counts {
            col_ptr.push(col_ptr.last().unwrap() + c);
        }
        let mut fill = col_ptr[..d].to_vec();
        let mut col_rows = vec![0usize; nnz];
        let mut col_vals = vec![F::zero(); nnz];
        // rows are visited in order, so each column list comes out sorted
        for i in 0..n {
            for k in row_ptr[i]..row_ptr[i + 1] {
                let j = row_cols[k];
                col_rows[fill[j]] = i;
                col_vals[fill[j]] = row_vals[k];
                fill[j] += 1;
            }
        }

        Ok(Self {
            n,
            d,
            row_ptr,
            row_cols,
            row_vals,
            col_ptr,
            col_rows,
            col_vals,
        })
    }

    /// Dense row-major input; zeros are dropped.
    pub fn from_dense(rows: &[Vec<F>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        let mut sparse = Vec::with_capacity(rows.len());
        for (i, r) in rows.iter().enumerate() {
            if r.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: rows[i].len(),
                });
            }
            sparse.push(
                r.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != F::zero())
                    .map(|(j, &v)| (j, v))
                    .collect(),
            );
        }
        Self::from_rows(d, &sparse)
    }

    #[inline]
    pub fn n_rows(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn n_cols(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn nnz(&self) -> usize {
        self.row_vals.len()
    }

    /// Feature ids and values of row `i`.
    #[inline]
    pub fn row(&self, i: usize) -> (&[usize], &[F]) {
        let (a, b) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.row_cols[a..b], &self.row_vals[a..b])
    }

    /// Sample ids and values of column `j`.
    #[inline]
    pub fn col(&self, j: usize) -> (&[usize], &[F]) {
        let (a, b) = (self.col_ptr[j], self.col_ptr[j + 1]);
        (&self.col_rows[a..b], &self.col_vals[a..b])
    }

    /// Iterates `(i, j, value)` in row-major order.
    pub fn triplets_by_row(&self) -> impl Iterator<Item = (usize, usize, F)> + '_ {
        (0..self.n).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&j, &v)| (i, j, v))
        })
    }

    /// Iterates `(i, j, value)` in column-major order.
    pub fn triplets_by_col(&self) -> impl Iterator<Item = (usize, usize, F)> + '_ {
        (0..self.d).flat_map(move |j| {
            let (rows, vals) = self.col(j);
            rows.iter().zip(vals).map(move |(&i, &v)| (i, j, v))
        })
    }

    /// `x_i^T w`.
    #[inline]
    pub fn row_dot(&self, i: usize, w: &[F]) -> F {
        let (cols, vals) = self.row(i);
        cols.iter()
            .zip(vals)
            .fold(F::zero(), |acc, (&j, &v)| acc + v * w[j])
    }

    /// `sum_{j active} X_ij w_j`.
    pub fn masked_row_dot(&self, i: usize, w: &[F], active_cols: &[bool]) -> F {
        assert!(i < self.n, "row {i} out of range (n = {})", self.n);
        assert_eq!(w.len(), self.d, "weight vector length must equal d");
        let (cols, vals) = self.row(i);
        cols.iter()
            .zip(vals)
            .filter(|(&j, _)| active_cols[j])
            .fold(F::zero(), |acc, (&j, &v)| acc + v * w[j])
    }

    /// `X_{:j}^T a`.
    #[inline]
    pub fn col_dot(&self, j: usize, a: &[F]) -> F {
        let (rows, vals) = self.col(j);
        rows.iter()
            .zip(vals)
            .fold(F::zero(), |acc, (&i, &v)| acc + v * a[i])
    }

    /// `X w` for a dense `w`.
    pub fn mul_vec(&self, w: &[F]) -> Vec<F> {
        (0..self.n).map(|i| self.row_dot(i, w)).collect()
    }

    /// `X^T a` for a dense `a`.
    pub fn tr_mul_vec(&self, a: &[F]) -> Vec<F> {
        (0..self.d).map(|j| self.col_dot(j, a)).collect()
    }

    pub fn row_sq_norm(&self, i: usize) -> F {
        self.row(i).1.iter().fold(F::zero(), |acc, &v| acc + v * v)
    }

    pub fn col_sq_norm(&self, j: usize) -> F {
        self.col(j).1.iter().fold(F::zero(), |acc, &v| acc + v * v)
    }
}

/// Learning task carried by a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Classification,
    Regression,
}

/// Design matrix plus labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<F> {
    pub matrix: SparseDesignMatrix<F>,
    pub labels: Vec<F>,
    pub task: Task,
}

impl<F: Float> Dataset<F> {
    pub fn new(matrix: SparseDesignMatrix<F>, labels: Vec<F>, task: Task) -> Result<Self> {
        if labels.len() != matrix.n_rows() {
            return Err(Error::DimensionMismatch {
                expected: matrix.n_rows(),
                got: labels.len(),
            });
        }
        if task == Task::Classification {
            if let Some(i) = labels.iter().position(|&y| y != F::one() && y != -F::one()) {
                return Err(Error::InvalidParameter(format!(
                    "classification label of sample {i} is {}, expected -1 or +1",
                    labels[i]
                )));
            }
        }
        Ok(Self {
            matrix,
            labels,
            task,
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.matrix.n_rows()
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.matrix.n_cols()
    }
}

/// Reads a LIBSVM text stream.
///
/// Lines look like `<label> <idx>:<val> ...` with 1-based strictly
/// increasing indices. Blank lines and `#` comments are skipped. The feature
/// count is the largest index seen.
pub fn parse_libsvm<F: Float, R: Read>(mut reader: R, task: Task) -> Result<Dataset<F>> {
    let mut text = String::new();
    reader.read_to_string(&mut text)?;
    parse_libsvm_str(&text, task)
}

pub fn parse_libsvm_str<F: Float>(text: &str, task: Task) -> Result<Dataset<F>> {
    let mut rows: Vec<Vec<(usize, F)>> = Vec::new();
    let mut labels = Vec::new();
    let mut d = 0usize;

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a token");
        let label: f64 = label_tok
            .parse()
            .map_err(|_| Error::parse(line_no, format!("malformed label '{label_tok}'")))?;
        if task == Task::Classification && label != 1.0 && label != -1.0 {
            return Err(Error::parse(
                line_no,
                format!("classification label must be -1 or +1, got '{label_tok}'"),
            ));
        }

        let mut row = Vec::new();
        let mut prev = 0usize;
        for tok in tokens {
            let (idx, val) = tok
                .split_once(':')
                .ok_or_else(|| Error::parse(line_no, format!("malformed token '{tok}'")))?;
            let idx: usize = idx
                .parse()
                .map_err(|_| Error::parse(line_no, format!("malformed feature index '{idx}'")))?;
            if idx == 0 {
                return Err(Error::parse(
                    line_no,
                    "feature index 0 (indices are 1-based)",
                ));
            }
            if idx <= prev {
                return Err(Error::parse(line_no, "non-increasing feature index"));
            }
            let val: f64 = val
                .parse()
                .map_err(|_| Error::parse(line_no, format!("malformed value '{val}'")))?;
            prev = idx;
            d = d.max(idx);
            row.push((idx - 1, F::lit(val)));
        }
        rows.push(row);
        labels.push(F::lit(label));
    }

    let matrix = SparseDesignMatrix::from_rows(d, &rows)?;
    Dataset::new(matrix, labels, task)
}

/// Writes a dataset in LIBSVM format using shortest round-trip float text.
pub fn write_libsvm<F: Float>(data: &Dataset<F>) -> String {
    let mut out = String::new();
    for i in 0..data.n() {
        write!(out, "{}", data.labels[i].as_f64()).unwrap();
        let (cols, vals) = data.matrix.row(i);
        for (&j, &v) in cols.iter().zip(vals) {
            write!(out, " {}:{}", j + 1, v.as_f64()).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Which orientation [`MaskedNorms::deactivate`] acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Row,
    Column,
}

/// Squared row/column norms restricted to the currently active rows/columns.
///
/// `col_sq[j] = sum_{i active} X_ij^2` and `row_sq[i] = sum_{j active} X_ij^2`.
/// Updates are decremental; a full recomputation runs after more than `n + d`
/// deactivations, and any entry that loses almost all of its mass is
/// recomputed on the spot so cancellation never understates a norm.
#[derive(Debug, Clone)]
pub struct MaskedNorms<F> {
    active_rows: Vec<bool>,
    active_cols: Vec<bool>,
    col_sq: Vec<F>,
    row_sq: Vec<F>,
    col_sq_full: Vec<F>,
    row_sq_full: Vec<F>,
    deactivations: usize,
}

impl<F: Float> MaskedNorms<F> {
    pub fn new(m: &SparseDesignMatrix<F>) -> Self {
        let col_sq_full: Vec<F> = (0..m.n_cols()).map(|j| m.col_sq_norm(j)).collect();
        let row_sq_full: Vec<F> = (0..m.n_rows()).map(|i| m.row_sq_norm(i)).collect();
        Self {
            active_rows: vec![true; m.n_rows()],
            active_cols: vec![true; m.n_cols()],
            col_sq: col_sq_full.clone(),
            row_sq: row_sq_full.clone(),
            col_sq_full,
            row_sq_full,
            deactivations: 0,
        }
    }

    #[inline]
    pub fn active_rows(&self) -> &[bool] {
        &self.active_rows
    }

    #[inline]
    pub fn active_cols(&self) -> &[bool] {
        &self.active_cols
    }

    #[inline]
    pub fn is_row_active(&self, i: usize) -> bool {
        self.active_rows[i]
    }

    #[inline]
    pub fn is_col_active(&self, j: usize) -> bool {
        self.active_cols[j]
    }

    /// `||X_{:j, active rows}||_2^2`.
    #[inline]
    pub fn col_sq_active(&self, j: usize) -> F {
        self.col_sq[j]
    }

    /// `||x_{i, active cols}||_2^2`.
    #[inline]
    pub fn row_sq_active(&self, i: usize) -> F {
        self.row_sq[i]
    }

    #[inline]
    pub fn col_sq_full(&self, j: usize) -> F {
        self.col_sq_full[j]
    }

    #[inline]
    pub fn row_sq_full(&self, i: usize) -> F {
        self.row_sq_full[i]
    }

    /// Clears the bit of row or column `id` and subtracts its entries from
    /// the opposite orientation's norms.
    ///
    /// # Panics
    /// If `id` is already inactive.
    pub fn deactivate(&mut self, m: &SparseDesignMatrix<F>, axis: Axis, id: usize) {
        let cutoff = F::lit(1e-8);
        match axis {
            Axis::Row => {
                assert!(self.active_rows[id], "row {id} deactivated twice");
                self.active_rows[id] = false;
                let (cols, vals) = m.row(id);
                for (&j, &v) in cols.iter().zip(vals) {
                    let left = self.col_sq[j] - v * v;
                    self.col_sq[j] = if left <= cutoff * self.col_sq_full[j] {
                        self.recompute_col(m, j)
                    } else {
                        left
                    };
                }
            }
            Axis::Column => {
                assert!(self.active_cols[id], "column {id} deactivated twice");
                self.active_cols[id] = false;
                let (rows, vals) = m.col(id);
                for (&i, &v) in rows.iter().zip(vals) {
                    let left = self.row_sq[i] - v * v;
                    self.row_sq[i] = if left <= cutoff * self.row_sq_full[i] {
                        self.recompute_row(m, i)
                    } else {
                        left
                    };
                }
            }
        }
        self.deactivations += 1;
        if self.deactivations > m.n_rows() + m.n_cols() {
            self.recompute_all(m);
        }
    }

    fn recompute_col(&self, m: &SparseDesignMatrix<F>, j: usize) -> F {
        let (rows, vals) = m.col(j);
        rows.iter()
            .zip(vals)
            .filter(|(&i, _)| self.active_rows[i])
            .fold(F::zero(), |acc, (_, &v)| acc + v * v)
    }

    fn recompute_row(&self, m: &SparseDesignMatrix<F>, i: usize) -> F {
        let (cols, vals) = m.row(i);
        cols.iter()
            .zip(vals)
            .filter(|(&j, _)| self.active_cols[j])
            .fold(F::zero(), |acc, (_, &v)| acc + v * v)
    }

    /// Brute-force recomputation of every stored norm.
    pub fn recompute_all(&mut self, m: &SparseDesignMatrix<F>) {
        for j in 0..m.n_cols() {
            self.col_sq[j] = self.recompute_col(m, j);
        }
        for i in 0..m.n_rows() {
            self.row_sq[i] = self.recompute_row(m, i);
        }
        self.deactivations = 0;
    }

    /// Re-activates everything.
    pub fn reset(&mut self) {
        self.active_rows.iter_mut().for_each(|b| *b = true);
        self.active_cols.iter_mut().for_each(|b| *b = true);
        self.col_sq.clone_from(&self.col_sq_full);
        self.row_sq.clone_from(&self.row_sq_full);
        self.deactivations = 0;
    }
}
