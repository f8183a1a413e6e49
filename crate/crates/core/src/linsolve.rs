//! Sparse storage and direct solution of the assembled saddle-point systems.
//!
//! Matrices are assembled in CSR form on a fixed pattern and handed to a
//! sparse LU with partial pivoting. The symbolic analysis is reused as long
//! as the sparsity pattern stays the same, and every solve is followed by a
//! relative residual check with a few steps of iterative refinement when the
//! check is not tight.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::MatMut;

/// Relative residual above which iterative refinement kicks in; refinement
/// stops early once the residual stops decreasing.
pub const REFINE_THRESHOLD: f64 = 1e-15;
/// Relative residual above which a solve is reported as failed.
pub const FAILURE_THRESHOLD: f64 = 1e-8;
const MAX_REFINEMENT_STEPS: usize = 3;

#[derive(Debug, thiserror::Error)]
pub enum SolveError {
    #[error("matrix is structurally or numerically singular (pivot {pivot})")]
    Singular { pivot: usize },
    #[error("factorization produced non-finite values")]
    NonFinite,
    #[error("relative residual {0:.3e} exceeds tolerance after refinement")]
    Inaccurate(f64),
    #[error("dimension mismatch: matrix is {rows}x{cols}, vector has {len}")]
    Dimension { rows: usize, cols: usize, len: usize },
    #[error("linear algebra backend failure: {0}")]
    Backend(String),
}

/// Square sparsity pattern built from per-row column sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparsityPattern {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
}

impl SparsityPattern {
    /// Builds the union pattern of dense element blocks. `couples(i, j)` can
    /// veto pairs that are never coupled.
    pub fn from_blocks<'a, I, F>(n: usize, blocks: I, couples: F) -> Self
    where
        I: IntoIterator<Item = &'a [usize]>,
        F: Fn(usize, usize) -> bool,
    {
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for block in blocks {
            for &i in block {
                for &j in block {
                    if couples(i, j) {
                        rows[i].push(j);
                    }
                }
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for (i, row) in rows.iter_mut().enumerate() {
            // keep the diagonal so constrained rows always have a slot
            row.push(i);
            row.sort_unstable();
            row.dedup();
            col_idx.extend_from_slice(row);
            row_ptr.push(col_idx.len());
        }
        Self { n, row_ptr, col_idx }
    }

    pub fn nnz(&self) -> usize {
        self.col_idx.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn zeros(pattern: &SparsityPattern) -> Self {
        Self {
            nrows: pattern.n,
            ncols: pattern.n,
            row_ptr: pattern.row_ptr.clone(),
            col_idx: pattern.col_idx.clone(),
            values: vec![0.0; pattern.nnz()],
        }
    }

    /// Builds a matrix from triplets, summing duplicates and dropping zeros.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nrows];
        for &(i, j, v) in triplets {
            assert!(i < nrows && j < ncols, "triplet ({i}, {j}) out of range");
            rows[i].push((j, v));
        }
        let mut row_ptr = vec![0];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for row in rows.iter_mut() {
            row.sort_by_key(|e| e.0);
            let mut k = 0;
            while k < row.len() {
                let j = row[k].0;
                let mut v = 0.0;
                while k < row.len() && row[k].0 == j {
                    v += row[k].1;
                    k += 1;
                }
                if v != 0.0 {
                    col_idx.push(j);
                    values.push(v);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self { nrows, ncols, row_ptr, col_idx, values }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    fn position(&self, i: usize, j: usize) -> Option<usize> {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi].binary_search(&j).ok().map(|p| lo + p)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.position(i, j).map_or(0.0, |p| self.values[p])
    }

    /// Adds into an existing pattern entry; panics if `(i, j)` is not stored.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let p = self
            .position(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) is outside the sparsity pattern"));
        self.values[p] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let p = self
            .position(i, j)
            .unwrap_or_else(|| panic!("entry ({i}, {j}) is outside the sparsity pattern"));
        self.values[p] = v;
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        (0..self.nrows).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.ncols + 1];
        for &j in &self.col_idx {
            counts[j + 1] += 1;
        }
        for j in 0..self.ncols {
            counts[j + 1] += counts[j];
        }
        let row_ptr = counts.clone();
        let mut next = counts;
        let mut col_idx = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                let p = next[j];
                col_idx[p] = i;
                values[p] = v;
                next[j] += 1;
            }
        }
        Self { nrows: self.ncols, ncols: self.nrows, row_ptr, col_idx, values }
    }

    /// Removes explicitly stored zeros.
    pub fn finalize(&mut self) {
        let mut row_ptr = Vec::with_capacity(self.nrows + 1);
        row_ptr.push(0);
        let mut w = 0;
        for i in 0..self.nrows {
            for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.values[p] != 0.0 {
                    self.col_idx[w] = self.col_idx[p];
                    self.values[w] = self.values[p];
                    w += 1;
                }
            }
            row_ptr.push(w);
        }
        self.col_idx.truncate(w);
        self.values.truncate(w);
        self.row_ptr = row_ptr;
    }

    pub fn has_explicit_zeros(&self) -> bool {
        self.values.iter().any(|&v| v == 0.0)
    }

    /// Largest `|a_ij − a_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.nrows {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }
}

fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Relative residual `‖b − Ax‖₂ / ‖b‖₂` (absolute when `b = 0`).
pub fn relative_residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
    let ax = a.matvec(x);
    let r: Vec<f64> = b.iter().zip(&ax).map(|(b, ax)| b - ax).collect();
    let nb = norm2(b);
    if nb == 0.0 {
        norm2(&r)
    } else {
        norm2(&r) / nb
    }
}

struct CscStorage {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CscStorage {
    fn from_csr(a: &CsrMatrix) -> Self {
        let t = a.transpose();
        Self { n: a.nrows, col_ptr: t.row_ptr, row_idx: t.col_idx, values: t.values }
    }

    fn symbolic(&self) -> SymbolicSparseColMatRef<'_, usize> {
        SymbolicSparseColMatRef::new_checked(self.n, self.n, &self.col_ptr, None, &self.row_idx)
    }
}

fn map_lu_error(e: LuError) -> SolveError {
    match e {
        LuError::SymbolicSingular { index } => SolveError::Singular { pivot: index },
        LuError::Generic(g) => SolveError::Backend(format!("{g:?}")),
    }
}

/// Direct solver that keeps the symbolic analysis between calls.
#[derive(Default)]
pub struct DirectSolver {
    cached: Option<(Vec<usize>, Vec<usize>, SymbolicLu<usize>)>,
    symbolic_reuses: usize,
}

impl DirectSolver {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of factorizations that reused a cached symbolic analysis.
    pub fn symbolic_reuses(&self) -> usize {
        self.symbolic_reuses
    }

    pub fn factor(&mut self, a: &CsrMatrix) -> Result<Factorization, SolveError> {
        assert_eq!(a.nrows, a.ncols, "direct solver needs a square matrix");
        if a.values.iter().any(|v| !v.is_finite()) {
            return Err(SolveError::NonFinite);
        }
        let csc = CscStorage::from_csr(a);
        let reuse = matches!(&self.cached, Some((cp, ri, _)) if *cp == csc.col_ptr && *ri == csc.row_idx);
        let symbolic = if reuse {
            self.symbolic_reuses += 1;
            self.cached.as_ref().map(|c| c.2.clone()).expect("cache present")
        } else {
            let s = SymbolicLu::try_new(csc.symbolic()).map_err(|e| SolveError::Backend(format!("{e:?}")))?;
            self.cached = Some((csc.col_ptr.clone(), csc.row_idx.clone(), s.clone()));
            s
        };
        let mat = SparseColMatRef::new(csc.symbolic(), &csc.values);
        let lu = Lu::try_new_with_symbolic(symbolic, mat).map_err(map_lu_error)?;
        Ok(Factorization { lu, matrix: a.clone() })
    }

    /// Factors and solves in one call.
    pub fn solve(&mut self, a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>, SolveError> {
        self.factor(a)?.solve(b)
    }
}

pub struct Factorization {
    lu: Lu<usize, f64>,
    matrix: CsrMatrix,
}

impl Factorization {
    fn raw_solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        let n = x.len();
        self.lu.solve_in_place(MatMut::from_column_major_slice_mut(&mut x, n, 1));
        x
    }

    /// Solves `A x = b`, refining until the relative residual is small.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>, SolveError> {
        let a = &self.matrix;
        if b.len() != a.nrows {
            return Err(SolveError::Dimension { rows: a.nrows, cols: a.ncols, len: b.len() });
        }
        if b.iter().all(|&v| v == 0.0) {
            return Ok(vec![0.0; b.len()]);
        }
        let mut x = self.raw_solve(b);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SolveError::NonFinite);
        }
        let mut err = relative_residual(a, &x, b);
        for _ in 0..MAX_REFINEMENT_STEPS {
            if err <= REFINE_THRESHOLD {
                break;
            }
            let ax = a.matvec(&x);
            let r: Vec<f64> = b.iter().zip(&ax).map(|(b, ax)| b - ax).collect();
            let d = self.raw_solve(&r);
            let candidate: Vec<f64> = x.iter().zip(&d).map(|(x, d)| x + d).collect();
            let cerr = relative_residual(a, &candidate, b);
            if !(cerr < err) {
                break;
            }
            x = candidate;
            err = cerr;
        }
        if !(err <= FAILURE_THRESHOLD) {
            return Err(SolveError::Inaccurate(err));
        }
        Ok(x)
    }
}
