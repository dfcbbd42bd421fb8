//! Sparse linear algebra for the Hodge solves: CSR storage, triplet assembly,
//! and Jacobi-preconditioned conjugate gradients.
//!
//! Every system we solve is symmetric positive semi-definite (a weighted graph
//! Laplacian Pᵀdᵀ M d P, possibly with a one-dimensional constant kernel), so
//! CG is the right iteration. The kernel is handled by deflation: project the
//! residual and iterates against the known null-vector instead of regularizing
//! the matrix.

use crate::error::{Error, Result};

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct Csr {
    pub nrows: usize,
    pub ncols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

/// Triplet (COO) accumulator; duplicates are summed on conversion.
#[derive(Debug, Clone)]
pub struct Triplets {
    nrows: usize,
    ncols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        Triplets { nrows, ncols, entries: Vec::new() }
    }

    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.nrows && col < self.ncols);
        if value != 0.0 {
            self.entries.push((row, col, value));
        }
    }

    pub fn to_csr(&self) -> Csr {
        let mut sorted = self.entries.clone();
        sorted.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_counts = vec![0usize; self.nrows];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, usize)> = None;
        for &(r, c, v) in &sorted {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_counts[r] += 1;
                last = Some((r, c));
            }
        }
        let mut row_ptr = vec![0usize; self.nrows + 1];
        for r in 0..self.nrows {
            row_ptr[r + 1] = row_ptr[r] + row_counts[r];
        }
        Csr { nrows: self.nrows, ncols: self.ncols, row_ptr, col_idx, values }
    }
}

impl Csr {
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// y = A x.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![0.0; self.nrows];
        for r in 0..self.nrows {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[r] = acc;
        }
        y
    }

    /// y = Aᵀ x.
    pub fn mul_transpose_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.nrows);
        let mut y = vec![0.0; self.ncols];
        for r in 0..self.nrows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                y[self.col_idx[k]] += self.values[k] * x[r];
            }
        }
        y
    }

    /// The diagonal, for Jacobi preconditioning (zeros where absent).
    pub fn diagonal(&self) -> Vec<f64> {
        let n = self.nrows.min(self.ncols);
        let mut d = vec![0.0; n];
        for r in 0..n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.col_idx[k] == r {
                    d[r] += self.values[k];
                }
            }
        }
        d
    }

    /// Dense identity check helper for tests: entry (r, c) or 0.
    pub fn get(&self, r: usize, c: usize) -> f64 {
        let mut acc = 0.0;
        for k in self.row_ptr[r]..self.row_ptr[r + 1] {
            if self.col_idx[k] == c {
                acc += self.values[k];
            }
        }
        acc
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Subtract the component along `null` (assumed unit-normalized is NOT
/// required; we project with the actual inner products).
fn deflate(x: &mut [f64], null: &[f64]) {
    let nn = dot(null, null);
    if nn == 0.0 {
        return;
    }
    let c = dot(x, null) / nn;
    for (xi, ni) in x.iter_mut().zip(null) {
        *xi -= c * ni;
    }
}

/// Options for the conjugate-gradient solve.
pub struct CgOptions {
    /// Relative residual target ‖b − Ax‖ / ‖b‖.
    pub rel_tol: f64,
    /// Iteration cap as a multiple of the system size.
    pub max_iter_factor: usize,
    /// Optional known null-vector of A (e.g. the all-ones vector of a
    /// Laplacian); iterates are kept orthogonal to it.
    pub null_vector: Option<Vec<f64>>,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions { rel_tol: 1e-10, max_iter_factor: 10, null_vector: None }
    }
}

/// Outcome of a converged CG solve.
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Final relative residual.
    pub residual: f64,
}

/// Jacobi-preconditioned CG for symmetric positive (semi-)definite A.
///
/// Fails with `Error::Solver` if the relative residual has not reached
/// `rel_tol` within `max_iter_factor · n` iterations.
pub fn conjugate_gradient(a: &Csr, b: &[f64], opts: &CgOptions) -> Result<CgSolution> {
    assert_eq!(a.nrows, a.ncols, "CG needs a square system");
    let n = a.nrows;
    assert_eq!(b.len(), n);
    if n == 0 {
        return Ok(CgSolution { x: vec![], iterations: 0, residual: 0.0 });
    }

    let diag = a.diagonal();
    let precond = |r: &[f64]| -> Vec<f64> {
        r.iter()
            .zip(&diag)
            .map(|(ri, di)| if di.abs() > 0.0 { ri / di } else { *ri })
            .collect()
    };

    let mut b = b.to_vec();
    if let Some(nv) = &opts.null_vector {
        // A consistent right-hand side must be orthogonal to the kernel;
        // project away any numerical component so CG sees a solvable system.
        deflate(&mut b, nv);
    }
    let b_norm = norm(&b);
    if b_norm == 0.0 {
        return Ok(CgSolution { x: vec![0.0; n], iterations: 0, residual: 0.0 });
    }

    let mut x = vec![0.0; n];
    let mut r = b.clone();
    let mut z = precond(&r);
    if let Some(nv) = &opts.null_vector {
        deflate(&mut z, nv);
    }
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let max_iter = opts.max_iter_factor.saturating_mul(n).max(50);

    for it in 1..=max_iter {
        let ap = a.mul_vec(&p);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::Solver { residual: norm(&r) / b_norm, iterations: it });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rel = norm(&r) / b_norm;
        if rel <= opts.rel_tol {
            if let Some(nv) = &opts.null_vector {
                deflate(&mut x, nv);
            }
            return Ok(CgSolution { x, iterations: it, residual: rel });
        }
        z = precond(&r);
        if let Some(nv) = &opts.null_vector {
            deflate(&mut z, nv);
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Solver { residual: norm(&r) / b_norm, iterations: max_iter })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_path(n: usize) -> Csr {
        // Tridiagonal graph Laplacian of a path: SPSD with kernel = constants.
        let mut t = Triplets::new(n, n);
        for i in 0..n - 1 {
            t.push(i, i, 1.0);
            t.push(i + 1, i + 1, 1.0);
            t.push(i, i + 1, -1.0);
            t.push(i + 1, i, -1.0);
        }
        t.to_csr()
    }

    #[test]
    fn csr_assembly_merges_duplicates() {
        let mut t = Triplets::new(2, 2);
        t.push(0, 0, 1.0);
        t.push(0, 0, 2.5);
        t.push(1, 0, -1.0);
        let a = t.to_csr();
        assert_eq!(a.get(0, 0), 3.5);
        assert_eq!(a.get(1, 0), -1.0);
        assert_eq!(a.get(1, 1), 0.0);
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn spmv_and_transpose() {
        let mut t = Triplets::new(2, 3);
        t.push(0, 0, 1.0);
        t.push(0, 2, 2.0);
        t.push(1, 1, 3.0);
        let a = t.to_csr();
        assert_eq!(a.mul_vec(&[1.0, 1.0, 1.0]), vec![3.0, 3.0]);
        assert_eq!(a.mul_transpose_vec(&[1.0, 2.0]), vec![1.0, 6.0, 2.0]);
    }

    #[test]
    fn cg_solves_spd_system() {
        // A = L + I is SPD; manufactured solution.
        let n = 50;
        let mut t = Triplets::new(n, n);
        for i in 0..n {
            t.push(i, i, 1.0);
        }
        let l = laplacian_path(n);
        for r in 0..n {
            for k in l.row_ptr[r]..l.row_ptr[r + 1] {
                t.push(r, l.col_idx[k], l.values[k]);
            }
        }
        let a = t.to_csr();
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let b = a.mul_vec(&x_true);
        let sol = conjugate_gradient(&a, &b, &CgOptions::default()).unwrap();
        let err: f64 = sol
            .x
            .iter()
            .zip(&x_true)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        assert!(err < 1e-8, "error {err} after {} iters", sol.iterations);
        assert!(sol.residual <= 1e-10);
    }

    #[test]
    fn cg_with_kernel_deflation() {
        // Pure Laplacian: singular, kernel = constants. Solve L x = b with
        // mean-zero b; the deflated solution must also be mean-zero.
        let n = 40;
        let a = laplacian_path(n);
        let mut b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.91).cos()).collect();
        let mean = b.iter().sum::<f64>() / n as f64;
        for bi in &mut b {
            *bi -= mean;
        }
        let opts = CgOptions { null_vector: Some(vec![1.0; n]), ..CgOptions::default() };
        let sol = conjugate_gradient(&a, &b, &opts).unwrap();
        let res = a.mul_vec(&sol.x);
        let res_err: f64 = res.iter().zip(&b).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(res_err < 1e-8, "residual {res_err}");
        let x_mean: f64 = sol.x.iter().sum::<f64>() / n as f64;
        assert!(x_mean.abs() < 1e-10);
    }

    #[test]
    fn cg_reports_nonconvergence() {
        // Indefinite matrix makes pᵀAp go negative: must surface as an error.
        let mut t = Triplets::new(2, 2);
        t.push(0, 0, 1.0);
        t.push(1, 1, -1.0);
        let a = t.to_csr();
        let err = conjugate_gradient(&a, &[1.0, 1.0], &CgOptions::default());
        assert!(matches!(err, Err(Error::Solver { .. })));
    }
}
