//! Compressed sparse row storage and iterative solvers for the symmetric
//! systems produced by the finite-element assembly.
//!
//! Real SPD systems are solved by conjugate gradients preconditioned with an
//! incomplete Cholesky factorization on the matrix pattern (IC(0)); the
//! assembled operators are Stieltjes-like so the factorization exists, and a
//! diagonal shift retry covers constrained corner cases. Complex symmetric
//! (non-Hermitian) systems from the phasor solve use COCG with a Jacobi
//! preconditioner. Everything is serial and bitwise deterministic.

use crate::error::Error;
use crate::Result;
use alloc::vec;
use alloc::vec::Vec;
use libm::sqrt;
use num_complex::Complex64;

/// Sparse matrix in CSR format with a fixed symmetric pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    /// Zero matrix with the given pattern. `col_idx` must be sorted per row.
    pub fn from_pattern(n: usize, row_ptr: Vec<usize>, col_idx: Vec<usize>) -> Self {
        let nnz = col_idx.len();
        CsrMatrix { n, row_ptr, col_idx, vals: vec![0.0; nnz] }
    }

    /// Index into `vals` for entry (i, j), if present in the pattern.
    pub fn find(&self, i: usize, j: usize) -> Option<usize> {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi].binary_search(&j).ok().map(|k| lo + k)
    }

    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let k = self.find(i, j).expect("entry outside assembled pattern");
        self.vals[k] += v;
    }

    /// y = A x.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.col_idx[k]];
            }
            y[i] = s;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.find(i, i).map(|k| self.vals[k]).unwrap_or(0.0))
            .collect()
    }

    /// Maximum absolute row sum; zero for matrices with the constant vector
    /// in their kernel (unconstrained stiffness matrices).
    pub fn max_abs_row_sum(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.n {
            let s: f64 = (self.row_ptr[i]..self.row_ptr[i + 1]).map(|k| self.vals[k]).sum();
            if s.abs() > worst {
                worst = s.abs();
            }
        }
        worst
    }
}

/// Lower-triangular incomplete Cholesky factor restricted to the pattern of
/// A's lower triangle, plus its transpose for the backward sweep.
struct IncompleteCholesky {
    // L in CSR (rows sorted, diagonal last in each row).
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<f64>,
    // L^T in CSR (equals L in CSC).
    t_row_ptr: Vec<usize>,
    t_col_idx: Vec<usize>,
    t_vals: Vec<f64>,
}

impl IncompleteCholesky {
    fn factor(a: &CsrMatrix, shift: f64) -> Option<Self> {
        let n = a.n;
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                if a.col_idx[k] <= i {
                    col_idx.push(a.col_idx[k]);
                }
            }
            row_ptr.push(col_idx.len());
        }
        let mut vals = vec![0.0; col_idx.len()];
        // Row i of L: for each j <= i in the pattern,
        //   L_ij = (A_ij - sum_k L_ik L_jk) / L_jj,  L_ii = sqrt(A_ii - sum L_ik^2).
        for i in 0..n {
            let (ri0, ri1) = (row_ptr[i], row_ptr[i + 1]);
            for kk in ri0..ri1 {
                let j = col_idx[kk];
                let a_ij = a.find(i, j).map(|k| a.vals[k]).unwrap_or(0.0);
                let a_ij = if i == j { a_ij * (1.0 + shift) } else { a_ij };
                // Sparse dot of rows i and j of L over columns < j.
                let mut s = 0.0;
                let (rj0, rj1) = (row_ptr[j], row_ptr[j + 1]);
                let mut p = ri0;
                let mut q = rj0;
                while p < kk && q < rj1 {
                    let cp = col_idx[p];
                    let cq = col_idx[q];
                    if cp == j || cq == j {
                        break;
                    }
                    match cp.cmp(&cq) {
                        core::cmp::Ordering::Less => p += 1,
                        core::cmp::Ordering::Greater => q += 1,
                        core::cmp::Ordering::Equal => {
                            s += vals[p] * vals[q];
                            p += 1;
                            q += 1;
                        }
                    }
                }
                if i == j {
                    let d = a_ij - s;
                    if d <= 0.0 {
                        return None;
                    }
                    vals[kk] = sqrt(d);
                } else {
                    let l_jj = vals[rj1 - 1];
                    vals[kk] = (a_ij - s) / l_jj;
                }
            }
        }
        // Transpose.
        let mut t_counts = vec![0usize; n];
        for &j in &col_idx {
            t_counts[j] += 1;
        }
        let mut t_row_ptr = vec![0usize; n + 1];
        for j in 0..n {
            t_row_ptr[j + 1] = t_row_ptr[j] + t_counts[j];
        }
        let mut t_col_idx = vec![0usize; col_idx.len()];
        let mut t_vals = vec![0.0; col_idx.len()];
        let mut cursor = t_row_ptr.clone();
        for i in 0..n {
            for k in row_ptr[i]..row_ptr[i + 1] {
                let j = col_idx[k];
                let pos = cursor[j];
                t_col_idx[pos] = i;
                t_vals[pos] = vals[k];
                cursor[j] += 1;
            }
        }
        Some(IncompleteCholesky { row_ptr, col_idx, vals, t_row_ptr, t_col_idx, t_vals })
    }

    /// z = (L L^T)^{-1} r.
    fn apply(&self, r: &[f64], z: &mut [f64], work: &mut [f64]) {
        let n = r.len();
        // Forward: L w = r.
        for i in 0..n {
            let (k0, k1) = (self.row_ptr[i], self.row_ptr[i + 1]);
            let mut s = r[i];
            for k in k0..k1 - 1 {
                s -= self.vals[k] * work[self.col_idx[k]];
            }
            work[i] = s / self.vals[k1 - 1];
        }
        // Backward: L^T z = w (rows of L^T are sorted ascending; the diagonal
        // is the first entry of row i).
        for i in (0..n).rev() {
            let (k0, k1) = (self.t_row_ptr[i], self.t_row_ptr[i + 1]);
            let mut s = work[i];
            for k in k0 + 1..k1 {
                s -= self.t_vals[k] * z[self.t_col_idx[k]];
            }
            z[i] = s / self.t_vals[k0];
        }
    }
}

/// Solve A x = b for SPD A with preconditioned conjugate gradients.
///
/// `x0` seeds the iteration (warm starts in transient stepping). Returns the
/// solution and the iteration count; fails with `SolverFailure` carrying the
/// achieved relative residual.
pub fn solve_spd(a: &CsrMatrix, b: &[f64], x0: Option<&[f64]>, rel_tol: f64) -> Result<(Vec<f64>, usize)> {
    let n = a.n;
    assert_eq!(b.len(), n);
    let norm_b = sqrt(b.iter().map(|v| v * v).sum::<f64>());
    if norm_b == 0.0 {
        return Ok((vec![0.0; n], 0));
    }
    let ic = IncompleteCholesky::factor(a, 0.0)
        .or_else(|| IncompleteCholesky::factor(a, 1e-3))
        .or_else(|| IncompleteCholesky::factor(a, 1e-1));

    let mut x = match x0 {
        Some(x0) => x0.to_vec(),
        None => vec![0.0; n],
    };
    let mut r = vec![0.0; n];
    a.mul_vec(&x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z = vec![0.0; n];
    let mut work = vec![0.0; n];
    let precond = |r: &[f64], z: &mut [f64], work: &mut [f64]| match &ic {
        Some(ic) => ic.apply(r, z, work),
        None => z.copy_from_slice(r),
    };
    precond(&r, &mut z, &mut work);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let max_iter = 40 * n + 100;
    for it in 0..max_iter {
        let res = sqrt(dot(&r, &r)) / norm_b;
        if res <= rel_tol {
            return Ok((x, it));
        }
        a.mul_vec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::SolverFailure { residual: res });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        precond(&r, &mut z, &mut work);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let res = sqrt(dot(&r, &r)) / norm_b;
    Err(Error::SolverFailure { residual: res })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Complex-valued CSR matrix with the same structural conventions.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrixC {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub vals: Vec<Complex64>,
}

impl CsrMatrixC {
    pub fn from_pattern(n: usize, row_ptr: Vec<usize>, col_idx: Vec<usize>) -> Self {
        let nnz = col_idx.len();
        CsrMatrixC { n, row_ptr, col_idx, vals: vec![Complex64::new(0.0, 0.0); nnz] }
    }

    pub fn find(&self, i: usize, j: usize) -> Option<usize> {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi].binary_search(&j).ok().map(|k| lo + k)
    }

    pub fn add(&mut self, i: usize, j: usize, v: Complex64) {
        let k = self.find(i, j).expect("entry outside assembled pattern");
        self.vals[k] += v;
    }

    pub fn mul_vec(&self, x: &[Complex64], y: &mut [Complex64]) {
        for i in 0..self.n {
            let mut s = Complex64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.col_idx[k]];
            }
            y[i] = s;
        }
    }
}

/// COCG for complex symmetric systems (unconjugated inner products), with a
/// Jacobi preconditioner.
pub fn solve_complex_symmetric(a: &CsrMatrixC, b: &[Complex64], rel_tol: f64) -> Result<(Vec<Complex64>, usize)> {
    let n = a.n;
    let norm_b = sqrt(b.iter().map(|v| v.norm_sqr()).sum::<f64>());
    if norm_b == 0.0 {
        return Ok((vec![Complex64::new(0.0, 0.0); n], 0));
    }
    let diag: Vec<Complex64> = (0..n)
        .map(|i| a.find(i, i).map(|k| a.vals[k]).unwrap_or(Complex64::new(1.0, 0.0)))
        .collect();
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    let mut r = b.to_vec();
    let mut z: Vec<Complex64> = r.iter().zip(&diag).map(|(ri, di)| ri / di).collect();
    let mut p = z.clone();
    let mut rz: Complex64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![Complex64::new(0.0, 0.0); n];
    let max_iter = 40 * n + 100;
    for it in 0..max_iter {
        let res = sqrt(r.iter().map(|v| v.norm_sqr()).sum::<f64>()) / norm_b;
        if res <= rel_tol {
            return Ok((x, it));
        }
        a.mul_vec(&p, &mut ap);
        let pap: Complex64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap.norm() == 0.0 {
            return Err(Error::SolverFailure { residual: res });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_new: Complex64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let res = sqrt(r.iter().map(|v| v.norm_sqr()).sum::<f64>()) / norm_b;
    Err(Error::SolverFailure { residual: res })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::vec::Vec as StdVec;

    fn dense_pattern(n: usize) -> (Vec<usize>, Vec<usize>) {
        let mut row_ptr = vec![0usize];
        let mut col_idx = Vec::new();
        for _ in 0..n {
            for j in 0..n {
                col_idx.push(j);
            }
            row_ptr.push(col_idx.len());
        }
        (row_ptr, col_idx)
    }

    /// Dense Cholesky oracle, independent of the CG path.
    fn dense_solve(a: &[StdVec<f64>], b: &[f64]) -> StdVec<f64> {
        let n = b.len();
        let mut l = vec![vec![0.0_f64; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
                if i == j {
                    l[i][j] = (a[i][i] - s).sqrt();
                } else {
                    l[i][j] = (a[i][j] - s) / l[j][j];
                }
            }
        }
        let mut y = vec![0.0; n];
        for i in 0..n {
            let s: f64 = (0..i).map(|k| l[i][k] * y[k]).sum();
            y[i] = (b[i] - s) / l[i][i];
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| l[k][i] * x[k]).sum();
            x[i] = (y[i] - s) / l[i][i];
        }
        x
    }

    #[test]
    fn one_by_one_system_is_exact() {
        let mut a = CsrMatrix::from_pattern(1, vec![0, 1], vec![0]);
        a.add(0, 0, 4.0);
        let (x, _) = solve_spd(&a, &[8.0], None, 1e-12).unwrap();
        assert_eq!(x[0], 2.0);
    }

    #[test]
    fn random_spd_matches_dense_oracle() {
        // Deterministic pseudo-random SPD matrix: A = M^T M + n I.
        let n = 50;
        let mut state = 0x9e3779b97f4a7c15_u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let m: StdVec<StdVec<f64>> = (0..n).map(|_| (0..n).map(|_| next()).collect()).collect();
        let mut dense = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = 0.0;
                for k in 0..n {
                    s += m[k][i] * m[k][j];
                }
                dense[i][j] = s + if i == j { n as f64 } else { 0.0 };
            }
        }
        let (row_ptr, col_idx) = dense_pattern(n);
        let mut a = CsrMatrix::from_pattern(n, row_ptr, col_idx);
        for i in 0..n {
            for j in 0..n {
                a.add(i, j, dense[i][j]);
            }
        }
        let b: StdVec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let (x, _) = solve_spd(&a, &b, None, 1e-13).unwrap();
        let x_ref = dense_solve(&dense, &b);
        let scale = x_ref.iter().map(|v| v.abs()).fold(0.0_f64, f64::max);
        for i in 0..n {
            assert!((x[i] - x_ref[i]).abs() / scale < 1e-9, "mismatch at {i}");
        }
    }

    #[test]
    fn repeat_solves_are_bitwise_identical() {
        let mut a = CsrMatrix::from_pattern(3, vec![0, 3, 6, 9], vec![0, 1, 2, 0, 1, 2, 0, 1, 2]);
        for (i, j, v) in [
            (0, 0, 4.0), (0, 1, -1.0), (0, 2, 0.5),
            (1, 0, -1.0), (1, 1, 3.0), (1, 2, -0.2),
            (2, 0, 0.5), (2, 1, -0.2), (2, 2, 5.0),
        ] {
            a.add(i, j, v);
        }
        let b = [1.0, -2.0, 0.25];
        let (x1, _) = solve_spd(&a, &b, None, 1e-12).unwrap();
        let (x2, _) = solve_spd(&a, &b, None, 1e-12).unwrap();
        assert_eq!(x1, x2);
    }

    #[test]
    fn complex_solver_handles_symmetric_system() {
        let n = 4;
        let (row_ptr, col_idx) = dense_pattern(n);
        let mut a = CsrMatrixC::from_pattern(n, row_ptr, col_idx);
        for i in 0..n {
            for j in 0..n {
                let re = if i == j { 5.0 } else { -0.5 };
                let im = if i == j { -1.0 } else { 0.1 * (i + j) as f64 };
                a.add(i, j, Complex64::new(re, im));
            }
        }
        let b: StdVec<Complex64> = (0..n).map(|i| Complex64::new(1.0 + i as f64, -0.3)).collect();
        let (x, _) = solve_complex_symmetric(&a, &b, 1e-12).unwrap();
        let mut ax = vec![Complex64::new(0.0, 0.0); n];
        a.mul_vec(&x, &mut ax);
        let norm_b = b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        let res = ax
            .iter()
            .zip(&b)
            .map(|(p, q)| (p - q).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(res / norm_b < 1e-10);
    }
}
