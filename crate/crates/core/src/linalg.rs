//! Compressed sparse rows and preconditioned conjugate gradients.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const PAR_ROWS: usize = 256;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<T>,
}

impl<T: Scalar> CsrMatrix<T> {
    /// Builds a square matrix from per-row `(column, value)` lists.
    pub fn from_rows(rows: Vec<Vec<(usize, T)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let nnz = rows.iter().map(Vec::len).sum();
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        for row in rows {
            for (c, v) in row {
                debug_assert!(c < n);
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()]
            .iter()
            .copied()
            .zip(self.vals[r].iter().copied())
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n)
            .map(|i| self.row(i).filter(|&(c, _)| c == i).map(|(_, v)| v).sum())
            .collect()
    }

    fn row_dot(&self, i: usize, x: &[T]) -> T {
        let mut acc = T::zero();
        for k in self.row_ptr[i]..self.row_ptr[i + 1] {
            acc = acc + self.vals[k] * x[self.cols[k]];
        }
        acc
    }

    /// `y = A x`; each row is summed sequentially, so results do not depend
    /// on the thread count.
    pub fn matvec_into(&self, x: &[T], y: &mut [T]) {
        if self.n >= PAR_ROWS {
            y.par_iter_mut()
                .enumerate()
                .for_each(|(i, yi)| *yi = self.row_dot(i, x));
        } else {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = self.row_dot(i, x);
            }
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        self.matvec_into(x, &mut y);
        y
    }

    /// `c₁ I + c₂ A`.
    pub fn shifted(&self, c1: T, c2: T) -> Self {
        let mut out = self.clone();
        for i in 0..self.n {
            let mut has_diag = false;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                out.vals[k] = c2 * self.vals[k];
                if self.cols[k] == i && !has_diag {
                    out.vals[k] = out.vals[k] + c1;
                    has_diag = true;
                }
            }
            assert!(
                has_diag,
                "shifted() needs an explicit diagonal entry in row {i}"
            );
        }
        out
    }
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOutcome<T> {
    pub iterations: usize,
    /// Final `‖b − A x‖ / ‖b‖`.
    pub relative_residual: T,
}

/// Jacobi-preconditioned conjugate gradients for a symmetric positive
/// definite `A`; `x` holds the initial guess and receives the solution.
pub fn pcg<T: Scalar>(
    a: &CsrMatrix<T>,
    b: &[T],
    x: &mut [T],
    tol: T,
    max_iter: usize,
) -> Result<CgOutcome<T>> {
    let n = a.n();
    let bnorm = dot(b, b).sqrt();
    if bnorm == T::zero() {
        x.iter_mut().for_each(|v| *v = T::zero());
        return Ok(CgOutcome {
            iterations: 0,
            relative_residual: T::zero(),
        });
    }
    let inv_diag: Vec<T> = a
        .diagonal()
        .into_iter()
        .map(|d| {
            if d > T::zero() {
                T::one() / d
            } else {
                T::one()
            }
        })
        .collect();
    let mut r = a.matvec(x);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let tol = T::clamp_tol(tol);
    let mut rel = dot(&r, &r).sqrt() / bnorm;
    if rel <= tol {
        return Ok(CgOutcome {
            iterations: 0,
            relative_residual: rel,
        });
    }
    let mut z: Vec<T> = r.iter().zip(&inv_diag).map(|(&ri, &d)| ri * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];
    for it in 1..=max_iter {
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(Error::Solver {
                iterations: it,
                residual: rel.as_f64(),
            });
        }
        let step = rz / pap;
        for i in 0..n {
            x[i] = x[i] + step * p[i];
            r[i] = r[i] - step * ap[i];
        }
        rel = dot(&r, &r).sqrt() / bnorm;
        if rel <= tol {
            return Ok(CgOutcome {
                iterations: it,
                relative_residual: rel,
            });
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Solver {
        iterations: max_iter,
        residual: rel.as_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> CsrMatrix<f64> {
        let rows = (0..n)
            .map(|i| {
                let mut r = vec![(i, 2.0)];
                if i > 0 {
                    r.push((i - 1, -1.0));
                }
                if i + 1 < n {
                    r.push((i + 1, -1.0));
                }
                r
            })
            .collect();
        CsrMatrix::from_rows(rows)
    }

    #[test]
    fn solves_tridiagonal_system() {
        let a = laplacian(50);
        let exact: Vec<f64> = (0..50).map(|i| (i as f64 * 0.1).sin()).collect();
        let b = a.matvec(&exact);
        let mut x = vec![0.0; 50];
        let out = pcg(&a, &b, &mut x, 1e-12, 500).unwrap();
        assert!(out.relative_residual <= 1e-12);
        for (u, v) in x.iter().zip(&exact) {
            assert!((u - v).abs() < 1e-9);
        }
    }

    #[test]
    fn reports_nonconvergence() {
        let a = laplacian(200);
        let b = vec![1.0; 200];
        let mut x = vec![0.0; 200];
        match pcg(&a, &b, &mut x, 1e-14, 3) {
            Err(Error::Solver {
                iterations,
                residual,
            }) => {
                assert_eq!(iterations, 3);
                assert!(residual > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn shift_adds_identity() {
        let a = laplacian(3).shifted(1.0, 0.5);
        assert_eq!(a.diagonal(), vec![2.0, 2.0, 2.0]);
    }
}
