//! Jacobi-preconditioned conjugate gradient for sparse symmetric positive-definite systems.

use crate::{Error, Result};

/// Compressed sparse row matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from per-row `(col, value)` lists. Duplicate columns are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|&(j, _)| j);
            let start = cols.len();
            for (j, v) in row {
                assert!(j < n, "column {j} out of range for {n}x{n} matrix");
                if cols.len() > start && *cols.last().unwrap() == j {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(j);
                    vals.push(v);
                }
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

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            let r = self.row_ptr[i]..self.row_ptr[i + 1];
            out[i] = self.cols[r.clone()]
                .iter()
                .zip(&self.vals[r])
                .map(|(&j, &v)| v * x[j])
                .sum();
        }
    }
}

#[derive(Debug, Clone)]
pub struct CgSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `||b - A x|| / ||b||` at exit.
    pub relative_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves `A x = b` to `||b - A x|| <= tol * ||b||`.
///
/// Fails if `A` shows non-positive curvature along a search direction or the
/// tolerance is not met within `max_iter` iterations.
pub fn conjugate_gradient(
    a: &CsrMatrix,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<CgSolution> {
    let n = a.dim();
    assert_eq!(b.len(), n, "right-hand side length");
    let b_norm = dot(b, b).sqrt();
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok(CgSolution {
            x,
            iterations: 0,
            relative_residual: 0.0,
        });
    }
    let diag = a.diagonal();
    if let Some(i) = diag.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::Solver(format!(
            "non-positive diagonal entry at row {i}"
        )));
    }

    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut residual = 1.0;

    for k in 0..max_iter {
        a.mul_vec(&p, &mut ap);
        let curvature = dot(&p, &ap);
        if !(curvature > 0.0) {
            return Err(Error::Solver(format!(
                "matrix is not positive definite (p'Ap = {curvature:e} at iteration {k})"
            )));
        }
        let step = rz / curvature;
        for i in 0..n {
            x[i] += step * p[i];
            r[i] -= step * ap[i];
        }
        residual = dot(&r, &r).sqrt() / b_norm;
        if residual <= tol {
            // Confirm against the true residual; the recurrence drifts slightly.
            a.mul_vec(&x, &mut ap);
            let true_res = b
                .iter()
                .zip(&ap)
                .map(|(b, ax)| (b - ax).powi(2))
                .sum::<f64>()
                .sqrt()
                / b_norm;
            if true_res <= tol {
                return Ok(CgSolution {
                    x,
                    iterations: k + 1,
                    relative_residual: true_res,
                });
            }
            for i in 0..n {
                r[i] = b[i] - ap[i];
            }
        }
        for i in 0..n {
            z[i] = r[i] / diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(Error::Solver(format!(
        "conjugate gradient did not reach {tol:e} in {max_iter} iterations (residual {residual:e})"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_spd_system() {
        // [[4,1,0],[1,3,1],[0,1,2]] x = [1,2,3]
        let a = CsrMatrix::from_rows(vec![
            vec![(0, 4.0), (1, 1.0)],
            vec![(0, 1.0), (1, 3.0), (2, 1.0)],
            vec![(1, 1.0), (2, 2.0)],
        ]);
        let sol = conjugate_gradient(&a, &[1.0, 2.0, 3.0], 1e-12, 100).unwrap();
        let mut ax = vec![0.0; 3];
        a.mul_vec(&sol.x, &mut ax);
        for (got, want) in ax.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-11);
        }
        assert!(sol.relative_residual <= 1e-12);
    }

    #[test]
    fn zero_rhs_is_zero_solution() {
        let a = CsrMatrix::from_rows(vec![vec![(0, 2.0)]]);
        let sol = conjugate_gradient(&a, &[0.0], 1e-10, 10).unwrap();
        assert_eq!(sol.x, vec![0.0]);
        assert_eq!(sol.iterations, 0);
    }

    #[test]
    fn indefinite_matrix_is_reported() {
        let a = CsrMatrix::from_rows(vec![vec![(0, 1.0), (1, 2.0)], vec![(0, 2.0), (1, 1.0)]]);
        assert!(matches!(
            conjugate_gradient(&a, &[1.0, -1.0], 1e-10, 10),
            Err(Error::Solver(_))
        ));
    }

    #[test]
    fn duplicate_entries_accumulate() {
        let a = CsrMatrix::from_rows(vec![vec![(0, 1.0), (0, 2.0)]]);
        assert_eq!(a.get(0, 0), 3.0);
    }
}
