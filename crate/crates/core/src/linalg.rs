//! Small dense linear solves used by the Newton and projection routines.
//!
//! Systems here are tiny (the number of customer types plus a couple of rows),
//! so plain Gaussian elimination with partial pivoting is all that is needed.

use crate::{Error, Result};

/// Solves `a * x = b` in place for a square non-singular system. Row-major.
pub fn solve(a: &mut [Vec<f64>], b: &mut [f64]) -> Result<Vec<f64>> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|row| row.len() == n));

    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot_row][col].abs() < 1e-300 {
            return Err(Error::Solver(format!(
                "singular {n}x{n} system (pivot {:.3e} in column {col})",
                a[pivot_row][col]
            )));
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                a[row][j] -= factor * a[col][j];
            }
            b[row] -= factor * b[col];
        }
    }

    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut sum = b[row];
        for j in row + 1..n {
            sum -= a[row][j] * x[j];
        }
        x[row] = sum / a[row][row];
    }
    Ok(x)
}

/// Solves `a * x = b` where `a` may be rank deficient but the system is
/// consistent (the right-hand side lies in the column span). Components
/// associated with non-pivot columns are left at zero, giving one particular
/// solution.
pub fn solve_consistent(a: &mut [Vec<f64>], b: &mut [f64], tol: f64) -> Result<Vec<f64>> {
    let n = b.len();
    debug_assert!(a.len() == n && a.iter().all(|row| row.len() == n));

    let mut pivots: Vec<(usize, usize)> = Vec::with_capacity(n);
    let mut row = 0;
    for col in 0..n {
        if row == n {
            break;
        }
        let pivot_row = (row..n)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap();
        if a[pivot_row][col].abs() <= tol {
            continue;
        }
        a.swap(row, pivot_row);
        b.swap(row, pivot_row);
        for r in row + 1..n {
            let factor = a[r][col] / a[row][col];
            if factor == 0.0 {
                continue;
            }
            for j in col..n {
                a[r][j] -= factor * a[row][j];
            }
            b[r] -= factor * b[row];
        }
        pivots.push((row, col));
        row += 1;
    }

    for r in row..n {
        if b[r].abs() > tol.max(1e-9) {
            return Err(Error::Solver(format!(
                "inconsistent rank-deficient system (residual {:.3e})",
                b[r]
            )));
        }
    }

    let mut x = vec![0.0; n];
    for &(r, c) in pivots.iter().rev() {
        let mut sum = b[r];
        for j in c + 1..n {
            sum -= a[r][j] * x[j];
        }
        x[c] = sum / a[r][c];
    }
    Ok(x)
}
