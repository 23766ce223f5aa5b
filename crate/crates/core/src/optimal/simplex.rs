//! Self-contained dense simplex for the small packing LPs.
//!
//! Revised-simplex iterations with a dense basis solve and Bland's rule
//! (smallest-index entering and leaving choices), which rules out cycling.
//! Problem sizes here are a handful of rows and at most a few hundred
//! columns, so no factorization reuse or sparsity is warranted.

use crate::linalg;
use crate::{Error, Result};

/// Outcome of a solved linear program.
#[derive(Clone, Debug)]
pub struct LpResult {
    /// Optimal values of the structural variables.
    pub x: Vec<f64>,
    /// Optimal objective value.
    pub value: f64,
    /// Dual values per constraint row.
    pub dual: Vec<f64>,
}

/// Constraint sense for [`solve_min`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Equal,
    GreaterEqual,
}

/// Minimizes `c . x` subject to `A x = b` or `A x >= b` and `x >= 0`.
/// Requires `b >= 0` (true for the offered-load constraints this serves).
pub fn solve_min(c: &[f64], a: &[Vec<f64>], b: &[f64], sense: Sense) -> Result<LpResult> {
    let m = b.len();
    let n = c.len();
    debug_assert!(a.len() == m && a.iter().all(|row| row.len() == n));
    if b.iter().any(|&v| v < 0.0) {
        return Err(Error::Solver("right-hand side must be non-negative".into()));
    }

    // Column layout: structural | surplus (>= only) | artificial.
    let n_surplus = if sense == Sense::GreaterEqual { m } else { 0 };
    let n_total = n + n_surplus + m;
    let column = |j: usize, i: usize| -> f64 {
        if j < n {
            a[i][j]
        } else if j < n + n_surplus {
            if j - n == i {
                -1.0
            } else {
                0.0
            }
        } else if j - n - n_surplus == i {
            1.0
        } else {
            0.0
        }
    };

    let mut basis: Vec<usize> = (n + n_surplus..n_total).collect();

    // Phase 1: minimize the sum of artificials.
    let mut cost1 = vec![0.0; n_total];
    for cj in cost1.iter_mut().skip(n + n_surplus) {
        *cj = 1.0;
    }
    let feas = run_phase(&column, &cost1, b, &mut basis, n_total)?;
    if feas > 1e-8 {
        return Err(Error::Solver(format!(
            "infeasible program (phase-1 objective {feas:.3e})"
        )));
    }
    pivot_out_artificials(&column, b, &mut basis, n + n_surplus)?;

    // Phase 2: original costs, artificials barred from entering.
    let mut cost2 = vec![0.0; n_total];
    cost2[..n].copy_from_slice(c);
    let value = run_phase(&column, &cost2, b, &mut basis, n + n_surplus)?;

    let xb = basic_solution(&column, b, &basis)?;
    let mut x = vec![0.0; n];
    for (pos, &j) in basis.iter().enumerate() {
        if j < n {
            x[j] = xb[pos].max(0.0);
        }
    }
    let dual = dual_values(&column, &cost2, &basis)?;
    Ok(LpResult { x, value, dual })
}

/// Runs Bland-rule iterations for the given cost vector; columns with index
/// `>= allowed` may stay basic but may not enter. Returns the objective.
fn run_phase(
    column: &dyn Fn(usize, usize) -> f64,
    cost: &[f64],
    b: &[f64],
    basis: &mut [usize],
    allowed: usize,
) -> Result<f64> {
    let m = b.len();
    let mut iterations = 0usize;
    let max_iterations = 50_000;
    loop {
        iterations += 1;
        if iterations > max_iterations {
            return Err(Error::Solver(format!(
                "simplex exceeded {max_iterations} iterations"
            )));
        }
        let y = dual_values(column, cost, basis)?;

        // Bland: smallest-index improving column.
        let mut entering = None;
        for j in 0..allowed {
            if basis.contains(&j) {
                continue;
            }
            let reduced = cost[j] - (0..m).map(|i| y[i] * column(j, i)).sum::<f64>();
            if reduced < -1e-9 {
                entering = Some(j);
                break;
            }
        }
        let Some(entering) = entering else {
            let xb = basic_solution(column, b, basis)?;
            let value = basis
                .iter()
                .enumerate()
                .map(|(pos, &j)| cost[j] * xb[pos])
                .sum();
            return Ok(value);
        };

        // Direction of the entering column through the basis.
        let mut bmat: Vec<Vec<f64>> = (0..m)
            .map(|i| basis.iter().map(|&j| column(j, i)).collect())
            .collect();
        let mut rhs: Vec<f64> = (0..m).map(|i| column(entering, i)).collect();
        let d = linalg::solve(&mut bmat, &mut rhs)?;
        let xb = basic_solution(column, b, basis)?;

        let mut leaving: Option<(usize, f64)> = None;
        for i in 0..m {
            if d[i] > 1e-11 {
                let ratio = xb[i].max(0.0) / d[i];
                let better = match leaving {
                    None => true,
                    Some((li, lr)) => {
                        ratio < lr - 1e-12 || (ratio < lr + 1e-12 && basis[i] < basis[li])
                    }
                };
                if better {
                    leaving = Some((i, ratio));
                }
            }
        }
        let Some((leave_pos, _)) = leaving else {
            return Err(Error::Solver("unbounded direction in simplex".into()));
        };
        basis[leave_pos] = entering;
    }
}

/// Replaces zero-level artificial basics by structural columns where the
/// pivot row allows it, so phase 2 starts from a clean basis.
fn pivot_out_artificials(
    column: &dyn Fn(usize, usize) -> f64,
    b: &[f64],
    basis: &mut [usize],
    artificial_start: usize,
) -> Result<()> {
    let m = b.len();
    for pos in 0..m {
        if basis[pos] < artificial_start {
            continue;
        }
        for j in 0..artificial_start {
            if basis.contains(&j) {
                continue;
            }
            // row `pos` of B^-1 * A_j must be nonzero for the swap
            let mut bmat: Vec<Vec<f64>> = (0..m)
                .map(|i| basis.iter().map(|&jj| column(jj, i)).collect())
                .collect();
            let mut rhs: Vec<f64> = (0..m).map(|i| column(j, i)).collect();
            let d = linalg::solve(&mut bmat, &mut rhs)?;
            if d[pos].abs() > 1e-9 {
                basis[pos] = j;
                break;
            }
        }
    }
    Ok(())
}

fn basic_solution(
    column: &dyn Fn(usize, usize) -> f64,
    b: &[f64],
    basis: &[usize],
) -> Result<Vec<f64>> {
    let m = b.len();
    let mut bmat: Vec<Vec<f64>> = (0..m)
        .map(|i| basis.iter().map(|&j| column(j, i)).collect())
        .collect();
    let mut rhs = b.to_vec();
    linalg::solve(&mut bmat, &mut rhs)
}

fn dual_values(
    column: &dyn Fn(usize, usize) -> f64,
    cost: &[f64],
    basis: &[usize],
) -> Result<Vec<f64>> {
    let m = basis.len();
    // B^T y = c_B
    let mut bt: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|row| column(basis[i], row)).collect())
        .collect();
    let mut cb: Vec<f64> = basis.iter().map(|&j| cost[j]).collect();
    linalg::solve(&mut bt, &mut cb)
}
