//! Fluid-scale operating points: the occupied-servers LP, the entropy-program
//! optimum `x^{*,a}`, and distances to the optimal set.
//!
//! Three independent routes to the same points keep each other honest:
//!
//! - [`solve_lp`] minimizes total occupied mass by a dense simplex, reporting
//!   a primal vertex together with a dual certificate;
//! - [`solve_entropy`] runs Newton's method on the multipliers of the
//!   entropy-like program, whose product-form solution has only `I` unknowns;
//! - [`solve_fixed_point`] iterates the loss-system fixed point (a damped
//!   multiplicative update on the effective input rates) and must land on the
//!   same point as the entropy solver.

mod simplex;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg;
use crate::packing::ConfigSet;
use crate::{Error, Result};

pub use simplex::{LpResult, Sense};

/// Convergence target for the entropy and fixed-point solvers (residual of
/// the offered-load constraints, infinity norm).
const SOLVER_TOL: f64 = 1e-13;
/// Residual at which a solver run is considered failed.
const SOLVER_FAIL_TOL: f64 = 1e-10;

/// A fluid-scale operating point and its certificates.
///
/// `x` is indexed like the configuration set (entry 0, the zero
/// configuration, stays zero). LP solutions carry the dual vector `eta`;
/// entropy and fixed-point solutions carry the multipliers `nu`, the
/// parameter `a` and (for the fixed point) the loss-system input rates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub x: Vec<f64>,
    /// Total occupied mass `sum_k x_k`.
    pub objective: f64,
    pub nu: Option<Vec<f64>>,
    pub eta: Option<Vec<f64>>,
    pub a: Option<f64>,
    pub hat_lambda: Option<Vec<f64>>,
}

fn validate_rho(set: &ConfigSet, rho: &[f64]) -> Result<()> {
    if rho.len() != set.types() {
        return Err(Error::InvalidSpec(format!(
            "rho has {} entries but the set has {} types",
            rho.len(),
            set.types()
        )));
    }
    for (i, &r) in rho.iter().enumerate() {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "rho[{i}] must be positive, got {r}"
            )));
        }
    }
    Ok(())
}

/// Constraint matrix over the non-zero members: `A[i][col] = k_i` of the
/// member at index `col + 1`.
fn constraint_matrix(set: &ConfigSet) -> Vec<Vec<f64>> {
    (0..set.types())
        .map(|i| {
            (1..set.len())
                .map(|idx| set.member(idx).get(i) as f64)
                .collect()
        })
        .collect()
}

fn full_vector(set: &ConfigSet, over_nonzero: &[f64]) -> Vec<f64> {
    let mut x = vec![0.0; set.len()];
    x[1..].copy_from_slice(over_nonzero);
    x
}

/// Solves `min sum_k x_k` over the polytope `sum_k k_i x_k = rho_i, x >= 0`.
///
/// The primal vertex comes from the equality-constrained program, so it
/// always satisfies the loads exactly. The dual certificate comes from the
/// relaxation with `>=` constraints, which by monotonicity has the same
/// value; its multipliers are non-negative, satisfy `sum_i k_i eta_i <= 1`
/// for every configuration and are complementary to any optimal primal.
pub fn solve_lp(set: &ConfigSet, rho: &[f64]) -> Result<OperatingPoint> {
    validate_rho(set, rho)?;
    let a = constraint_matrix(set);
    let c = vec![1.0; set.num_nonzero()];

    let primal = simplex::solve_min(&c, &a, rho, Sense::Equal)?;
    let dual = simplex::solve_min(&c, &a, rho, Sense::GreaterEqual)?;
    if (primal.value - dual.value).abs() > 1e-9 * primal.value.max(1.0) {
        return Err(Error::Solver(format!(
            "equality and relaxed programs disagree: {} vs {}",
            primal.value, dual.value
        )));
    }

    Ok(OperatingPoint {
        x: full_vector(set, &primal.x),
        objective: primal.value,
        nu: None,
        eta: Some(dual.dual.iter().map(|&v| v.max(0.0)).collect()),
        a: None,
        hat_lambda: None,
    })
}

fn check_a_range(a: f64) -> Result<()> {
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidSpec(format!(
            "parameter a must lie in (0, 1), got {a}"
        )));
    }
    Ok(())
}

/// Product-form masses for multipliers `nu`: `x_k = a^(1 - sum_i k_i nu_i) / c_k`,
/// evaluated in log space so very small `a` cannot underflow prematurely.
fn product_form(set: &ConfigSet, a: f64, nu: &[f64]) -> Vec<f64> {
    let ln_a = a.ln();
    let mut x = vec![0.0; set.len()];
    for idx in 1..set.len() {
        let member = set.member(idx);
        let weighted: f64 = (0..set.types())
            .map(|i| member.get(i) as f64 * nu[i])
            .sum();
        x[idx] = ((1.0 - weighted) * ln_a - set.ln_factorial_weight(idx)).exp();
    }
    x
}

fn load_residual(set: &ConfigSet, x: &[f64], rho: &[f64]) -> Vec<f64> {
    let mut res = vec![0.0; set.types()];
    for idx in 1..set.len() {
        for (i, r) in res.iter_mut().enumerate() {
            *r += set.member(idx).get(i) as f64 * x[idx];
        }
    }
    for (r, &target) in res.iter_mut().zip(rho) {
        *r -= target;
    }
    res
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, &x| m.max(x.abs()))
}

/// Minimizes the entropy-like objective `L_a` over the load polytope via
/// Newton iterations on the `I` multipliers `nu`; the minimizer is the
/// unique product-form point meeting the loads.
///
/// The multipliers minimize the smooth convex potential
/// `phi(nu) = (1/b) sum_k x_k(nu) - nu . rho`, whose gradient is exactly the
/// load residual; Newton steps with Armijo backtracking on `phi` are globally
/// convergent. For small `a` the solve is warm-started by a continuation
/// ladder of decreasing `a` values, since the cold start `nu = 0` is
/// exponentially far from the solution.
pub fn solve_entropy(set: &ConfigSet, rho: &[f64], a: f64) -> Result<OperatingPoint> {
    validate_rho(set, rho)?;
    check_a_range(a)?;

    let mut nu = vec![0.0; set.types()];
    for stage in continuation_ladder(a) {
        newton_on_multipliers(set, rho, stage, &mut nu)?;
    }
    let x = product_form(set, a, &nu);
    let objective = x[1..].iter().sum();
    Ok(OperatingPoint {
        x,
        objective,
        nu: Some(nu),
        eta: None,
        a: Some(a),
        hat_lambda: None,
    })
}

/// Decreasing `a` values ending at the target, one decade apart.
fn continuation_ladder(a: f64) -> Vec<f64> {
    let mut ladder = vec![a];
    let mut stage = a;
    while stage < 0.05 {
        stage *= 10.0;
        ladder.push(stage.min(0.5));
    }
    ladder.reverse();
    ladder
}

/// Runs damped Newton on `phi` for one `a`, updating `nu` in place.
fn newton_on_multipliers(set: &ConfigSet, rho: &[f64], a: f64, nu: &mut Vec<f64>) -> Result<()> {
    let types = set.types();
    let b = -a.ln();
    let phi = |x: &[f64], nu: &[f64]| -> f64 {
        x[1..].iter().sum::<f64>() / b - nu.iter().zip(rho).map(|(n, r)| n * r).sum::<f64>()
    };

    let mut x = product_form(set, a, nu);
    let mut residual = load_residual(set, &x, rho);
    let mut value = phi(&x, nu);

    for _ in 0..200 {
        let res_norm = inf_norm(&residual);
        if res_norm < SOLVER_TOL {
            return Ok(());
        }
        // Hessian of phi: b * sum_k k_i k_j x_k
        let mut hess = vec![vec![0.0; types]; types];
        for idx in 1..set.len() {
            let member = set.member(idx);
            for i in 0..types {
                let ki = member.get(i) as f64;
                if ki == 0.0 {
                    continue;
                }
                for j in 0..types {
                    hess[i][j] += b * ki * member.get(j) as f64 * x[idx];
                }
            }
        }
        let mut rhs: Vec<f64> = residual.iter().map(|&r| -r).collect();
        let delta = linalg::solve(&mut hess, &mut rhs)?;
        let slope: f64 = residual.iter().zip(&delta).map(|(g, d)| g * d).sum();

        // Backtracking: Armijo decrease of the potential, or — near the
        // solution, where potential decrements drop below f64 resolution —
        // a plain reduction of the residual norm.
        let mut t = 1.0;
        loop {
            let trial: Vec<f64> = nu.iter().zip(&delta).map(|(v, d)| v + t * d).collect();
            let trial_x = product_form(set, a, &trial);
            let trial_value = phi(&trial_x, &trial);
            let trial_residual = load_residual(set, &trial_x, rho);
            let sufficient = trial_value <= value + 0.25 * t * slope
                || inf_norm(&trial_residual) < 0.9 * res_norm;
            if trial_value.is_finite() && sufficient {
                *nu = trial;
                x = trial_x;
                value = trial_value;
                residual = trial_residual;
                break;
            }
            t *= 0.5;
            if t < 1e-14 {
                return Err(Error::Solver(format!(
                    "entropy line search stalled at residual {res_norm:.3e} (a = {a:.3e})"
                )));
            }
        }
    }
    let res_norm = inf_norm(&residual);
    if res_norm > SOLVER_FAIL_TOL {
        return Err(Error::Solver(format!(
            "entropy solver stalled at residual {res_norm:.3e} (a = {a:.3e})"
        )));
    }
    Ok(())
}

/// Solves the loss-system fixed point: input rates `hat_lambda` such that the
/// product-form state with `x_0 = a` meets the offered loads. Damped
/// multiplicative updates on `u_i = hat_lambda_i / mu_i`; independent of the
/// Newton route in [`solve_entropy`], on which it must land.
pub fn solve_fixed_point(set: &ConfigSet, rho: &[f64], mu: &[f64], a: f64) -> Result<OperatingPoint> {
    validate_rho(set, rho)?;
    check_a_range(a)?;
    if mu.len() != set.types() {
        return Err(Error::InvalidSpec(format!(
            "mu has {} entries but the set has {} types",
            mu.len(),
            set.types()
        )));
    }
    let types = set.types();
    let b = -a.ln();

    let mut ln_u = vec![0.0; types];
    for stage in continuation_ladder(a) {
        fixed_point_stage(set, rho, stage, &mut ln_u)?;
    }

    let x = masses_for(set, a, &ln_u);
    let nu: Vec<f64> = ln_u.iter().map(|&lu| lu / b).collect();
    let hat_lambda: Vec<f64> = (0..types).map(|i| mu[i] * ln_u[i].exp()).collect();
    let objective = x[1..].iter().sum();
    Ok(OperatingPoint {
        x,
        objective,
        nu: Some(nu),
        eta: None,
        a: Some(a),
        hat_lambda: Some(hat_lambda),
    })
}

/// Product-form masses for effective loads `u_i = hat_lambda_i / mu_i` given
/// in logs: `x_k = a * prod_i u_i^{k_i} / c_k`.
fn masses_for(set: &ConfigSet, a: f64, ln_u: &[f64]) -> Vec<f64> {
    let ln_a = a.ln();
    let mut x = vec![0.0; set.len()];
    for idx in 1..set.len() {
        let member = set.member(idx);
        let weighted: f64 = (0..set.types())
            .map(|i| member.get(i) as f64 * ln_u[i])
            .sum();
        x[idx] = (ln_a + weighted - set.ln_factorial_weight(idx)).exp();
    }
    x
}

/// Damped multiplicative updates `u_i <- u_i * (rho_i / y_i(u))^theta` for
/// one `a`, with the damping halved (bisection style) whenever a step makes
/// the residual worse.
fn fixed_point_stage(set: &ConfigSet, rho: &[f64], a: f64, ln_u: &mut Vec<f64>) -> Result<()> {
    let types = set.types();
    let loads = |x: &[f64]| -> Vec<f64> {
        let mut y = vec![0.0; types];
        for idx in 1..set.len() {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi += set.member(idx).get(i) as f64 * x[idx];
            }
        }
        y
    };

    let mut y = loads(&masses_for(set, a, ln_u));
    let mut res = residual_norm(&y, rho);
    let mut theta = 1.0;

    for _ in 0..500_000 {
        if res < SOLVER_TOL {
            return Ok(());
        }
        let trial: Vec<f64> = (0..types)
            .map(|i| ln_u[i] + theta * (rho[i] / y[i]).ln())
            .collect();
        let trial_y = loads(&masses_for(set, a, &trial));
        let trial_res = residual_norm(&trial_y, rho);
        if trial_res < res {
            *ln_u = trial;
            y = trial_y;
            res = trial_res;
            theta = (theta * 1.2).min(1.0);
        } else {
            theta *= 0.5;
            if theta < 1e-10 {
                break;
            }
        }
    }
    if res > SOLVER_FAIL_TOL {
        return Err(Error::Solver(format!(
            "fixed-point iteration stalled at residual {res:.3e} (a = {a:.3e})"
        )));
    }
    Ok(())
}

fn residual_norm(y: &[f64], rho: &[f64]) -> f64 {
    y.iter()
        .zip(rho)
        .fold(0.0, |m, (&yi, &ri)| m.max((yi - ri).abs()))
}

/// Euclidean distance from `x` to the optimal set of the LP (the face
/// `{u >= 0 : A u = rho, sum u = V*}`), computed with a solved LP in hand.
pub fn distance_to_optimal_with(
    lp: &OperatingPoint,
    x: &[f64],
    set: &ConfigSet,
    rho: &[f64],
) -> Result<f64> {
    let n = set.num_nonzero();
    let query: Vec<f64> = x[1..].to_vec();
    if x.len() != set.len() {
        return Err(Error::InvalidState(
            "query vector does not match the configuration set".into(),
        ));
    }

    // rows: per-type loads plus the optimal-value constraint
    let mut rows: Vec<Vec<f64>> = constraint_matrix(set);
    rows.push(vec![1.0; n]);
    let mut targets = rho.to_vec();
    targets.push(lp.objective);

    let start: Vec<f64> = lp.x[1..].to_vec();
    let projected = project_onto_face(&rows, &targets, &start, &query)?;
    let dist2: f64 = projected
        .iter()
        .zip(&query)
        .map(|(p, q)| (p - q) * (p - q))
        .sum();
    Ok(dist2.sqrt())
}

/// Convenience wrapper that solves the LP first.
pub fn distance_to_optimal(x: &[f64], set: &ConfigSet, rho: &[f64]) -> Result<f64> {
    let lp = solve_lp(set, rho)?;
    distance_to_optimal_with(&lp, x, set, rho)
}

/// Projects `query` onto `{u >= 0 : rows . u = targets}` by a primal
/// active-set method started from the feasible point `start`.
fn project_onto_face(
    rows: &[Vec<f64>],
    targets: &[f64],
    start: &[f64],
    query: &[f64],
) -> Result<Vec<f64>> {
    let m = rows.len();
    let n = query.len();
    let mut u = start.to_vec();
    let mut active: Vec<bool> = u.iter().map(|&v| v <= 1e-12).collect();
    for (v, is_active) in u.iter_mut().zip(&active) {
        if *is_active {
            *v = 0.0;
        }
    }

    for _ in 0..10 * (n + 5) {
        // Equality-constrained minimizer over the free variables:
        // u_F = q_F + rows_F^T y with rows_F u_F = targets.
        let mut gram = vec![vec![0.0; m]; m];
        let mut rhs = vec![0.0; m];
        for i in 0..m {
            for j in 0..m {
                gram[i][j] = (0..n)
                    .filter(|&col| !active[col])
                    .map(|col| rows[i][col] * rows[j][col])
                    .sum();
            }
            rhs[i] = targets[i]
                - (0..n)
                    .filter(|&col| !active[col])
                    .map(|col| rows[i][col] * query[col])
                    .sum::<f64>();
        }
        let scale = gram
            .iter()
            .flatten()
            .fold(1.0f64, |acc, &v| acc.max(v.abs()));
        let y = linalg::solve_consistent(&mut gram, &mut rhs, 1e-12 * scale)?;

        let mut candidate = vec![0.0; n];
        for col in 0..n {
            if !active[col] {
                candidate[col] =
                    query[col] + (0..m).map(|i| rows[i][col] * y[i]).sum::<f64>();
            }
        }

        // Step toward the candidate, stopping at the first bound.
        let mut alpha = 1.0f64;
        let mut blocking = None;
        for col in 0..n {
            if !active[col] && candidate[col] < -1e-14 {
                let step = u[col] / (u[col] - candidate[col]);
                if step < alpha {
                    alpha = step;
                    blocking = Some(col);
                }
            }
        }
        if let Some(block) = blocking {
            for col in 0..n {
                if !active[col] {
                    u[col] += alpha * (candidate[col] - u[col]);
                    if u[col] < 0.0 {
                        u[col] = 0.0;
                    }
                }
            }
            u[block] = 0.0;
            active[block] = true;
            continue;
        }
        u = candidate;

        // Bound multipliers; release the most negative if any.
        let mut worst: Option<(usize, f64)> = None;
        for col in 0..n {
            if active[col] {
                let sigma = -query[col] - (0..m).map(|i| rows[i][col] * y[i]).sum::<f64>();
                if sigma < worst.map_or(-1e-10, |(_, w)| w) {
                    worst = Some((col, sigma));
                }
            }
        }
        match worst {
            Some((col, _)) => {
                active[col] = false;
            }
            None => return Ok(u),
        }
    }
    Err(Error::Solver(
        "projection onto the optimal face did not settle".into(),
    ))
}

/// One row of an `a`-sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepRow {
    pub a: f64,
    pub objective: f64,
    pub distance: f64,
    pub nu: Vec<f64>,
    pub x: Vec<f64>,
}

/// Result of sweeping `a` values: rows sorted by `a` descending, with
/// per-entry failures reported rather than aborting the sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Sweep {
    pub lp_value: f64,
    pub rows: Vec<SweepRow>,
    pub failures: Vec<(f64, String)>,
}

/// Solves the entropy program across `a_list` and tabulates objective values
/// and distances to the LP optimal set.
pub fn a_sweep(set: &ConfigSet, rho: &[f64], a_list: &[f64]) -> Result<Sweep> {
    if a_list.is_empty() {
        return Err(Error::InvalidSpec("empty a list".into()));
    }
    for &a in a_list {
        check_a_range(a)?;
    }
    let lp = solve_lp(set, rho)?;
    let mut sorted = a_list.to_vec();
    sorted.sort_by(|p, q| q.total_cmp(p));
    sorted.dedup();

    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for &a in &sorted {
        match solve_entropy(set, rho, a)
            .and_then(|op| Ok((distance_to_optimal_with(&lp, &op.x, set, rho)?, op)))
        {
            Ok((distance, op)) => rows.push(SweepRow {
                a,
                objective: op.objective,
                distance,
                nu: op.nu.expect("entropy solutions carry multipliers"),
                x: op.x,
            }),
            Err(e) => {
                log::warn!("sweep entry a={a:.3e} failed: {e}");
                failures.push((a, e.to_string()));
            }
        }
    }
    Ok(Sweep {
        lp_value: lp.objective,
        rows,
        failures,
    })
}

/// Draws strictly interior points of the load polytope: random null-space
/// directions from a smooth interior base point, scaled to keep every mass
/// positive. Useful for spot-checking descent and optimality properties.
pub fn random_feasible_points(
    set: &ConfigSet,
    rho: &[f64],
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    validate_rho(set, rho)?;
    let base = solve_entropy(set, rho, 0.01)?.x;
    let rows = constraint_matrix(set);
    let m = set.types();
    let n = set.num_nonzero();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut points = Vec::with_capacity(count);
    while points.len() < count {
        let mut d: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        // project out the constraint rows: d <- d - A^T (A A^T)^-1 A d
        let mut gram = vec![vec![0.0; m]; m];
        let mut rhs = vec![0.0; m];
        for i in 0..m {
            for j in 0..m {
                gram[i][j] = (0..n).map(|c| rows[i][c] * rows[j][c]).sum();
            }
            rhs[i] = (0..n).map(|c| rows[i][c] * d[c]).sum();
        }
        let w = linalg::solve(&mut gram, &mut rhs)?;
        for (c, dc) in d.iter_mut().enumerate() {
            *dc -= (0..m).map(|i| rows[i][c] * w[i]).sum::<f64>();
        }
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-12 {
            continue;
        }

        let mut t_max = f64::INFINITY;
        for (c, &dc) in d.iter().enumerate() {
            if dc < 0.0 {
                t_max = t_max.min(base[c + 1] / (-dc));
            }
        }
        debug_assert!(t_max.is_finite());
        let t = 0.9 * rng.gen::<f64>() * t_max;
        let mut x = base.clone();
        for (c, &dc) in d.iter().enumerate() {
            x[c + 1] += t * dc;
        }
        points.push(x);
    }
    Ok(points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::packing::Configuration;

    fn single_type_three() -> ConfigSet {
        ConfigSet::vector_packing(&[5.0], 15.0).unwrap()
    }

    #[test]
    fn lp_single_type_fills_largest() {
        let set = single_type_three();
        let lp = solve_lp(&set, &[1.0]).unwrap();
        assert!((lp.objective - 1.0 / 3.0).abs() < 1e-12);
        let idx = set.index_of(&Configuration::new(vec![3])).unwrap();
        assert!((lp.x[idx] - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_matches_quadratic_oracle() {
        // K = {(0),(1),(2)}, rho = 1: the constraint a u + a u^2 = 1 pins
        // u = (-1 + sqrt(1 + 4/a)) / 2, with x_1 = a u, x_2 = a u^2 / 2.
        let set = ConfigSet::vector_packing(&[5.0], 10.0).unwrap();
        let a = 0.01f64;
        let u = (-1.0 + (1.0 + 4.0 / a).sqrt()) / 2.0;
        let op = solve_entropy(&set, &[1.0], a).unwrap();
        assert!((op.x[1] - a * u).abs() < 1e-10, "x1 {} vs {}", op.x[1], a * u);
        assert!(
            (op.x[2] - a * u * u / 2.0).abs() < 1e-10,
            "x2 {} vs {}",
            op.x[2],
            a * u * u / 2.0
        );
        assert!((op.objective - (a * u + a * u * u / 2.0)).abs() < 1e-12);
    }

    #[test]
    fn fixed_point_matches_quadratic_oracle() {
        let set = ConfigSet::vector_packing(&[5.0], 10.0).unwrap();
        let a = 0.01f64;
        let u = (-1.0 + (1.0 + 4.0 / a).sqrt()) / 2.0;
        let op = solve_fixed_point(&set, &[1.0], &[1.0], a).unwrap();
        let hat = op.hat_lambda.unwrap();
        assert!((hat[0] - u).abs() < 1e-8, "hat lambda {} vs {}", hat[0], u);
    }

    #[test]
    fn rejects_bad_a() {
        let set = single_type_three();
        assert!(solve_entropy(&set, &[1.0], 0.0).is_err());
        assert!(solve_entropy(&set, &[1.0], 1.0).is_err());
        assert!(solve_fixed_point(&set, &[1.0], &[1.0], 1.5).is_err());
    }

    #[test]
    fn distance_closed_form_singleton() {
        // K = {(0),(1),(2)}, rho = 1: X* = {x_2 = 1/2}; from x = (1, 0) the
        // distance is sqrt(1 + 1/4).
        let set = ConfigSet::vector_packing(&[5.0], 10.0).unwrap();
        let mut x = vec![0.0; set.len()];
        x[1] = 1.0;
        let d = distance_to_optimal(&x, &set, &[1.0]).unwrap();
        assert!((d - (1.25f64).sqrt()).abs() < 1e-9, "distance {d}");
    }

    #[test]
    fn distance_zero_at_optimum() {
        let set = single_type_three();
        let lp = solve_lp(&set, &[1.0]).unwrap();
        let d = distance_to_optimal_with(&lp, &lp.x, &set, &[1.0]).unwrap();
        assert!(d < 1e-10, "distance {d}");
    }

    #[test]
    fn sweep_single_entry_delegates() {
        let set = single_type_three();
        let sweep = a_sweep(&set, &[1.0], &[0.5]).unwrap();
        assert_eq!(sweep.rows.len(), 1);
        let direct = solve_entropy(&set, &[1.0], 0.5).unwrap();
        assert!((sweep.rows[0].objective - direct.objective).abs() < 1e-12);
        assert!(a_sweep(&set, &[1.0], &[]).is_err());
    }

    #[test]
    fn interior_points_are_feasible() {
        let set = single_type_three();
        let pts = random_feasible_points(&set, &[1.0], 5, 42).unwrap();
        for x in pts {
            assert!(x[1..].iter().all(|&v| v > 0.0));
            let load: f64 = (1..set.len())
                .map(|idx| set.member(idx).get(0) as f64 * x[idx])
                .sum();
            assert!((load - 1.0).abs() < 1e-10);
        }
    }
}
