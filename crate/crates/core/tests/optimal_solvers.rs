//! Cross-validation of the three operating-point solvers and the projection
//! distance, on the two reference systems.

mod common;

use common::{config, set_a, set_b, RHO};
use grand_core::{optimal, ConfigSet};

const MU: [f64; 2] = [1.0, 1.0];

fn load_residual(set: &ConfigSet, x: &[f64], rho: &[f64]) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..set.types() {
        let load: f64 = (1..set.len())
            .map(|idx| set.member(idx).get(i) as f64 * x[idx])
            .sum();
        worst = worst.max((load - rho[i]).abs());
    }
    worst
}

#[test]
fn lp_value_system_a_is_one_sixth() {
    let set = set_a();
    let lp = optimal::solve_lp(&set, &RHO).unwrap();
    assert!((lp.objective - 1.0 / 6.0).abs() < 1e-9);
    assert!(load_residual(&set, &lp.x, &RHO) < 1e-9);
    let total: f64 = lp.x[1..].iter().sum();
    assert!((total - lp.objective).abs() < 1e-12);
}

#[test]
fn lp_value_system_b_is_one_ninth() {
    let set = set_b();
    let lp = optimal::solve_lp(&set, &RHO).unwrap();
    assert!((lp.objective - 1.0 / 9.0).abs() < 1e-9);
    // the optimal set of system B is the single point with mass 1/18 on each
    // of (8,1) and (1,8)
    let c81 = set.index_of(&config(&[8, 1])).unwrap();
    let c18 = set.index_of(&config(&[1, 8])).unwrap();
    for idx in 1..set.len() {
        let expected = if idx == c81 || idx == c18 { 1.0 / 18.0 } else { 0.0 };
        assert!(
            (lp.x[idx] - expected).abs() < 1e-9,
            "x[{}] = {}",
            set.member(idx),
            lp.x[idx]
        );
    }
}

#[test]
fn lp_duals_certify_optimality() {
    for set in [set_a(), set_b()] {
        let lp = optimal::solve_lp(&set, &RHO).unwrap();
        let eta = lp.eta.as_ref().unwrap();
        assert!(eta.iter().all(|&e| e >= -1e-12), "eta must be non-negative");
        for idx in 1..set.len() {
            let weighted: f64 = (0..set.types())
                .map(|i| set.member(idx).get(i) as f64 * eta[i])
                .sum();
            assert!(weighted <= 1.0 + 1e-9, "dual feasibility at {}", set.member(idx));
            if lp.x[idx] > 1e-9 {
                assert!(
                    (weighted - 1.0).abs() < 1e-9,
                    "complementary slackness at {} (x={}, k.eta={})",
                    set.member(idx),
                    lp.x[idx],
                    weighted
                );
            }
        }
        // strong duality: rho . eta equals the optimal value
        let dual_value: f64 = RHO.iter().zip(eta).map(|(r, e)| r * e).sum();
        assert!((dual_value - lp.objective).abs() < 1e-9);
    }
}

#[test]
fn entropy_and_fixed_point_agree() {
    for set in [set_a(), set_b()] {
        for &a in &[1e-2, 1e-4] {
            let ent = optimal::solve_entropy(&set, &RHO, a).unwrap();
            let fp = optimal::solve_fixed_point(&set, &RHO, &MU, a).unwrap();
            let gap = ent
                .x
                .iter()
                .zip(&fp.x)
                .fold(0.0f64, |m, (p, q)| m.max((p - q).abs()));
            assert!(gap < 1e-8, "solvers disagree by {gap:.3e} at a={a}");

            // nu_i = 1 - ln(x_{e_i}) / ln(a) for both solvers
            for op in [&ent, &fp] {
                let nu = op.nu.as_ref().unwrap();
                for i in 0..set.types() {
                    let unit = set
                        .index_of(&grand_core::Configuration::unit(set.types(), i))
                        .unwrap();
                    let expected = 1.0 - op.x[unit].ln() / a.ln();
                    assert!(
                        ((nu[i] - expected) / expected.abs().max(1e-12)).abs() < 1e-10,
                        "nu[{i}] = {} vs {expected}",
                        nu[i]
                    );
                }
            }

            // hat_lambda_i = mu_i * a^(-nu_i)
            let hat = fp.hat_lambda.as_ref().unwrap();
            let nu = fp.nu.as_ref().unwrap();
            for i in 0..set.types() {
                let expected = MU[i] * a.powf(-nu[i]);
                assert!(((hat[i] - expected) / expected).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn entropy_feasibility_and_positivity() {
    for set in [set_a(), set_b()] {
        for &a in &[1e-2, 1e-6, 1e-9] {
            let op = optimal::solve_entropy(&set, &RHO, a).unwrap();
            assert!(load_residual(&set, &op.x, &RHO) < 1e-9);
            assert!(op.x[1..].iter().all(|&x| x > 0.0));
        }
    }
}

#[test]
fn entropy_product_form_identity() {
    // x_k * c_k = a^(1 - sum k_i nu_i), checked against the returned nu
    let set = set_b();
    let a = 1e-3;
    let op = optimal::solve_entropy(&set, &RHO, a).unwrap();
    let nu = op.nu.as_ref().unwrap();
    for idx in 1..set.len() {
        let weighted: f64 = (0..set.types())
            .map(|i| set.member(idx).get(i) as f64 * nu[i])
            .sum();
        let expected = a.powf(1.0 - weighted) / set.factorial_weight(idx);
        assert!(
            ((op.x[idx] - expected) / expected).abs() < 1e-8,
            "product form broken at {}",
            set.member(idx)
        );
    }
}

#[test]
fn objective_decreases_toward_lp_value() {
    let set = set_a();
    let sweep = optimal::a_sweep(&set, &RHO, &[1e-2, 1e-4, 1e-6, 1e-8]).unwrap();
    assert!(sweep.failures.is_empty());
    assert_eq!(sweep.rows.len(), 4);
    for pair in sweep.rows.windows(2) {
        assert!(pair[0].a > pair[1].a, "rows sorted by descending a");
        assert!(pair[1].objective < pair[0].objective, "objective decreasing");
        assert!(pair[1].distance < pair[0].distance, "distance decreasing");
    }
    for row in &sweep.rows {
        assert!(row.objective > sweep.lp_value);
    }
}

#[test]
fn multiplier_bound_in_sweep_tail() {
    // sum_i k_i nu_i exceeds 1 only by O(1/b): the excess times b stays
    // bounded by the largest ln(x_k c_k) over the optimal face.
    let set = set_a();
    let sweep = optimal::a_sweep(&set, &RHO, &[1e-8, 1e-9]).unwrap();
    for row in &sweep.rows {
        let b = -row.a.ln();
        for idx in 1..set.len() {
            let weighted: f64 = (0..set.types())
                .map(|i| set.member(idx).get(i) as f64 * row.nu[i])
                .sum();
            assert!(
                weighted <= 1.0 + 5.0 / b,
                "a={} config {} has k.nu = {weighted}",
                row.a,
                set.member(idx)
            );
        }
    }
}

#[test]
fn distance_examples() {
    // singleton optimal set with closed-form projection
    let set = ConfigSet::vector_packing(&[5.0], 10.0).unwrap();
    let mut x = vec![0.0; set.len()];
    x[1] = 1.0;
    let d = optimal::distance_to_optimal(&x, &set, &[1.0]).unwrap();
    assert!((d - 1.25f64.sqrt()).abs() < 1e-9);

    // a point of the optimal set is at distance zero
    let set = set_a();
    let lp = optimal::solve_lp(&set, &RHO).unwrap();
    let d = optimal::distance_to_optimal_with(&lp, &lp.x, &set, &RHO).unwrap();
    assert!(d < 1e-9);

    // smaller a lands closer to the optimal set
    let d2 = {
        let op = optimal::solve_entropy(&set, &RHO, 1e-2).unwrap();
        optimal::distance_to_optimal_with(&lp, &op.x, &set, &RHO).unwrap()
    };
    let d4 = {
        let op = optimal::solve_entropy(&set, &RHO, 1e-4).unwrap();
        optimal::distance_to_optimal_with(&lp, &op.x, &set, &RHO).unwrap()
    };
    assert!(d4 < d2);
}

#[test]
fn quadratic_oracle_single_type() {
    // K = {(0),(1),(2)}, rho = 1, mu = 1, a = 0.01. Substituting the product
    // form into the load constraint gives a u + a u^2 = 1 with u = hat_lambda,
    // solved independently here by the quadratic formula.
    let set = ConfigSet::vector_packing(&[5.0], 10.0).unwrap();
    let a = 0.01f64;
    let u = (-1.0 + (1.0 + 4.0 / a).sqrt()) / 2.0;

    let ent = optimal::solve_entropy(&set, &[1.0], a).unwrap();
    assert!((ent.x[1] - a * u).abs() < 1e-10);
    assert!((ent.x[2] - a * u * u / 2.0).abs() < 1e-10);

    let fp = optimal::solve_fixed_point(&set, &[1.0], &[1.0], a).unwrap();
    assert!((fp.hat_lambda.as_ref().unwrap()[0] - u).abs() < 1e-8);
}

#[test]
fn interior_points_feasible_and_positive() {
    let set = set_b();
    let points = optimal::random_feasible_points(&set, &RHO, 25, 7).unwrap();
    assert_eq!(points.len(), 25);
    for x in &points {
        assert!(x[1..].iter().all(|&v| v > 0.0));
        assert!(load_residual(&set, x, &RHO) < 1e-9);
    }
}
