//! Steady-state estimation and trajectory comparisons.

use serde::{Deserialize, Serialize};

use crate::optimal;
use crate::packing::ConfigSet;
use crate::policies::Policy;
use crate::simulator::{self, SystemSpec, Trajectory};
use crate::{Error, Result};

/// Number of batches used for batch-means standard errors.
pub const NUM_BATCHES: usize = 10;

/// A time-average with its batch-means standard error.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub std_err: f64,
}

/// Steady-state estimates of the headline quantities of one trajectory.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SteadyStateEstimate {
    pub burn_in: f64,
    pub horizon: f64,
    pub window_samples: usize,
    pub occupied: Estimate,
    pub z: Estimate,
    pub y: Vec<Estimate>,
    /// Per-configuration estimates of the fluid-scaled masses, indexed like
    /// the configuration set.
    pub x: Vec<Estimate>,
}

fn estimate(values: &[f64]) -> Estimate {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    // contiguous batches of near-equal size
    let mut batch_means = Vec::with_capacity(NUM_BATCHES);
    let base = n / NUM_BATCHES;
    let extra = n % NUM_BATCHES;
    let mut start = 0;
    for b in 0..NUM_BATCHES {
        let len = base + usize::from(b < extra);
        let batch = &values[start..start + len];
        batch_means.push(batch.iter().sum::<f64>() / batch.len() as f64);
        start += len;
    }
    let bm = batch_means.iter().sum::<f64>() / NUM_BATCHES as f64;
    let var = batch_means
        .iter()
        .map(|m| (m - bm) * (m - bm))
        .sum::<f64>()
        / (NUM_BATCHES - 1) as f64;
    Estimate {
        mean,
        std_err: (var / NUM_BATCHES as f64).sqrt(),
    }
}

/// Time-averages every recorded quantity over `[burn_in, horizon]`.
///
/// The sampling grid is uniform, so the average is a time integral; it is
/// insensitive to the order of samples inside the window.
pub fn steady_state(traj: &Trajectory, burn_in: f64) -> Result<SteadyStateEstimate> {
    let horizon = traj.horizon();
    if burn_in < 0.0 || burn_in >= horizon {
        return Err(Error::Analysis(format!(
            "burn-in {burn_in} must lie inside the horizon {horizon}"
        )));
    }
    let window: Vec<usize> = (0..traj.times.len())
        .filter(|&s| traj.times[s] >= burn_in)
        .collect();
    if window.len() < NUM_BATCHES {
        return Err(Error::Analysis(format!(
            "only {} samples after burn-in; need at least {NUM_BATCHES} for batch means",
            window.len()
        )));
    }

    let collect = |f: &dyn Fn(usize) -> f64| -> Vec<f64> { window.iter().map(|&s| f(s)).collect() };
    let occupied = estimate(&collect(&|s| traj.occupied[s]));
    let z = estimate(&collect(&|s| traj.z[s]));
    let types = traj.y.first().map_or(0, |v| v.len());
    let y = (0..types)
        .map(|i| estimate(&collect(&|s| traj.y[s][i])))
        .collect();
    let n_configs = traj.x.first().map_or(0, |v| v.len());
    let x = (0..n_configs)
        .map(|idx| estimate(&collect(&|s| traj.x[s][idx])))
        .collect();

    Ok(SteadyStateEstimate {
        burn_in,
        horizon,
        window_samples: window.len(),
        occupied,
        z,
        y,
        x,
    })
}

/// Pointwise gaps between the occupied-server fractions of two trajectories.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GapReport {
    pub times: Vec<f64>,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
    pub gaps: Vec<f64>,
    pub sup: f64,
}

fn interpolate(times: &[f64], values: &[f64], t: f64) -> f64 {
    match times.binary_search_by(|probe| probe.total_cmp(&t)) {
        Ok(i) => values[i],
        Err(i) => {
            // guaranteed interior by the overlap restriction
            let (t0, t1) = (times[i - 1], times[i]);
            let w = (t - t0) / (t1 - t0);
            values[i - 1] * (1.0 - w) + values[i] * w
        }
    }
}

/// Compares the occupied-server fractions of two trajectories on the merged
/// time grid of their overlap. Symmetric in its arguments.
pub fn compare_sim_fluid(first: &Trajectory, second: &Trajectory) -> Result<GapReport> {
    let lo = first.times[0].max(second.times[0]);
    let hi = first.horizon().min(second.horizon());
    if lo > hi {
        return Err(Error::Analysis(format!(
            "trajectories do not overlap in time ([{} .. {}] vs [{} .. {}])",
            first.times[0],
            first.horizon(),
            second.times[0],
            second.horizon()
        )));
    }
    let mut grid: Vec<f64> = first
        .times
        .iter()
        .chain(second.times.iter())
        .copied()
        .filter(|&t| t >= lo && t <= hi)
        .collect();
    grid.sort_by(|p, q| p.total_cmp(q));
    grid.dedup_by(|p, q| (*p - *q).abs() < 1e-12);

    let f1 = first.occupied_fraction();
    let f2 = second.occupied_fraction();
    let mut a = Vec::with_capacity(grid.len());
    let mut b = Vec::with_capacity(grid.len());
    let mut gaps = Vec::with_capacity(grid.len());
    let mut sup = 0.0f64;
    for &t in &grid {
        let v1 = interpolate(&first.times, &f1, t);
        let v2 = interpolate(&second.times, &f2, t);
        let gap = (v1 - v2).abs();
        sup = sup.max(gap);
        a.push(v1);
        b.push(v2);
        gaps.push(gap);
    }
    Ok(GapReport {
        times: grid,
        first: a,
        second: b,
        gaps,
        sup,
    })
}

/// One row of a conjecture experiment: the average distance of the stationary
/// fluid-scaled state from the LP optimal set at a given scale.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConjectureRow {
    pub r: f64,
    pub mean_distance: f64,
    pub std_err: f64,
    pub n_seeds: usize,
}

/// Runs the sublinear-zero-server experiment: simulate GRAND(0) or
/// GRAND(Z^p) at each scale in `r_list`, estimate the stationary fluid-scaled
/// state, and tabulate its distance to the LP optimal set.
///
/// The table is descriptive; whether the distances shrink with scale is for
/// the reader to judge.
#[allow(clippy::too_many_arguments)]
pub fn conjecture_experiment(
    set: &ConfigSet,
    rho: &[f64],
    mu: &[f64],
    policy: Policy,
    r_list: &[f64],
    seeds: &[u64],
    horizon: f64,
    burn_in: f64,
    sample_dt: f64,
) -> Result<Vec<ConjectureRow>> {
    if !is_conjecture_policy(policy) {
        return Err(Error::InvalidSpec(format!(
            "conjecture experiments cover GRAND(0) and GRAND(Z^p); got {}",
            policy.label()
        )));
    }
    if r_list.is_empty() || seeds.is_empty() {
        return Err(Error::InvalidSpec(
            "conjecture experiments need at least one scale and one seed".into(),
        ));
    }
    let lambda: Vec<f64> = rho.iter().zip(mu).map(|(r, m)| r * m).collect();
    let lp = optimal::solve_lp(set, rho)?;

    let mut rows = Vec::with_capacity(r_list.len());
    for &r in r_list {
        let spec = SystemSpec::new(set.clone(), lambda.clone(), mu.to_vec(), r, policy)?;
        let trajs = simulator::replicate(&spec, &[], horizon, sample_dt, seeds)?;
        let mut distances = Vec::with_capacity(seeds.len());
        for traj in &trajs {
            let est = steady_state(traj, burn_in)?;
            let x_bar: Vec<f64> = est.x.iter().map(|e| e.mean).collect();
            distances.push(optimal::distance_to_optimal_with(&lp, &x_bar, set, rho)?);
        }
        let n = distances.len();
        let mean = distances.iter().sum::<f64>() / n as f64;
        let std_err = if n > 1 {
            let var = distances.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>()
                / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        rows.push(ConjectureRow {
            r,
            mean_distance: mean,
            std_err,
            n_seeds: n,
        });
    }
    Ok(rows)
}

/// Policies in the conjectured sublinear family.
pub fn is_conjecture_policy(policy: Policy) -> bool {
    matches!(
        policy,
        Policy::GrandAz(a) if a == 0.0
    ) || matches!(policy, Policy::GrandConst(0) | Policy::GrandPower(_))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::TrajectoryKind;

    fn constant_trajectory(value: f64, n: usize, r: f64) -> Trajectory {
        Trajectory {
            kind: TrajectoryKind::Sim,
            r,
            seed: Some(0),
            sample_dt: 0.1,
            times: (0..n).map(|i| i as f64 * 0.1).collect(),
            occupied: vec![value; n],
            z: vec![value; n],
            y: vec![vec![value]; n],
            x: vec![vec![0.0, value / r]; n],
            arrivals: None,
            departures: None,
        }
    }

    #[test]
    fn constant_trajectory_estimates_exactly() {
        let traj = constant_trajectory(7.0, 60, 1.0);
        let est = steady_state(&traj, 2.0).unwrap();
        assert_eq!(est.occupied.mean, 7.0);
        assert_eq!(est.occupied.std_err, 0.0);
        assert_eq!(est.z.mean, 7.0);
    }

    #[test]
    fn too_few_samples_rejected() {
        let traj = constant_trajectory(1.0, 12, 1.0);
        assert!(steady_state(&traj, 1.05).is_err());
        assert!(steady_state(&traj, 2.0).is_err()); // burn-in past horizon
    }

    #[test]
    fn identical_trajectories_have_zero_gap() {
        let traj = constant_trajectory(5.0, 40, 10.0);
        let report = compare_sim_fluid(&traj, &traj).unwrap();
        assert_eq!(report.sup, 0.0);
        assert!(report.gaps.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn comparison_is_symmetric() {
        let a = constant_trajectory(5.0, 40, 10.0);
        let mut b = constant_trajectory(6.0, 40, 10.0);
        b.occupied[10] = 9.0;
        let ab = compare_sim_fluid(&a, &b).unwrap();
        let ba = compare_sim_fluid(&b, &a).unwrap();
        assert_eq!(ab.sup, ba.sup);
        assert_eq!(ab.gaps, ba.gaps);
    }

    #[test]
    fn disjoint_ranges_error() {
        let a = constant_trajectory(1.0, 10, 1.0);
        let mut b = constant_trajectory(1.0, 10, 1.0);
        for t in b.times.iter_mut() {
            *t += 100.0;
        }
        assert!(compare_sim_fluid(&a, &b).is_err());
    }

    #[test]
    fn conjecture_policy_family() {
        assert!(is_conjecture_policy(Policy::GrandAz(0.0)));
        assert!(is_conjecture_policy(Policy::GrandConst(0)));
        assert!(is_conjecture_policy(Policy::GrandPower(0.5)));
        assert!(!is_conjecture_policy(Policy::GrandAz(0.1)));
        assert!(!is_conjecture_policy(Policy::GrandConst(1)));
    }
}
