//! Cross-scale behavior of the simulation-vs-fluid comparison: matching the
//! zero-server budget across scales (c = a * r), the occupied-fraction gap
//! shrinks as the scale grows, seed by seed in the majority.

mod common;

use common::{config, set_b};
use grand_core::{analysis, fluid, simulator, FluidState, Policy, SystemSpec};

#[test]
fn gap_shrinks_with_scale_for_matched_budgets() {
    let seeds = [1u64, 2, 3, 4, 5];
    let horizon = 10.0;

    let fluid_traj = |a: f64| {
        let spec = SystemSpec::new(
            set_b(),
            vec![0.5, 0.5],
            vec![1.0, 1.0],
            1.0,
            Policy::GrandAz(a),
        )
        .unwrap();
        let x0 = FluidState::from_pairs(spec.set(), &[(config(&[3, 3]), 1.0 / 6.0)]).unwrap();
        fluid::integrate(&x0, &spec, horizon, 1e-3, 0.01).unwrap()
    };
    let fluid_small = fluid_traj(1e-3); // matches c = 1 at r = 1000
    let fluid_large = fluid_traj(1e-4); // matches c = 1 at r = 10000

    let sup_gap = |r: f64, servers: u64, reference: &simulator::Trajectory, seed: u64| {
        let spec = SystemSpec::new(
            set_b(),
            vec![0.5, 0.5],
            vec![1.0, 1.0],
            r,
            Policy::GrandConst(1),
        )
        .unwrap();
        let init = vec![(config(&[3, 3]), servers)];
        let traj = simulator::run(&spec, &init, horizon, 0.01, seed).unwrap();
        analysis::compare_sim_fluid(&traj, reference).unwrap().sup
    };

    let mut wins = 0;
    for &seed in &seeds {
        let small = sup_gap(1000.0, 166, &fluid_small, seed);
        let large = sup_gap(10000.0, 1666, &fluid_large, seed);
        if large < small {
            wins += 1;
        }
    }
    assert!(
        wins * 2 > seeds.len(),
        "gap shrank for only {wins} of {} seeds",
        seeds.len()
    );
}
