//! Event-driven simulation of the placement Markov chain.
//!
//! The state records only the number of servers in each non-zero
//! configuration; zero-servers are a derived count, never identified servers.
//! Events are generated from competing exponential clocks over aggregate
//! rates (total arrivals, and the per-edge departure rates `X_k * k_i * mu_i`),
//! which is exact for the chain and avoids a per-customer event calendar.

use std::io::Write;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::packing::{ConfigSet, Configuration};
use crate::policies::{self, PlacementTarget, Policy};
use crate::{Error, Result};

/// A service system: configuration set, normalized rates, scale and policy.
#[derive(Clone, Debug)]
pub struct SystemSpec {
    set: ConfigSet,
    lambda: Vec<f64>,
    mu: Vec<f64>,
    rho: Vec<f64>,
    r: f64,
    policy: Policy,
}

impl SystemSpec {
    /// Validates and assembles a system. Arrival rates are per unit of scale
    /// (`Lambda_i = lambda_i * r`); a rate of zero disables arrivals of that
    /// type, which is occasionally useful in tests.
    pub fn new(
        set: ConfigSet,
        lambda: Vec<f64>,
        mu: Vec<f64>,
        r: f64,
        policy: Policy,
    ) -> Result<Self> {
        if lambda.len() != set.types() {
            return Err(Error::InvalidSpec(format!(
                "lambda has {} entries but the set has {} types",
                lambda.len(),
                set.types()
            )));
        }
        if mu.len() != set.types() {
            return Err(Error::InvalidSpec(format!(
                "mu has {} entries but the set has {} types",
                mu.len(),
                set.types()
            )));
        }
        for (i, &l) in lambda.iter().enumerate() {
            if !(l >= 0.0) || !l.is_finite() {
                return Err(Error::InvalidSpec(format!(
                    "lambda[{i}] must be a non-negative finite number, got {l}"
                )));
            }
        }
        for (i, &m) in mu.iter().enumerate() {
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::InvalidSpec(format!(
                    "mu[{i}] must be a positive finite number, got {m}"
                )));
            }
        }
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::InvalidSpec(format!(
                "scale r must be positive, got {r}"
            )));
        }
        policy.validate()?;
        let rho = lambda.iter().zip(&mu).map(|(l, m)| l / m).collect();
        Ok(SystemSpec {
            set,
            lambda,
            mu,
            rho,
            r,
            policy,
        })
    }

    pub fn set(&self) -> &ConfigSet {
        &self.set
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// Offered loads `rho_i = lambda_i / mu_i`.
    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn sum_rho(&self) -> f64 {
        self.rho.iter().sum()
    }

    /// Whether the offered loads are normalized to `sum rho_i = 1`.
    pub fn is_normalized(&self) -> bool {
        (self.sum_rho() - 1.0).abs() < 1e-12
    }

    /// Rescales so that `sum rho_i = 1` while keeping `lambda_i * r` fixed:
    /// `r <- r * sum(rho)`, `lambda <- lambda / sum(rho)`.
    pub fn normalized(mut self) -> Self {
        let s = self.sum_rho();
        self.r *= s;
        for l in &mut self.lambda {
            *l /= s;
        }
        for rho in &mut self.rho {
            *rho /= s;
        }
        self
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }
}

/// State of the chain: per-configuration server counts plus derived totals
/// and cumulative per-edge event counters.
#[derive(Clone, Debug)]
pub struct SimState {
    /// Server counts per member index; index 0 (zero configuration) unused.
    counts: Vec<u64>,
    /// Per-type customer totals `Y_i`.
    y: Vec<u64>,
    /// Total customers `Z`.
    z: u64,
    /// Current time.
    t: f64,
    /// Cumulative arrivals per edge, aligned with `ConfigSet::edges`.
    arrivals: Vec<u64>,
    /// Cumulative departures per edge.
    departures: Vec<u64>,
    /// Edge index lookup: `edge_of[member][type]`.
    edge_of: Vec<Vec<Option<usize>>>,
}

impl SimState {
    /// Builds the state at time zero from initial per-configuration counts.
    pub fn new(spec: &SystemSpec, init: &[(Configuration, u64)]) -> Result<Self> {
        let set = spec.set();
        let mut counts = vec![0u64; set.len()];
        for (config, n) in init {
            let idx = set.index_of(config).ok_or_else(|| {
                Error::InvalidState(format!("initial configuration {config} is not feasible"))
            })?;
            if idx == 0 {
                return Err(Error::InvalidState(
                    "the zero configuration cannot carry servers in the state".into(),
                ));
            }
            counts[idx] += n;
        }
        let mut y = vec![0u64; set.types()];
        for idx in 1..set.len() {
            for i in 0..set.types() {
                y[i] += counts[idx] * set.member(idx).get(i) as u64;
            }
        }
        let z = y.iter().sum();
        let mut edge_of = vec![vec![None; set.types()]; set.len()];
        for (e_idx, edge) in set.edges().iter().enumerate() {
            edge_of[edge.upper][edge.type_idx] = Some(e_idx);
        }
        Ok(SimState {
            counts,
            y,
            z,
            t: 0.0,
            arrivals: vec![0; set.edges().len()],
            departures: vec![0; set.edges().len()],
            edge_of,
        })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn y(&self) -> &[u64] {
        &self.y
    }

    pub fn z(&self) -> u64 {
        self.z
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Total number of occupied servers.
    pub fn occupied(&self) -> u64 {
        self.counts[1..].iter().sum()
    }

    pub fn arrivals(&self) -> &[u64] {
        &self.arrivals
    }

    pub fn departures(&self) -> &[u64] {
        &self.departures
    }

    /// Recomputes the derived totals and checks them against the stored ones.
    pub fn check_consistency(&self, set: &ConfigSet) -> Result<()> {
        let mut y = vec![0u64; set.types()];
        for idx in 1..set.len() {
            for i in 0..set.types() {
                y[i] += self.counts[idx] * set.member(idx).get(i) as u64;
            }
        }
        if y != self.y {
            return Err(Error::InvalidState(format!(
                "per-type totals drifted: stored {:?}, recomputed {:?}",
                self.y, y
            )));
        }
        let z: u64 = y.iter().sum();
        if z != self.z {
            return Err(Error::InvalidState(format!(
                "total customers drifted: stored {}, recomputed {z}",
                self.z
            )));
        }
        if self.occupied() > self.z {
            return Err(Error::InvalidState(format!(
                "occupied servers {} exceed customers {}",
                self.occupied(),
                self.z
            )));
        }
        Ok(())
    }

    /// Verifies the telescoping identity
    /// `X_k(t) - X_k(0) = sum_i (A_ki - D_ki) - sum_i (A_{k+e_i,i} - D_{k+e_i,i})`
    /// for every non-zero configuration.
    pub fn check_counter_identity(&self, set: &ConfigSet, initial: &[u64]) -> Result<()> {
        for idx in 1..set.len() {
            let mut net: i128 = 0;
            for i in 0..set.types() {
                if let Some(e) = self.edge_of[idx][i] {
                    net += self.arrivals[e] as i128 - self.departures[e] as i128;
                }
                if let Some(up) = set.up(idx, i) {
                    let e = self.edge_of[up][i].expect("edge for feasible upper neighbor");
                    net -= self.arrivals[e] as i128 - self.departures[e] as i128;
                }
            }
            let expected = initial[idx] as i128 + net;
            if expected != self.counts[idx] as i128 {
                return Err(Error::InvalidState(format!(
                    "counter identity broken at {}: expected {expected}, have {}",
                    set.member(idx),
                    self.counts[idx]
                )));
            }
        }
        Ok(())
    }
}

/// One transition of the chain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SimEvent {
    Arrival {
        type_idx: usize,
        target: PlacementTarget,
    },
    Departure {
        edge_idx: usize,
    },
}

fn total_departure_rate(state: &SimState, spec: &SystemSpec) -> f64 {
    spec.set()
        .edges()
        .iter()
        .map(|e| state.counts[e.upper] as f64 * e.count as f64 * spec.mu()[e.type_idx])
        .sum()
}

/// Draws the waiting time to the next event and the event itself, without
/// touching the state. Returns `None` when the total rate is zero.
fn draw_event<R: Rng>(state: &SimState, spec: &SystemSpec, rng: &mut R) -> Option<(f64, SimEvent)> {
    let set = spec.set();
    let arrival_rate: f64 = spec.lambda().iter().sum::<f64>() * spec.r();
    let departure_rate = total_departure_rate(state, spec);
    let total = arrival_rate + departure_rate;
    if total <= 0.0 {
        return None;
    }

    let wait = sample_exponential(rng, total);

    let event = if rng.gen::<f64>() * total < arrival_rate {
        // choose the arriving type proportionally to lambda
        let mut pick = rng.gen::<f64>() * arrival_rate;
        let mut type_idx = spec.lambda().len() - 1;
        for (i, &l) in spec.lambda().iter().enumerate() {
            pick -= l * spec.r();
            if pick < 0.0 {
                type_idx = i;
                break;
            }
        }
        let target = policies::sample_placement(
            spec.policy(),
            set,
            &state.counts,
            state.z,
            type_idx,
            rng.gen::<f64>(),
        );
        SimEvent::Arrival { type_idx, target }
    } else {
        let mut pick = rng.gen::<f64>() * departure_rate;
        let mut edge_idx = usize::MAX;
        for (e_idx, edge) in set.edges().iter().enumerate() {
            let rate =
                state.counts[edge.upper] as f64 * edge.count as f64 * spec.mu()[edge.type_idx];
            if rate == 0.0 {
                continue;
            }
            edge_idx = e_idx; // remember the last edge with positive rate
            pick -= rate;
            if pick < 0.0 {
                break;
            }
        }
        debug_assert!(edge_idx != usize::MAX);
        SimEvent::Departure { edge_idx }
    };
    Some((wait, event))
}

fn apply_event(state: &mut SimState, set: &ConfigSet, event: SimEvent) {
    match event {
        SimEvent::Arrival { type_idx, target } => apply_arrival(state, set, type_idx, target),
        SimEvent::Departure { edge_idx } => apply_departure(state, set, edge_idx),
    }
}

/// Advances the state by one event. Returns `None` when no event can occur
/// (zero total rate), leaving the state untouched.
pub fn step<R: Rng>(state: &mut SimState, spec: &SystemSpec, rng: &mut R) -> Option<SimEvent> {
    let (wait, event) = draw_event(state, spec, rng)?;
    state.t += wait;
    apply_event(state, spec.set(), event);

    #[cfg(debug_assertions)]
    state
        .check_consistency(spec.set())
        .expect("post-event state consistency");

    Some(event)
}

fn apply_arrival(state: &mut SimState, set: &ConfigSet, type_idx: usize, target: PlacementTarget) {
    let new_idx = match target {
        PlacementTarget::ZeroServer => set
            .index_of(&Configuration::unit(set.types(), type_idx))
            .expect("unit configurations are always members"),
        PlacementTarget::Occupied(source) => {
            state.counts[source] -= 1;
            set.up(source, type_idx)
                .expect("placement targets can fit the arrival")
        }
    };
    state.counts[new_idx] += 1;
    let e = state.edge_of[new_idx][type_idx].expect("edge below the new configuration");
    state.arrivals[e] += 1;
    state.y[type_idx] += 1;
    state.z += 1;
}

fn apply_departure(state: &mut SimState, set: &ConfigSet, edge_idx: usize) {
    let edge = set.edges()[edge_idx];
    debug_assert!(state.counts[edge.upper] > 0 && edge.count > 0);
    state.counts[edge.upper] -= 1;
    if edge.lower != 0 {
        state.counts[edge.lower] += 1;
    }
    state.departures[edge_idx] += 1;
    state.y[edge.type_idx] -= 1;
    state.z -= 1;
}

fn sample_exponential<R: Rng>(rng: &mut R, rate: f64) -> f64 {
    // inverse CDF; 1 - u avoids ln(0)
    -(1.0 - rng.gen::<f64>()).ln() / rate
}

/// What produced a trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryKind {
    Sim,
    Fluid,
}

/// A sampled trajectory on a fixed time grid.
///
/// For simulated systems `occupied`, `z` and `y` carry raw counts while `x`
/// is fluid-scaled (`X_k / r`); fluid trajectories use `r = 1`, making the two
/// representations coincide. Cumulative per-edge flow counters are recorded at
/// every sample so conservation identities can be checked after the fact.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Trajectory {
    pub kind: TrajectoryKind,
    pub r: f64,
    pub seed: Option<u64>,
    pub sample_dt: f64,
    pub times: Vec<f64>,
    pub occupied: Vec<f64>,
    pub z: Vec<f64>,
    /// `y[sample][type]`.
    pub y: Vec<Vec<f64>>,
    /// Fluid-scaled per-configuration values, `x[sample][member_idx]`;
    /// index 0 is kept at zero.
    pub x: Vec<Vec<f64>>,
    /// Cumulative arrivals per edge at each sample (raw counts for
    /// simulations, integrated rates for fluid paths).
    pub arrivals: Option<Vec<Vec<f64>>>,
    /// Cumulative departures per edge at each sample.
    pub departures: Option<Vec<Vec<f64>>>,
}

impl Trajectory {
    /// Occupied servers divided by the scale, per sample.
    pub fn occupied_fraction(&self) -> Vec<f64> {
        self.occupied.iter().map(|&o| o / self.r).collect()
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().unwrap_or(&0.0)
    }

    /// Writes the trajectory as CSV with header
    /// `t,occupied,Z,Y_1..Y_I,x_<k>...` (configurations in canonical order).
    /// An optional `# scenario: ...` comment line records provenance.
    pub fn write_csv<W: Write>(
        &self,
        set: &ConfigSet,
        mut w: W,
        comment: Option<&str>,
    ) -> std::io::Result<()> {
        if let Some(c) = comment {
            writeln!(w, "# {c}")?;
        }
        write!(w, "t,occupied,Z")?;
        for i in 1..=set.types() {
            write!(w, ",Y_{i}")?;
        }
        for label in set.column_labels() {
            write!(w, ",{label}")?;
        }
        writeln!(w)?;
        for s in 0..self.times.len() {
            write!(w, "{},{},{}", self.times[s], self.occupied[s], self.z[s])?;
            for i in 0..set.types() {
                write!(w, ",{}", self.y[s][i])?;
            }
            for idx in 1..set.len() {
                write!(w, ",{}", self.x[s][idx])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn record_sample(traj: &mut Trajectory, state: &SimState, t: f64, r: f64) {
    traj.times.push(t);
    traj.occupied.push(state.occupied() as f64);
    traj.z.push(state.z() as f64);
    traj.y.push(state.y().iter().map(|&v| v as f64).collect());
    traj.x
        .push(state.counts().iter().map(|&c| c as f64 / r).collect());
    traj.arrivals
        .as_mut()
        .unwrap()
        .push(state.arrivals().iter().map(|&v| v as f64).collect());
    traj.departures
        .as_mut()
        .unwrap()
        .push(state.departures().iter().map(|&v| v as f64).collect());
}

/// Runs one seeded replication, sampling the state every `sample_dt` up to
/// `horizon`. Deterministic: the same seed yields the identical trajectory.
pub fn run(
    spec: &SystemSpec,
    init: &[(Configuration, u64)],
    horizon: f64,
    sample_dt: f64,
    seed: u64,
) -> Result<Trajectory> {
    if horizon < 0.0 {
        return Err(Error::InvalidSpec(format!(
            "horizon must be non-negative, got {horizon}"
        )));
    }
    if !(sample_dt > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "sample_dt must be positive, got {sample_dt}"
        )));
    }
    let mut state = SimState::new(spec, init)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_samples = (horizon / sample_dt + 1e-9).floor() as usize + 1;

    let mut traj = Trajectory {
        kind: TrajectoryKind::Sim,
        r: spec.r(),
        seed: Some(seed),
        sample_dt,
        times: Vec::with_capacity(n_samples),
        occupied: Vec::with_capacity(n_samples),
        z: Vec::with_capacity(n_samples),
        y: Vec::with_capacity(n_samples),
        x: Vec::with_capacity(n_samples),
        arrivals: Some(Vec::with_capacity(n_samples)),
        departures: Some(Vec::with_capacity(n_samples)),
    };
    record_sample(&mut traj, &state, 0.0, spec.r());

    // The state is piecewise constant between events: before applying each
    // event, emit every sample that falls strictly before it.
    let mut next = 1usize;
    while next < n_samples {
        match draw_event(&state, spec, &mut rng) {
            None => break, // absorbed: the current state persists forever
            Some((wait, event)) => {
                let event_t = state.t + wait;
                while next < n_samples && (next as f64) * sample_dt < event_t {
                    record_sample(&mut traj, &state, next as f64 * sample_dt, spec.r());
                    next += 1;
                }
                if next == n_samples {
                    break;
                }
                state.t = event_t;
                apply_event(&mut state, spec.set(), event);
                #[cfg(debug_assertions)]
                state
                    .check_consistency(spec.set())
                    .expect("post-event state consistency");
            }
        }
    }
    while next < n_samples {
        record_sample(&mut traj, &state, next as f64 * sample_dt, spec.r());
        next += 1;
    }
    Ok(traj)
}

/// Independent seeded replications; results are ordered like `seeds` and do
/// not depend on scheduling.
pub fn replicate(
    spec: &SystemSpec,
    init: &[(Configuration, u64)],
    horizon: f64,
    sample_dt: f64,
    seeds: &[u64],
) -> Result<Vec<Trajectory>> {
    if seeds.is_empty() {
        return Err(Error::InvalidSpec("empty seed list".into()));
    }
    std::thread::scope(|scope| {
        let handles: Vec<_> = seeds
            .iter()
            .map(|&seed| scope.spawn(move || run(spec, init, horizon, sample_dt, seed)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("replication thread panicked"))
            .collect()
    })
}
