//! Deterministic fluid-limit dynamics of GRAND(aZ) and its Lyapunov function.
//!
//! On the fluid scale the per-configuration masses `x_k` obey a balance ODE:
//! departures flow down each edge at rate `w_ki = k_i * mu_i * x_k`, arrivals
//! flow up at rate `v_ki = lambda_i * x_{k-e_i} / x_(i)`, where the zero
//! configuration carries the derived mass `x_0 = a * z`. The entropy-like
//! function
//!
//! ```text
//! L_a(x) = (-ln a)^-1 * sum_k x_k * ln(x_k * c_k / (e * a))
//! ```
//!
//! decreases along every trajectory; its drift `Xi` vanishes exactly at the
//! product-form equilibrium.

use crate::packing::ConfigSet;
use crate::packing::Configuration;
use crate::simulator::{SystemSpec, Trajectory, TrajectoryKind};
use crate::{Error, Result};

/// Abort threshold for negative components after an integration step.
const NEG_ABORT_TOL: f64 = 1e-9;
/// Substeps keep `h * lambda_i / x_(i)` at or below this number. The
/// placement fractions relax at rate `lambda_i / x_(i)`, which near
/// concentrated states (availability of order `a`) is far quicker than any
/// fixed step resolves; away from them the bound exceeds `dt` and plain
/// fixed-step integration proceeds.
const STABILITY_FRACTION: f64 = 0.5;
/// Smallest allowed substep, relative to `dt`.
const MIN_STEP_EXP: i32 = -40;
/// Cap on the total number of RK4 substeps in one integration run.
const MAX_SUBSTEPS: usize = 20_000_000;

/// Fluid masses over the configuration set; index 0 (zero configuration) is
/// kept at zero, the real zero-server mass being the derived `a * z`.
#[derive(Clone, Debug, PartialEq)]
pub struct FluidState {
    x: Vec<f64>,
}

impl FluidState {
    pub fn new(set: &ConfigSet, x: Vec<f64>) -> Result<Self> {
        if x.len() != set.len() {
            return Err(Error::InvalidState(format!(
                "state has {} entries for a set of {} configurations",
                x.len(),
                set.len()
            )));
        }
        if x[0] != 0.0 {
            return Err(Error::InvalidState(
                "index 0 is the zero configuration and must stay at zero".into(),
            ));
        }
        if let Some(bad) = x.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidState(format!(
                "negative or non-finite mass {bad}"
            )));
        }
        Ok(FluidState { x })
    }

    pub fn from_pairs(set: &ConfigSet, pairs: &[(Configuration, f64)]) -> Result<Self> {
        let mut x = vec![0.0; set.len()];
        for (config, mass) in pairs {
            let idx = set.index_of(config).ok_or_else(|| {
                Error::InvalidState(format!("configuration {config} is not feasible"))
            })?;
            if idx == 0 {
                return Err(Error::InvalidState(
                    "the zero configuration cannot carry mass".into(),
                ));
            }
            x[idx] += mass;
        }
        Self::new(set, x)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// `y_i = sum_k k_i x_k`.
    pub fn y(&self, set: &ConfigSet) -> Vec<f64> {
        let mut y = vec![0.0; set.types()];
        for idx in 1..set.len() {
            if self.x[idx] == 0.0 {
                continue;
            }
            for i in 0..set.types() {
                y[i] += set.member(idx).get(i) as f64 * self.x[idx];
            }
        }
        y
    }

    /// `z = sum_i y_i`.
    pub fn z(&self, set: &ConfigSet) -> f64 {
        (1..set.len())
            .map(|idx| set.member(idx).total() as f64 * self.x[idx])
            .sum()
    }

    /// `x_(i) = a z + sum over fitting non-zero configurations`.
    pub fn available(&self, set: &ConfigSet, a: f64, type_idx: usize) -> f64 {
        let mut avail = a * self.z(set);
        for &idx in set.fit(type_idx) {
            if idx != 0 {
                avail += self.x[idx];
            }
        }
        avail
    }

    /// Total occupied mass `sum_k x_k`.
    pub fn occupied(&self) -> f64 {
        self.x[1..].iter().sum()
    }
}

/// Per-edge arrival rates `v` and departure rates `w` at masses `x`
/// (possibly mid-integration, hence raw slices). When `x_(i) = 0` the whole
/// type-`i` arrival stream routes to fresh `e_i` servers.
fn edge_rates(set: &ConfigSet, spec: &SystemSpec, a: f64, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let types = set.types();
    let z: f64 = (1..set.len())
        .map(|idx| set.member(idx).total() as f64 * x[idx])
        .sum();
    let x0 = a * z;
    let mut avail = vec![x0; types];
    for (i, avail_i) in avail.iter_mut().enumerate() {
        for &idx in set.fit(i) {
            if idx != 0 {
                *avail_i += x[idx];
            }
        }
    }
    let unit_idx: Vec<usize> = (0..types)
        .map(|i| {
            set.index_of(&Configuration::unit(types, i))
                .expect("unit configurations are members")
        })
        .collect();

    let edges = set.edges();
    let mut v = vec![0.0; edges.len()];
    let mut w = vec![0.0; edges.len()];
    for (e_idx, edge) in edges.iter().enumerate() {
        let i = edge.type_idx;
        w[e_idx] = edge.count as f64 * spec.mu()[i] * x[edge.upper];
        if avail[i] > 0.0 {
            let source = if edge.lower == 0 { x0 } else { x[edge.lower] };
            v[e_idx] = spec.lambda()[i] * source / avail[i];
        } else if edge.upper == unit_idx[i] {
            v[e_idx] = spec.lambda()[i];
        }
    }
    (v, w)
}

fn drift_from_rates(set: &ConfigSet, v: &[f64], w: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; set.len()];
    for (e_idx, edge) in set.edges().iter().enumerate() {
        let net = v[e_idx] - w[e_idx];
        out[edge.upper] += net;
        if edge.lower != 0 {
            out[edge.lower] -= net;
        }
    }
    out
}

/// The balance ODE right-hand side `dx/dt` under GRAND(aZ); the policy in
/// `spec` must be GRAND(aZ) with `a > 0`.
pub fn drift(state: &FluidState, spec: &SystemSpec) -> Result<Vec<f64>> {
    let a = spec.policy().fluid_parameter().ok_or_else(|| {
        Error::InvalidSpec(format!(
            "fluid dynamics are defined for grand_az with a > 0, not {}",
            spec.policy().label()
        ))
    })?;
    let (v, w) = edge_rates(spec.set(), spec, a, state.x());
    Ok(drift_from_rates(spec.set(), &v, &w))
}

/// The entropy-like Lyapunov value `L_a(x)`, with `0 * ln 0 = 0`.
pub fn lyapunov(set: &ConfigSet, state: &FluidState, a: f64) -> Result<f64> {
    let b = check_a(a)?;
    let ln_a = a.ln();
    let mut sum = 0.0;
    for idx in 1..set.len() {
        let x = state.x()[idx];
        if x > 0.0 {
            sum += x * (x.ln() + set.ln_factorial_weight(idx) - 1.0 - ln_a);
        }
    }
    Ok(sum / b)
}

fn check_a(a: f64) -> Result<f64> {
    if !(a > 0.0) || a >= 1.0 || !a.is_finite() {
        return Err(Error::InvalidSpec(format!(
            "the Lyapunov scaling requires 0 < a < 1, got {a}"
        )));
    }
    Ok(-a.ln())
}

/// `d/dt L_a(x(t))` evaluated from the general edge expression
/// `Xi(x) = sum_(k,i) [v_ki - w_ki] [f(k) - f(k - e_i) 1{k - e_i != 0}]`
/// with `f(k) = (1/b) ln(x_k c_k / a)`. Returns `-inf` when some mass is
/// zero, which is the continuous extension.
pub fn lyapunov_derivative(state: &FluidState, spec: &SystemSpec, a: f64) -> Result<f64> {
    let b = check_a(a)?;
    let set = spec.set();
    if state.x()[1..].iter().any(|&x| x <= 0.0) {
        return Ok(f64::NEG_INFINITY);
    }
    let ln_a = a.ln();
    let f: Vec<f64> = (0..set.len())
        .map(|idx| {
            if idx == 0 {
                0.0
            } else {
                (state.x()[idx].ln() + set.ln_factorial_weight(idx) - ln_a) / b
            }
        })
        .collect();
    let (v, w) = edge_rates(set, spec, a, state.x());
    let mut xi = 0.0;
    for (e_idx, edge) in set.edges().iter().enumerate() {
        let lower_f = if edge.lower != 0 { f[edge.lower] } else { 0.0 };
        xi += (v[e_idx] - w[e_idx]) * (f[edge.upper] - lower_f);
    }
    Ok(xi)
}

/// The same derivative computed from the pairwise coupled-rate terms
/// `xi_{k,k',i}`; valid on the conservation polytope (where `x_0 = a`).
/// Exposed so the two routes can be checked against each other.
pub fn lyapunov_derivative_pairwise(state: &FluidState, spec: &SystemSpec, a: f64) -> Result<f64> {
    Ok(pairwise_terms(state, spec, a)?.into_iter().sum())
}

/// Contributions `xi_{k,k',i} + xi_{k',k,i}` of every unordered pair of
/// same-type edges. Each term is non-positive, vanishing only under detailed
/// balance of the pair; all of them vanish exactly at the equilibrium.
pub fn pairwise_terms(state: &FluidState, spec: &SystemSpec, a: f64) -> Result<Vec<f64>> {
    let b = check_a(a)?;
    let set = spec.set();
    if state.x()[1..].iter().any(|&x| x <= 0.0) {
        return Err(Error::InvalidState(
            "pairwise form requires strictly positive masses".into(),
        ));
    }
    let z = state.z(set);
    let x0 = a * z;
    let val = |idx: usize| -> f64 {
        if idx == 0 {
            x0
        } else {
            state.x()[idx]
        }
    };

    let edges = set.edges();
    let mut terms = Vec::new();
    for i in 0..set.types() {
        let avail = state.available(set, a, i);
        let edges_i: Vec<usize> = (0..edges.len())
            .filter(|&e| edges[e].type_idx == i)
            .collect();
        for (pos, &e) in edges_i.iter().enumerate() {
            for &e2 in &edges_i[pos..] {
                let (k, k2) = (edges[e], edges[e2]);
                let term = pair_term(
                    b,
                    spec.mu()[i],
                    avail,
                    k.count as f64,
                    val(k.upper),
                    val(k.lower),
                    k2.count as f64,
                    val(k2.upper),
                    val(k2.lower),
                );
                terms.push(term);
            }
        }
    }
    Ok(terms)
}

/// `xi_{k,k',i} + xi_{k',k,i}` for one ordered pair of same-type edges, using
/// masses `xu = x_k`, `xl = x_{k-e_i}` and primed counterparts.
#[allow(clippy::too_many_arguments)]
fn pair_term(
    b: f64,
    mu: f64,
    avail: f64,
    count: f64,
    xu: f64,
    xl: f64,
    count2: f64,
    xu2: f64,
    xl2: f64,
) -> f64 {
    // log(k'_i x_{k-e_i} x_{k'}) - log(k_i x_k x_{k'-e_i})
    let diff = (count2 * xl * xu2).ln() - (count * xu * xl2).ln();
    let forward = count * xu * xl2; // rate coupling departure on (k,i) with arrival on (k',i)
    let backward = count2 * xu2 * xl;
    (mu / (b * avail)) * diff * (forward - backward)
}

/// Integrates the fluid ODE with classical RK4 at fixed step `dt`, sampling
/// every `sample_dt` (a multiple of `dt`). Cumulative per-edge arrival and
/// departure flows are integrated alongside the masses.
///
/// Wherever some availability `x_(i)` is smaller than `dt` can resolve —
/// right after a concentrated initial state, or very close to the small-`a`
/// equilibrium — the step is shortened so that `h * lambda_i / x_(i)` stays
/// bounded; elsewhere the bound is slack and the integration is plain
/// fixed-step. Stage evaluations floor masses at zero; if a completed step
/// leaves a component below `-1e-9` the integrator aborts, and smaller
/// violations are clamped.
pub fn integrate(
    x0: &FluidState,
    spec: &SystemSpec,
    horizon: f64,
    dt: f64,
    sample_dt: f64,
) -> Result<Trajectory> {
    let a = spec.policy().fluid_parameter().ok_or_else(|| {
        Error::InvalidSpec(format!(
            "fluid dynamics are defined for grand_az with a > 0, not {}",
            spec.policy().label()
        ))
    })?;
    if horizon < 0.0 {
        return Err(Error::InvalidSpec(format!(
            "horizon must be non-negative, got {horizon}"
        )));
    }
    if !(dt > 0.0) || !(sample_dt > 0.0) {
        return Err(Error::InvalidSpec(format!(
            "step sizes must be positive (dt {dt}, sample_dt {sample_dt})"
        )));
    }
    let per_sample = (sample_dt / dt).round();
    if per_sample < 1.0 || (per_sample * dt - sample_dt).abs() > 1e-9 * sample_dt {
        return Err(Error::InvalidSpec(format!(
            "sample_dt {sample_dt} must be a positive multiple of dt {dt}"
        )));
    }
    let set = spec.set();
    if x0.x().len() != set.len() {
        return Err(Error::InvalidState(
            "initial state does not match the configuration set".into(),
        ));
    }

    let n_samples = (horizon / sample_dt + 1e-9).floor() as usize + 1;
    let n_edges = set.edges().len();
    let mut sim = Integrator {
        spec,
        a,
        x: x0.x().to_vec(),
        inflow: vec![0.0; n_edges],
        outflow: vec![0.0; n_edges],
        substeps: 0,
    };

    let mut traj = Trajectory {
        kind: TrajectoryKind::Fluid,
        r: 1.0,
        seed: None,
        sample_dt,
        times: Vec::with_capacity(n_samples),
        occupied: Vec::with_capacity(n_samples),
        z: Vec::with_capacity(n_samples),
        y: Vec::with_capacity(n_samples),
        x: Vec::with_capacity(n_samples),
        arrivals: Some(Vec::with_capacity(n_samples)),
        departures: Some(Vec::with_capacity(n_samples)),
    };
    sim.record(&mut traj, 0.0);

    for sample in 1..n_samples {
        let mut covered = 0.0;
        while sample_dt - covered > 1e-12 * sample_dt {
            let h = sim
                .stable_step(dt)
                .min(sample_dt - covered);
            sim.rk4_step(h)?;
            covered += h;
        }
        sim.record(&mut traj, sample as f64 * sample_dt);
    }
    Ok(traj)
}

struct Integrator<'a> {
    spec: &'a SystemSpec,
    a: f64,
    x: Vec<f64>,
    inflow: Vec<f64>,
    outflow: Vec<f64>,
    substeps: usize,
}

impl Integrator<'_> {
    /// Largest step the current availabilities can absorb, capped at `dt`.
    fn stable_step(&self, dt: f64) -> f64 {
        let set = self.spec.set();
        let z: f64 = (1..set.len())
            .map(|idx| set.member(idx).total() as f64 * self.x[idx].max(0.0))
            .sum();
        let x0 = self.a * z;
        let mut h = dt;
        for (i, &lambda) in self.spec.lambda().iter().enumerate() {
            if lambda <= 0.0 {
                continue;
            }
            let mut avail = x0;
            for &idx in set.fit(i) {
                if idx != 0 {
                    avail += self.x[idx].max(0.0);
                }
            }
            h = h.min(STABILITY_FRACTION * avail / lambda);
        }
        h.max(dt * 2f64.powi(MIN_STEP_EXP))
    }
    /// Vector field at (floored) masses: returns (dx, v, w).
    fn field(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let set = self.spec.set();
        let floored: Vec<f64> = x.iter().map(|&v| v.max(0.0)).collect();
        let (v, w) = edge_rates(set, self.spec, self.a, &floored);
        (drift_from_rates(set, &v, &w), v, w)
    }

    fn rk4_step(&mut self, h: f64) -> Result<()> {
        self.substeps += 1;
        if self.substeps > MAX_SUBSTEPS {
            return Err(Error::Integration(format!(
                "more than {MAX_SUBSTEPS} substeps; availabilities stay too small to resolve"
            )));
        }
        let n = self.x.len();
        let (k1, v1, w1) = self.field(&self.x);
        let stage2: Vec<f64> = (0..n).map(|j| self.x[j] + 0.5 * h * k1[j]).collect();
        let (k2, v2, w2) = self.field(&stage2);
        let stage3: Vec<f64> = (0..n).map(|j| self.x[j] + 0.5 * h * k2[j]).collect();
        let (k3, v3, w3) = self.field(&stage3);
        let stage4: Vec<f64> = (0..n).map(|j| self.x[j] + h * k3[j]).collect();
        let (k4, v4, w4) = self.field(&stage4);

        for j in 0..n {
            self.x[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        for e in 0..self.inflow.len() {
            self.inflow[e] += h / 6.0 * (v1[e] + 2.0 * v2[e] + 2.0 * v3[e] + v4[e]);
            self.outflow[e] += h / 6.0 * (w1[e] + 2.0 * w2[e] + 2.0 * w3[e] + w4[e]);
        }

        for (j, xv) in self.x.iter_mut().enumerate() {
            if *xv < 0.0 {
                if *xv < -NEG_ABORT_TOL {
                    return Err(Error::Integration(format!(
                        "mass of {} fell to {xv:.3e}; the step size {h:.3e} is too large",
                        self.spec.set().member(j)
                    )));
                }
                *xv = 0.0;
            }
        }
        Ok(())
    }

    fn record(&self, traj: &mut Trajectory, t: f64) {
        let set = self.spec.set();
        let state = FluidState { x: self.x.clone() };
        traj.times.push(t);
        traj.occupied.push(state.occupied());
        traj.z.push(state.z(set));
        traj.y.push(state.y(set));
        traj.x.push(self.x.clone());
        traj.arrivals.as_mut().unwrap().push(self.inflow.clone());
        traj.departures.as_mut().unwrap().push(self.outflow.clone());
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::policies::Policy;

    fn two_slot_spec(a: f64) -> SystemSpec {
        // K = {(0), (1)}; only zero-servers can take an arrival once a server
        // is occupied.
        let set = ConfigSet::vector_packing(&[1.0], 1.0).unwrap();
        SystemSpec::new(set, vec![1.0], vec![1.0], 1.0, Policy::GrandAz(a)).unwrap()
    }

    #[test]
    fn forced_equilibrium_single_type() {
        let spec = two_slot_spec(0.1);
        let state = FluidState::new(spec.set(), vec![0.0, 1.0]).unwrap();
        assert_eq!(state.z(spec.set()), 1.0);
        assert!((state.available(spec.set(), 0.1, 0) - 0.1).abs() < 1e-15);
        let d = drift(&state, &spec).unwrap();
        // inflow lambda * x0 / x_(1) = 1 exactly cancels outflow mu * x = 1
        assert!(d[1].abs() < 1e-14, "drift {d:?}");
    }

    #[test]
    fn drift_requires_fluid_policy() {
        let set = ConfigSet::vector_packing(&[1.0], 1.0).unwrap();
        let spec = SystemSpec::new(set, vec![1.0], vec![1.0], 1.0, Policy::GrandConst(1)).unwrap();
        let state = FluidState::new(spec.set(), vec![0.0, 0.5]).unwrap();
        assert!(drift(&state, &spec).is_err());
    }

    #[test]
    fn lyapunov_empty_sum() {
        let spec = two_slot_spec(0.5);
        let state = FluidState::new(spec.set(), vec![0.0, 0.0]).unwrap();
        assert_eq!(lyapunov(spec.set(), &state, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn lyapunov_single_type_closed_form() {
        // a = 1/e, x_(1) = a: the single term is a * ln(1/e) = -a, and b = 1.
        let a = (-1.0f64).exp();
        let spec = two_slot_spec(a);
        let state = FluidState::new(spec.set(), vec![0.0, a]).unwrap();
        let l = lyapunov(spec.set(), &state, a).unwrap();
        assert!((l - (-a)).abs() < 1e-15, "got {l}");
    }

    #[test]
    fn lyapunov_rejects_bad_a() {
        let spec = two_slot_spec(0.5);
        let state = FluidState::new(spec.set(), vec![0.0, 0.5]).unwrap();
        assert!(lyapunov(spec.set(), &state, 1.0).is_err());
        assert!(lyapunov(spec.set(), &state, 0.0).is_err());
        assert!(lyapunov(spec.set(), &state, -0.5).is_err());
    }

    #[test]
    fn derivative_sentinel_on_zero_mass() {
        let set = ConfigSet::vector_packing(&[5.0], 10.0).unwrap();
        let spec =
            SystemSpec::new(set, vec![1.0], vec![1.0], 1.0, Policy::GrandAz(0.01)).unwrap();
        let state = FluidState::new(spec.set(), vec![0.0, 1.0, 0.0]).unwrap();
        let xi = lyapunov_derivative(&state, &spec, 0.01).unwrap();
        assert_eq!(xi, f64::NEG_INFINITY);
    }

    #[test]
    fn zero_horizon_yields_initial_sample() {
        let spec = two_slot_spec(0.1);
        let state = FluidState::new(spec.set(), vec![0.0, 1.0]).unwrap();
        let traj = integrate(&state, &spec, 0.0, 1e-3, 0.01).unwrap();
        assert_eq!(traj.times, vec![0.0]);
        assert_eq!(traj.kind, TrajectoryKind::Fluid);
        assert_eq!(traj.x[0][1], 1.0);
    }

    #[test]
    fn sample_grid_must_align() {
        let spec = two_slot_spec(0.1);
        let state = FluidState::new(spec.set(), vec![0.0, 1.0]).unwrap();
        assert!(integrate(&state, &spec, 1.0, 3e-3, 0.01).is_err());
    }

    #[test]
    fn relaxation_of_per_type_totals() {
        // Off the conservation polytope, y_i(t) = rho_i + (y_i(0) - rho_i) e^{-mu_i t}.
        let set = ConfigSet::vector_packing(&[2.0, 3.0], 15.0).unwrap();
        let spec = SystemSpec::new(
            set,
            vec![0.5, 0.5],
            vec![1.0, 1.0],
            1.0,
            Policy::GrandAz(0.01),
        )
        .unwrap();
        let one_one = spec
            .set()
            .index_of(&Configuration::new(vec![1, 1]))
            .unwrap();
        let mut x = vec![0.0; spec.set().len()];
        x[one_one] = 0.2; // y = (0.2, 0.2), below rho = (0.5, 0.5)
        let state = FluidState::new(spec.set(), x).unwrap();
        let traj = integrate(&state, &spec, 2.0, 1e-3, 0.1).unwrap();
        for (s, &t) in traj.times.iter().enumerate() {
            for i in 0..2 {
                let expected = 0.5 + (0.2 - 0.5) * (-t).exp();
                assert!(
                    (traj.y[s][i] - expected).abs() < 1e-8,
                    "t={t} y={} expected={expected}",
                    traj.y[s][i]
                );
            }
        }
    }
}
