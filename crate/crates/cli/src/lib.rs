//! Scenario files in, CSV/JSON tables and trajectories out.
//!
//! A scenario is a single JSON object naming the configuration set, the
//! rates, the policy and the run parameters; every output file embeds the
//! fully resolved scenario (defaults applied, overrides folded in) so that a
//! result can always be regenerated from the file alone.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use grand_core::{
    analysis, fluid, optimal, simulator, ConfigSet, Configuration, FluidState, Policy, SystemSpec,
    Trajectory,
};

/// Default run horizon when a scenario omits it.
pub const DEFAULT_HORIZON: f64 = 15.0;
/// Default trajectory sampling interval.
pub const DEFAULT_SAMPLE_DT: f64 = 0.01;
/// Default ODE step for fluid integration.
pub const DEFAULT_ODE_DT: f64 = 1e-3;

/// Failures are split by exit code: scenario problems exit with 2, solver or
/// runtime problems with 3.
#[derive(Debug)]
pub enum CmdError {
    Validation(String),
    Runtime(String),
}

impl CmdError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CmdError::Validation(_) => 2,
            CmdError::Runtime(_) => 3,
        }
    }
}

impl fmt::Display for CmdError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CmdError::Validation(msg) => write!(f, "scenario error: {msg}"),
            CmdError::Runtime(msg) => write!(f, "runtime error: {msg}"),
        }
    }
}

impl std::error::Error for CmdError {}

fn validation(msg: impl Into<String>) -> CmdError {
    CmdError::Validation(msg.into())
}

fn runtime(err: grand_core::Error) -> CmdError {
    CmdError::Runtime(err.to_string())
}

fn io_error(path: &Path, err: std::io::Error) -> CmdError {
    CmdError::Runtime(format!("{}: {err}", path.display()))
}

pub type CmdResult<T> = std::result::Result<T, CmdError>;

/// How a scenario names its configuration set.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfigSetSpec {
    VectorPacking { sizes: Vec<f64>, capacity: f64 },
    Maximal(Vec<Vec<u32>>),
}

impl ConfigSetSpec {
    pub fn build(&self) -> CmdResult<ConfigSet> {
        let set = match self {
            ConfigSetSpec::VectorPacking { sizes, capacity } => {
                ConfigSet::vector_packing(sizes, *capacity)
            }
            ConfigSetSpec::Maximal(rows) => {
                let maximal: Vec<Configuration> =
                    rows.iter().map(|r| Configuration::new(r.clone())).collect();
                ConfigSet::from_maximal(&maximal)
            }
        };
        set.map_err(|e| validation(format!("config_set: {e}")))
    }
}

/// A run description. Which fields are required depends on the subcommand;
/// see the field comments and the README schema table.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub config_set: ConfigSetSpec,
    /// Normalized arrival rates, one per type (actual rates are `lambda * r`).
    pub lambda: Vec<f64>,
    /// Service rates, one per type.
    pub mu: Vec<f64>,
    /// Placement policy (simulate, compare, conjecture).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy: Option<Policy>,
    /// System scale (simulate, compare).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// Zero-server parameter for fluid runs and comparisons.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    /// Sweep values for `optimal` and multi-curve `fluid` runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_list: Option<Vec<f64>>,
    /// Initial state: configuration (rendered `k1-k2-...`) to server count
    /// (simulate/compare) or fluid mass (fluid).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub init: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_dt: Option<f64>,
    /// RK4 step for fluid integration.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ode_dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
    /// Averaging window start for steady-state estimates; defaults to
    /// two-thirds of the horizon.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<f64>,
    /// Scales for conjecture experiments.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_list: Option<Vec<f64>>,
    /// Rescale so that the offered loads sum to one.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub normalize: bool,
    /// Output directory; the `--out` flag overrides it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

impl Scenario {
    pub fn load(path: &Path) -> CmdResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| validation(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| validation(format!("{}: {e}", path.display())))
    }

    fn check_rates(&self, set: &ConfigSet) -> CmdResult<()> {
        if self.lambda.len() != set.types() {
            return Err(validation(format!(
                "lambda has {} entries but the configuration set has {} types",
                self.lambda.len(),
                set.types()
            )));
        }
        if self.mu.len() != set.types() {
            return Err(validation(format!(
                "mu has {} entries but the configuration set has {} types",
                self.mu.len(),
                set.types()
            )));
        }
        Ok(())
    }

    fn horizon(&self) -> f64 {
        self.horizon.unwrap_or(DEFAULT_HORIZON)
    }

    fn sample_dt(&self) -> f64 {
        self.sample_dt.unwrap_or(DEFAULT_SAMPLE_DT)
    }

    fn ode_dt(&self) -> f64 {
        self.ode_dt.unwrap_or(DEFAULT_ODE_DT)
    }

    fn burn_in(&self) -> f64 {
        self.burn_in.unwrap_or(self.horizon() * 2.0 / 3.0)
    }

    fn seeds(&self) -> Vec<u64> {
        self.seeds.clone().unwrap_or_else(|| vec![1])
    }

    fn policy(&self) -> CmdResult<Policy> {
        self.policy
            .ok_or_else(|| validation("policy: required for this command"))
    }

    fn scale(&self) -> CmdResult<f64> {
        self.r
            .ok_or_else(|| validation("r: required for this command"))
    }

    /// Resolves defaults and records a seed override, producing the scenario
    /// that output files will embed.
    pub fn resolved(&self, seed_override: Option<u64>, out: Option<&Path>) -> Scenario {
        let mut sc = self.clone();
        sc.horizon = Some(self.horizon());
        sc.sample_dt = Some(self.sample_dt());
        sc.ode_dt = Some(self.ode_dt());
        sc.burn_in = Some(self.burn_in());
        sc.seeds = Some(match seed_override {
            Some(s) => vec![s],
            None => self.seeds(),
        });
        if let Some(dir) = out {
            sc.out = Some(dir.to_path_buf());
        }
        sc
    }

    /// One-line JSON of the resolved scenario, embedded in every output.
    pub fn echo(&self) -> String {
        serde_json::to_string(self).expect("scenario serialization cannot fail")
    }

    fn parse_init_counts(&self, set: &ConfigSet) -> CmdResult<Vec<(Configuration, u64)>> {
        let mut init = Vec::new();
        for (key, &value) in &self.init {
            let config: Configuration = key
                .parse()
                .map_err(|e| validation(format!("init: {e}")))?;
            if config.types() != set.types() {
                return Err(validation(format!(
                    "init: configuration {config} has {} types, expected {}",
                    config.types(),
                    set.types()
                )));
            }
            if set.index_of(&config).is_none() {
                return Err(validation(format!("init: {config} is not feasible")));
            }
            if value < 0.0 || value.fract() != 0.0 {
                return Err(validation(format!(
                    "init: count for {config} must be a non-negative integer, got {value}"
                )));
            }
            init.push((config, value as u64));
        }
        Ok(init)
    }

    fn parse_init_masses(&self, set: &ConfigSet) -> CmdResult<FluidState> {
        let mut pairs = Vec::new();
        for (key, &value) in &self.init {
            let config: Configuration = key
                .parse()
                .map_err(|e| validation(format!("init: {e}")))?;
            if value < 0.0 {
                return Err(validation(format!(
                    "init: mass for {config} must be non-negative, got {value}"
                )));
            }
            pairs.push((config, value));
        }
        FluidState::from_pairs(set, &pairs).map_err(|e| validation(format!("init: {e}")))
    }

    fn system_spec(&self, r: f64, policy: Policy) -> CmdResult<SystemSpec> {
        let set = self.config_set.build()?;
        self.check_rates(&set)?;
        let spec = SystemSpec::new(set, self.lambda.clone(), self.mu.clone(), r, policy)
            .map_err(|e| validation(e.to_string()))?;
        Ok(if self.normalize { spec.normalized() } else { spec })
    }

    /// Offered loads, normalized when requested.
    fn rho(&self, set: &ConfigSet) -> CmdResult<Vec<f64>> {
        self.check_rates(set)?;
        let mut rho: Vec<f64> = self
            .lambda
            .iter()
            .zip(&self.mu)
            .map(|(l, m)| l / m)
            .collect();
        if self.normalize {
            let total: f64 = rho.iter().sum();
            for v in &mut rho {
                *v /= total;
            }
        }
        Ok(rho)
    }
}

fn ensure_dir(dir: &Path) -> CmdResult<()> {
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

fn write_json(path: &Path, value: &impl Serialize) -> CmdResult<()> {
    let file = fs::File::create(path).map_err(|e| io_error(path, e))?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), value)
        .map_err(|e| CmdError::Runtime(format!("{}: {e}", path.display())))?;
    Ok(())
}

fn write_trajectory(
    dir: &Path,
    stem: &str,
    set: &ConfigSet,
    traj: &Trajectory,
    scenario: &Scenario,
) -> CmdResult<Vec<PathBuf>> {
    let csv_path = dir.join(format!("{stem}.csv"));
    let file = fs::File::create(&csv_path).map_err(|e| io_error(&csv_path, e))?;
    let mut w = std::io::BufWriter::new(file);
    traj.write_csv(set, &mut w, Some(&format!("scenario: {}", scenario.echo())))
        .map_err(|e| io_error(&csv_path, e))?;
    w.flush().map_err(|e| io_error(&csv_path, e))?;

    #[derive(Serialize)]
    struct TrajectoryFile<'a> {
        scenario: &'a Scenario,
        configs: Vec<String>,
        trajectory: &'a Trajectory,
    }
    let json_path = dir.join(format!("{stem}.json"));
    write_json(
        &json_path,
        &TrajectoryFile {
            scenario,
            configs: set.members()[1..].iter().map(|m| m.to_string()).collect(),
            trajectory: traj,
        },
    )?;
    Ok(vec![csv_path, json_path])
}

/// Per-seed summary of a simulation run. The steady-state estimate is
/// omitted when the window past the burn-in is too short for batch means.
#[derive(Clone, Debug, Serialize)]
pub struct SeedSummary {
    pub seed: u64,
    pub steady: Option<analysis::SteadyStateEstimate>,
}

#[derive(Debug, Serialize)]
pub struct SimulateReport {
    pub scenario: Scenario,
    pub files: Vec<PathBuf>,
    pub seeds: Vec<SeedSummary>,
}

/// Simulates every seed of the scenario and writes one trajectory pair
/// (CSV + JSON) per seed plus a steady-state summary.
pub fn cmd_simulate(scenario: &Scenario, out: &Path, quiet: bool) -> CmdResult<SimulateReport> {
    let resolved = scenario.resolved(None, Some(out));
    let policy = resolved.policy()?;
    let r = resolved.scale()?;
    let spec = resolved.system_spec(r, policy)?;
    let init = resolved.parse_init_counts(spec.set())?;
    let seeds = resolved.seeds();
    if seeds.is_empty() {
        return Err(validation("seeds: at least one seed is required"));
    }
    ensure_dir(out)?;

    let trajectories = simulator::replicate(
        &spec,
        &init,
        resolved.horizon(),
        resolved.sample_dt(),
        &seeds,
    )
    .map_err(runtime)?;

    let mut files = Vec::new();
    let mut summaries = Vec::new();
    for (traj, &seed) in trajectories.iter().zip(&seeds) {
        files.extend(write_trajectory(
            out,
            &format!("traj_seed{seed}"),
            spec.set(),
            traj,
            &resolved,
        )?);
        let steady = match analysis::steady_state(traj, resolved.burn_in()) {
            Ok(est) => {
                if !quiet {
                    println!(
                        "seed {seed}: occupied {:.1} +/- {:.1}, Z {:.1}",
                        est.occupied.mean, est.occupied.std_err, est.z.mean
                    );
                }
                Some(est)
            }
            Err(e) => {
                log::warn!("seed {seed}: no steady-state estimate ({e})");
                None
            }
        };
        summaries.push(SeedSummary { seed, steady });
    }

    let report = SimulateReport {
        scenario: resolved,
        files,
        seeds: summaries,
    };
    let summary_path = out.join("summary.json");
    write_json(&summary_path, &report)?;
    Ok(report)
}

#[derive(Debug, Serialize)]
pub struct FluidRun {
    pub a: f64,
    pub final_occupied: f64,
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Serialize)]
pub struct FluidReport {
    pub scenario: Scenario,
    pub runs: Vec<FluidRun>,
}

/// Integrates the fluid ODE for each requested `a` and writes one trajectory
/// pair per curve.
pub fn cmd_fluid(scenario: &Scenario, out: &Path, quiet: bool) -> CmdResult<FluidReport> {
    let resolved = scenario.resolved(None, Some(out));
    let a_values: Vec<f64> = match (&resolved.a_list, resolved.a) {
        (Some(list), _) if !list.is_empty() => list.clone(),
        (_, Some(a)) => vec![a],
        _ => return Err(validation("a or a_list: required for fluid runs")),
    };
    let set = resolved.config_set.build()?;
    resolved.check_rates(&set)?;
    let x0 = resolved.parse_init_masses(&set)?;
    ensure_dir(out)?;

    let mut runs = Vec::new();
    for &a in &a_values {
        if !(a > 0.0 && a < 1.0) {
            return Err(validation(format!("a: must lie in (0, 1), got {a}")));
        }
        let spec = resolved.system_spec(1.0, Policy::GrandAz(a))?;
        let traj = fluid::integrate(
            &x0,
            &spec,
            resolved.horizon(),
            resolved.ode_dt(),
            resolved.sample_dt(),
        )
        .map_err(runtime)?;
        let stem = format!("fluid_a{a:e}");
        let files = write_trajectory(out, &stem, spec.set(), &traj, &resolved)?;
        let final_occupied = *traj.occupied.last().unwrap();
        if !quiet {
            println!("a = {a:e}: occupied({}) = {final_occupied:.6}", resolved.horizon());
        }
        runs.push(FluidRun {
            a,
            final_occupied,
            files,
        });
    }

    let report = FluidReport {
        scenario: resolved,
        runs,
    };
    write_json(&out.join("fluid_summary.json"), &report)?;
    Ok(report)
}

#[derive(Debug, Serialize)]
pub struct OptimalReport {
    pub scenario: Scenario,
    pub lp_value: f64,
    pub sweep: optimal::Sweep,
    pub files: Vec<PathBuf>,
}

/// Solves the occupied-servers LP and sweeps the entropy program over the
/// requested `a` values, writing the table as CSV and JSON.
pub fn cmd_optimal(scenario: &Scenario, out: &Path, quiet: bool) -> CmdResult<OptimalReport> {
    let resolved = scenario.resolved(None, Some(out));
    let set = resolved.config_set.build()?;
    let rho = resolved.rho(&set)?;
    let a_values: Vec<f64> = match (&resolved.a_list, resolved.a) {
        (Some(list), _) => list.clone(),
        (_, Some(a)) => vec![a],
        _ => Vec::new(),
    };
    if a_values.is_empty() {
        return Err(validation("a_list: required and non-empty for optimal runs"));
    }
    ensure_dir(out)?;

    let sweep = optimal::a_sweep(&set, &rho, &a_values).map_err(|e| match e {
        grand_core::Error::InvalidSpec(msg) => validation(msg),
        other => runtime(other),
    })?;
    if !quiet {
        println!("LP optimal value: {:.12}", sweep.lp_value);
        for row in &sweep.rows {
            println!(
                "a = {:e}: occupied {:.9}, distance to optimal set {:.6e}",
                row.a, row.objective, row.distance
            );
        }
    }

    let csv_path = out.join("sweep.csv");
    {
        let file = fs::File::create(&csv_path).map_err(|e| io_error(&csv_path, e))?;
        let mut w = std::io::BufWriter::new(file);
        (|| -> std::io::Result<()> {
            writeln!(w, "# scenario: {}", resolved.echo())?;
            write!(w, "a,objective,distance")?;
            for i in 1..=set.types() {
                write!(w, ",nu_{i}")?;
            }
            for label in set.column_labels() {
                write!(w, ",{label}")?;
            }
            writeln!(w)?;
            for row in &sweep.rows {
                write!(w, "{:e},{},{}", row.a, row.objective, row.distance)?;
                for nu in &row.nu {
                    write!(w, ",{nu}")?;
                }
                for idx in 1..set.len() {
                    write!(w, ",{}", row.x[idx])?;
                }
                writeln!(w)?;
            }
            w.flush()
        })()
        .map_err(|e| io_error(&csv_path, e))?;
    }

    let json_path = out.join("sweep.json");
    let report = OptimalReport {
        scenario: resolved,
        lp_value: sweep.lp_value,
        sweep,
        files: vec![csv_path, json_path.clone()],
    };
    write_json(&json_path, &report)?;
    Ok(report)
}

#[derive(Debug, Serialize)]
pub struct CompareReport {
    pub scenario: Scenario,
    pub seed: u64,
    pub sup_gap: f64,
    pub files: Vec<PathBuf>,
}

/// Runs one simulation (first seed) against the fluid path with the
/// scenario's `a`, on the same initial condition scaled by `1/r`, and
/// tabulates the occupied-fraction gaps.
pub fn cmd_compare(scenario: &Scenario, out: &Path, quiet: bool) -> CmdResult<CompareReport> {
    let resolved = scenario.resolved(None, Some(out));
    let policy = resolved.policy()?;
    let r = resolved.scale()?;
    let a = resolved
        .a
        .ok_or_else(|| validation("a: required for compare runs"))?;
    let spec = resolved.system_spec(r, policy)?;
    let init = resolved.parse_init_counts(spec.set())?;
    let seed = *resolved
        .seeds()
        .first()
        .ok_or_else(|| validation("seeds: at least one seed is required"))?;
    ensure_dir(out)?;

    let sim_traj = simulator::run(
        &spec,
        &init,
        resolved.horizon(),
        resolved.sample_dt(),
        seed,
    )
    .map_err(runtime)?;

    let fluid_spec = resolved.system_spec(1.0, Policy::GrandAz(a))?;
    let mass_pairs: Vec<(Configuration, f64)> = init
        .iter()
        .map(|(c, n)| (c.clone(), *n as f64 / r))
        .collect();
    let x0 = FluidState::from_pairs(fluid_spec.set(), &mass_pairs)
        .map_err(|e| validation(format!("init: {e}")))?;
    let fluid_traj = fluid::integrate(
        &x0,
        &fluid_spec,
        resolved.horizon(),
        resolved.ode_dt(),
        resolved.sample_dt(),
    )
    .map_err(runtime)?;

    let gaps = analysis::compare_sim_fluid(&sim_traj, &fluid_traj).map_err(runtime)?;
    if !quiet {
        println!("sup |occupied_sim/r - occupied_fluid| = {:.4}", gaps.sup);
    }

    let mut files = write_trajectory(out, "sim", spec.set(), &sim_traj, &resolved)?;
    files.extend(write_trajectory(
        out,
        "fluid",
        fluid_spec.set(),
        &fluid_traj,
        &resolved,
    )?);

    let csv_path = out.join("gap.csv");
    {
        let file = fs::File::create(&csv_path).map_err(|e| io_error(&csv_path, e))?;
        let mut w = std::io::BufWriter::new(file);
        (|| -> std::io::Result<()> {
            writeln!(w, "# scenario: {}", resolved.echo())?;
            writeln!(w, "t,sim,fluid,gap")?;
            for s in 0..gaps.times.len() {
                writeln!(
                    w,
                    "{},{},{},{}",
                    gaps.times[s], gaps.first[s], gaps.second[s], gaps.gaps[s]
                )?;
            }
            w.flush()
        })()
        .map_err(|e| io_error(&csv_path, e))?;
        files.push(csv_path);
    }

    let json_path = out.join("compare.json");
    files.push(json_path.clone());
    let report = CompareReport {
        scenario: resolved,
        seed,
        sup_gap: gaps.sup,
        files,
    };
    write_json(&json_path, &report)?;
    Ok(report)
}

#[derive(Debug, Serialize)]
pub struct ConjectureReport {
    pub scenario: Scenario,
    pub rows: Vec<analysis::ConjectureRow>,
    pub files: Vec<PathBuf>,
}

/// Sweeps the scale for a sublinear-zero-server policy and tabulates the
/// stationary distance to the LP optimal set. Descriptive output only.
pub fn cmd_conjecture(scenario: &Scenario, out: &Path, quiet: bool) -> CmdResult<ConjectureReport> {
    let resolved = scenario.resolved(None, Some(out));
    let policy = resolved.policy()?;
    if !analysis::is_conjecture_policy(policy) {
        return Err(validation(format!(
            "policy: conjecture experiments cover GRAND(0) and GRAND(Z^p), got {}",
            policy.label()
        )));
    }
    let r_list = resolved
        .r_list
        .clone()
        .filter(|l| !l.is_empty())
        .ok_or_else(|| validation("r_list: required and non-empty for conjecture runs"))?;
    let set = resolved.config_set.build()?;
    let rho = resolved.rho(&set)?;
    ensure_dir(out)?;

    let rows = analysis::conjecture_experiment(
        &set,
        &rho,
        &resolved.mu,
        policy,
        &r_list,
        &resolved.seeds(),
        resolved.horizon(),
        resolved.burn_in(),
        resolved.sample_dt(),
    )
    .map_err(runtime)?;

    if !quiet {
        for row in &rows {
            println!(
                "r = {}: mean distance {:.6} +/- {:.6} ({} seeds)",
                row.r, row.mean_distance, row.std_err, row.n_seeds
            );
        }
    }

    let csv_path = out.join("conjecture.csv");
    {
        let file = fs::File::create(&csv_path).map_err(|e| io_error(&csv_path, e))?;
        let mut w = std::io::BufWriter::new(file);
        (|| -> std::io::Result<()> {
            writeln!(w, "# scenario: {}", resolved.echo())?;
            writeln!(w, "r,mean_distance,std_err,n_seeds")?;
            for row in &rows {
                writeln!(
                    w,
                    "{},{},{},{}",
                    row.r, row.mean_distance, row.std_err, row.n_seeds
                )?;
            }
            w.flush()
        })()
        .map_err(|e| io_error(&csv_path, e))?;
    }

    let json_path = out.join("conjecture.json");
    let report = ConjectureReport {
        scenario: resolved,
        rows,
        files: vec![csv_path, json_path.clone()],
    };
    write_json(&json_path, &report)?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario_json() -> &'static str {
        r#"{
            "config_set": {"vector_packing": {"sizes": [2, 3], "capacity": 15}},
            "lambda": [0.5, 0.5],
            "mu": [1.0, 1.0],
            "policy": {"grand_az": 0.01},
            "r": 100,
            "init": {"1-1": 50},
            "horizon": 1.0,
            "sample_dt": 0.1,
            "seeds": [7]
        }"#
    }

    #[test]
    fn scenario_parses_and_resolves() {
        let sc: Scenario = serde_json::from_str(scenario_json()).unwrap();
        assert_eq!(sc.lambda.len(), 2);
        let resolved = sc.resolved(Some(9), Some(Path::new("/tmp/x")));
        assert_eq!(resolved.seeds, Some(vec![9]));
        assert_eq!(resolved.burn_in, Some(1.0 * 2.0 / 3.0));
        assert!(resolved.echo().contains("grand_az"));
    }

    #[test]
    fn unknown_fields_rejected() {
        let bad = scenario_json().replace("\"r\": 100", "\"r\": 100, \"typo_field\": 1");
        let err = serde_json::from_str::<Scenario>(&bad).unwrap_err();
        assert!(err.to_string().contains("typo_field"));
    }

    #[test]
    fn lambda_length_mismatch_names_field() {
        let bad = scenario_json().replace("[0.5, 0.5]", "[0.5]");
        let sc: Scenario = serde_json::from_str(&bad).unwrap();
        let err = cmd_simulate(&sc, Path::new("/tmp/grand-test-nonexistent"), true).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("lambda"));
    }

    #[test]
    fn infeasible_init_rejected() {
        let bad = scenario_json().replace("\"1-1\": 50", "\"9-9\": 50");
        let sc: Scenario = serde_json::from_str(&bad).unwrap();
        let err = cmd_simulate(&sc, Path::new("/tmp/grand-test-nonexistent"), true).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        assert!(err.to_string().contains("init"));
    }
}
