//! Server configurations and the monotone feasible set.
//!
//! A configuration records how many customers of each type a single server
//! holds. The feasible set is *monotone*: removing customers from a feasible
//! server leaves it feasible. Everything downstream (placement, simulation,
//! fluid dynamics, optimization) works on one immutable [`ConfigSet`] built
//! either from one-dimensional vector-packing constraints or from an explicit
//! list of maximal configurations.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Safety cap on the number of materialized configurations.
const MAX_CONFIGS: usize = 1_000_000;

/// A server configuration: `counts[i]` customers of type `i` in one server.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Configuration {
    counts: Vec<u32>,
}

impl Configuration {
    pub fn new(counts: Vec<u32>) -> Self {
        Configuration { counts }
    }

    /// The zero configuration (empty server) over `types` customer types.
    pub fn zero(types: usize) -> Self {
        Configuration {
            counts: vec![0; types],
        }
    }

    /// The unit configuration `e_i`.
    pub fn unit(types: usize, type_idx: usize) -> Self {
        let mut counts = vec![0; types];
        counts[type_idx] = 1;
        Configuration { counts }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn types(&self) -> usize {
        self.counts.len()
    }

    pub fn get(&self, type_idx: usize) -> u32 {
        self.counts[type_idx]
    }

    pub fn is_zero(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }

    /// Total number of customers in the configuration.
    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    /// `k + e_i`.
    pub fn plus(&self, type_idx: usize) -> Self {
        let mut counts = self.counts.clone();
        counts[type_idx] += 1;
        Configuration { counts }
    }

    /// `k - e_i`, or `None` when `k_i = 0`.
    pub fn minus(&self, type_idx: usize) -> Option<Self> {
        if self.counts[type_idx] == 0 {
            return None;
        }
        let mut counts = self.counts.clone();
        counts[type_idx] -= 1;
        Some(Configuration { counts })
    }

    /// Component-wise `self <= other`.
    pub fn dominated_by(&self, other: &Self) -> bool {
        self.counts.len() == other.counts.len()
            && self.counts.iter().zip(&other.counts).all(|(a, b)| a <= b)
    }

    /// Product of factorials of the per-type counts.
    pub fn factorial_weight(&self) -> f64 {
        self.counts
            .iter()
            .map(|&c| (1..=c as u64).map(|v| v as f64).product::<f64>())
            .product()
    }
}

impl fmt::Display for Configuration {
    /// Renders counts joined by `-`, e.g. `(3, 3)` as `3-3`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for c in &self.counts {
            if !first {
                write!(f, "-")?;
            }
            write!(f, "{c}")?;
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self)
    }
}

impl FromStr for Configuration {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let counts = s
            .split('-')
            .map(|part| {
                part.trim()
                    .parse::<u32>()
                    .map_err(|e| Error::InvalidState(format!("bad configuration '{s}': {e}")))
            })
            .collect::<Result<Vec<u32>>>()?;
        if counts.is_empty() {
            return Err(Error::InvalidState("empty configuration string".into()));
        }
        Ok(Configuration { counts })
    }
}

/// A directed edge `(k - e_i, k)` of the configuration graph: placing a
/// type-`i` customer moves a server up the edge, a type-`i` departure moves it
/// down.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Edge {
    /// Index of `k` (always a non-zero member).
    pub upper: usize,
    /// Index of `k - e_i` (may be the zero configuration, index 0).
    pub lower: usize,
    /// The customer type moving along this edge.
    pub type_idx: usize,
    /// `k_i`, the multiplicity used in departure rates.
    pub count: u32,
}

/// The finite monotone set of feasible configurations, with every derived
/// structure the rest of the crate needs: canonical (lexicographic) indexing,
/// the up/down neighbor tables, the edge list and the per-type fit sets.
///
/// Index 0 is always the zero configuration; indices `1..len()` are the
/// non-zero members in lexicographic order. That order is the canonical one
/// used for every exported vector and file column.
#[derive(Clone, Debug)]
pub struct ConfigSet {
    types: usize,
    members: Vec<Configuration>,
    index: HashMap<Configuration, usize>,
    up: Vec<Vec<Option<usize>>>,
    down: Vec<Vec<Option<usize>>>,
    edges: Vec<Edge>,
    /// Per type `i`: indices of members (including 0) that can fit one more
    /// type-`i` customer, ascending.
    fit: Vec<Vec<usize>>,
    weight: Vec<f64>,
    ln_weight: Vec<f64>,
}

impl ConfigSet {
    /// Builds the feasible set `{k : sum_i k_i * sizes[i] <= capacity}` for a
    /// one-dimensional bin of the given capacity.
    pub fn vector_packing(sizes: &[f64], capacity: f64) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidConfigSet("no customer types given".into()));
        }
        if !(capacity > 0.0) {
            return Err(Error::InvalidConfigSet(format!(
                "capacity must be positive, got {capacity}"
            )));
        }
        for (i, &s) in sizes.iter().enumerate() {
            if !(s > 0.0) {
                return Err(Error::InvalidConfigSet(format!(
                    "size of type {i} must be positive, got {s}"
                )));
            }
            if s > capacity {
                return Err(Error::InvalidConfigSet(format!(
                    "type {i} has size {s} exceeding capacity {capacity}; it could never be served"
                )));
            }
        }

        let types = sizes.len();
        let mut members = Vec::new();
        let mut stack = vec![0u32; types];
        enumerate_vector_packing(sizes, capacity, 0, 0.0, &mut stack, &mut members)?;
        Self::finalize(types, members)
    }

    /// Builds the downward closure of an explicit set of maximal
    /// configurations.
    ///
    /// Dominated entries are tolerated (the closure is unaffected) but logged,
    /// since they usually indicate a mistake in the input.
    pub fn from_maximal(maximal: &[Configuration]) -> Result<Self> {
        if maximal.is_empty() {
            return Err(Error::InvalidConfigSet("empty maximal set".into()));
        }
        let types = maximal[0].types();
        if types == 0 {
            return Err(Error::InvalidConfigSet("zero-length configuration".into()));
        }
        for m in maximal {
            if m.types() != types {
                return Err(Error::InvalidConfigSet(format!(
                    "maximal configurations disagree on the number of types ({} vs {types})",
                    m.types()
                )));
            }
        }
        for (idx, m) in maximal.iter().enumerate() {
            if maximal
                .iter()
                .enumerate()
                .any(|(j, other)| j != idx && m != other && m.dominated_by(other))
            {
                log::warn!("maximal configuration {m} is dominated by another entry; keeping the union");
            }
        }
        for i in 0..types {
            if !maximal.iter().any(|m| m.get(i) >= 1) {
                return Err(Error::InvalidConfigSet(format!(
                    "unit configuration e_{} is not below any maximal configuration; type {} could never be served",
                    i + 1,
                    i + 1
                )));
            }
        }

        let bound: Vec<u32> = (0..types)
            .map(|i| maximal.iter().map(|m| m.get(i)).max().unwrap())
            .collect();
        let mut size_check = 1usize;
        for &b in &bound {
            size_check = size_check.saturating_mul(b as usize + 1);
            if size_check > MAX_CONFIGS {
                return Err(Error::InvalidConfigSet(format!(
                    "closure would exceed {MAX_CONFIGS} configurations"
                )));
            }
        }

        let mut members = Vec::new();
        let mut current = vec![0u32; types];
        loop {
            let candidate = Configuration::new(current.clone());
            if maximal.iter().any(|m| candidate.dominated_by(m)) {
                members.push(candidate);
            }
            // odometer over the bounding box
            let mut pos = types;
            loop {
                if pos == 0 {
                    return Self::finalize(types, members);
                }
                pos -= 1;
                if current[pos] < bound[pos] {
                    current[pos] += 1;
                    break;
                }
                current[pos] = 0;
            }
        }
    }

    fn finalize(types: usize, mut members: Vec<Configuration>) -> Result<Self> {
        members.sort();
        members.dedup();
        if members.len() > MAX_CONFIGS {
            return Err(Error::InvalidConfigSet(format!(
                "set has {} configurations, exceeding the {MAX_CONFIGS} cap",
                members.len()
            )));
        }
        debug_assert!(!members.is_empty() && members[0].is_zero());

        let index: HashMap<Configuration, usize> = members
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, c)| (c, i))
            .collect();

        let mut up = vec![vec![None; types]; members.len()];
        let mut down = vec![vec![None; types]; members.len()];
        let mut edges = Vec::new();
        let mut fit = vec![Vec::new(); types];
        for (idx, member) in members.iter().enumerate() {
            for i in 0..types {
                if let Some(target) = index.get(&member.plus(i)) {
                    up[idx][i] = Some(*target);
                    fit[i].push(idx);
                }
                if let Some(lower) = member.minus(i) {
                    let lower_idx = *index.get(&lower).ok_or_else(|| {
                        Error::InvalidConfigSet(format!(
                            "set is not monotone: {member} is a member but {lower} is not"
                        ))
                    })?;
                    down[idx][i] = Some(lower_idx);
                    edges.push(Edge {
                        upper: idx,
                        lower: lower_idx,
                        type_idx: i,
                        count: member.get(i),
                    });
                }
            }
        }
        edges.sort_by_key(|e| (e.upper, e.type_idx));

        let weight: Vec<f64> = members.iter().map(|m| m.factorial_weight()).collect();
        let ln_weight: Vec<f64> = weight.iter().map(|w| w.ln()).collect();

        for i in 0..types {
            if !index.contains_key(&Configuration::unit(types, i)) {
                return Err(Error::InvalidConfigSet(format!(
                    "unit configuration e_{} is missing; type {} could never be served",
                    i + 1,
                    i + 1
                )));
            }
        }

        Ok(ConfigSet {
            types,
            members,
            index,
            up,
            down,
            edges,
            fit,
            weight,
            ln_weight,
        })
    }

    /// Number of customer types `I`.
    pub fn types(&self) -> usize {
        self.types
    }

    /// Number of members including the zero configuration.
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Number of non-zero members.
    pub fn num_nonzero(&self) -> usize {
        self.members.len() - 1
    }

    pub fn member(&self, idx: usize) -> &Configuration {
        &self.members[idx]
    }

    pub fn members(&self) -> &[Configuration] {
        &self.members
    }

    pub fn index_of(&self, config: &Configuration) -> Option<usize> {
        self.index.get(config).copied()
    }

    pub fn contains(&self, config: &Configuration) -> bool {
        self.index.contains_key(config)
    }

    /// The edge set, sorted by (upper configuration index, type).
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Index of `k + e_i` when feasible.
    pub fn up(&self, idx: usize, type_idx: usize) -> Option<usize> {
        self.up[idx][type_idx]
    }

    /// Index of `k - e_i` when `k_i >= 1`.
    pub fn down(&self, idx: usize, type_idx: usize) -> Option<usize> {
        self.down[idx][type_idx]
    }

    /// Members (including the zero configuration) that can fit one more
    /// type-`i` customer, in ascending index order.
    pub fn fit(&self, type_idx: usize) -> &[usize] {
        &self.fit[type_idx]
    }

    /// `c_k`, the product of factorials of the counts.
    pub fn factorial_weight(&self, idx: usize) -> f64 {
        self.weight[idx]
    }

    /// `ln c_k`.
    pub fn ln_factorial_weight(&self, idx: usize) -> f64 {
        self.ln_weight[idx]
    }

    /// Members not dominated by any other member.
    pub fn maximal_members(&self) -> Vec<Configuration> {
        self.members
            .iter()
            .filter(|m| {
                !self
                    .members
                    .iter()
                    .any(|other| *m != other && m.dominated_by(other))
            })
            .cloned()
            .collect()
    }

    /// Column labels `x_<k>` for the non-zero members in canonical order.
    pub fn column_labels(&self) -> Vec<String> {
        self.members[1..]
            .iter()
            .map(|m| format!("x_{m}"))
            .collect()
    }
}

fn enumerate_vector_packing(
    sizes: &[f64],
    capacity: f64,
    type_idx: usize,
    used: f64,
    stack: &mut Vec<u32>,
    out: &mut Vec<Configuration>,
) -> Result<()> {
    if type_idx == sizes.len() {
        if out.len() >= MAX_CONFIGS {
            return Err(Error::InvalidConfigSet(format!(
                "set exceeds the {MAX_CONFIGS} configuration cap"
            )));
        }
        out.push(Configuration::new(stack.clone()));
        return Ok(());
    }
    let mut count = 0u32;
    loop {
        let total = used + count as f64 * sizes[type_idx];
        if total > capacity {
            break;
        }
        stack[type_idx] = count;
        enumerate_vector_packing(sizes, capacity, type_idx + 1, total, stack, out)?;
        count += 1;
    }
    stack[type_idx] = 0;
    Ok(())
}
