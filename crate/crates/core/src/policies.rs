//! Zero-server functions and the random placement law.
//!
//! Every GRAND variant is defined by one choice: how many empty servers are
//! designated as *zero-servers* (eligible targets for the next arrival) as a
//! function of the current state. A type-`i` arrival then picks uniformly at
//! random among the zero-servers and the occupied servers that can still fit
//! it; if none exists it opens a fresh empty server.

use serde::{Deserialize, Serialize};

use crate::packing::ConfigSet;
use crate::{Error, Result};

/// The zero-server rule of a GRAND variant.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    /// `X_0 = ceil(a * Z)`; `a = 0` gives GRAND(0).
    GrandAz(f64),
    /// `X_0 = c` at all times.
    GrandConst(u64),
    /// `X_0 = ceil(Z^p)` with `0 < p < 1`.
    GrandPower(f64),
}

impl Policy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Policy::GrandAz(a) => {
                if a.is_finite() && a >= 0.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidSpec(format!(
                        "policy grand_az requires a >= 0, got {a}"
                    )))
                }
            }
            Policy::GrandConst(_) => Ok(()),
            Policy::GrandPower(p) => {
                if p > 0.0 && p < 1.0 {
                    Ok(())
                } else {
                    Err(Error::InvalidSpec(format!(
                        "policy grand_power requires 0 < p < 1, got {p}"
                    )))
                }
            }
        }
    }

    /// Number of zero-servers for a system currently holding `z` customers.
    pub fn zero_servers(&self, z: u64) -> u64 {
        match *self {
            Policy::GrandAz(a) => (a * z as f64).ceil() as u64,
            Policy::GrandConst(c) => c,
            Policy::GrandPower(p) => (z as f64).powf(p).ceil() as u64,
        }
    }

    /// The fluid parameter `a` when the policy has a fluid limit
    /// (GRAND(aZ) with `a > 0`).
    pub fn fluid_parameter(&self) -> Option<f64> {
        match *self {
            Policy::GrandAz(a) if a > 0.0 => Some(a),
            _ => None,
        }
    }

    pub fn label(&self) -> String {
        match *self {
            Policy::GrandAz(a) => format!("GRAND({a}Z)"),
            Policy::GrandConst(c) => format!("GRAND({c})"),
            Policy::GrandPower(p) => format!("GRAND(Z^{p})"),
        }
    }
}

/// Where an arriving customer goes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlacementTarget {
    /// One of the designated zero-servers (the server then holds `e_i`).
    ZeroServer,
    /// An occupied server currently in the member configuration at this index.
    Occupied(usize),
}

/// The placement law of one arrival: probabilities over eligible source
/// servers, or the fallback when no server is available.
#[derive(Clone, Debug)]
pub struct PlacementDistribution {
    /// `(source, probability)` pairs with positive probability, in canonical
    /// order (zero-servers first, then occupied configurations by index).
    pub entries: Vec<(PlacementTarget, f64)>,
    /// Set when `X_(i) = 0`: the customer opens a fresh empty server.
    pub fallback: bool,
    /// `X_(i)`, the number of servers available to this arrival.
    pub available: u64,
}

/// Enumerates `(target, weight)` pairs for a type-`i` arrival with positive
/// weight; weights are server counts. The zero-server entry comes first.
pub(crate) fn placement_weights(
    policy: Policy,
    set: &ConfigSet,
    counts: &[u64],
    z: u64,
    type_idx: usize,
) -> (u64, Vec<(PlacementTarget, u64)>) {
    let zero = policy.zero_servers(z);
    let mut total = zero;
    let mut entries = Vec::new();
    if zero > 0 {
        entries.push((PlacementTarget::ZeroServer, zero));
    }
    for &idx in set.fit(type_idx) {
        if idx == 0 {
            continue; // zero configuration handled through the policy count
        }
        let c = counts[idx];
        if c > 0 {
            entries.push((PlacementTarget::Occupied(idx), c));
            total += c;
        }
    }
    (total, entries)
}

/// The placement distribution of Definition 1 for a type-`i` arrival in state
/// `counts` (counts over all member indices, index 0 unused) with `z`
/// customers in total.
pub fn placement_distribution(
    policy: Policy,
    set: &ConfigSet,
    counts: &[u64],
    z: u64,
    type_idx: usize,
) -> PlacementDistribution {
    let (total, weights) = placement_weights(policy, set, counts, z, type_idx);
    if total == 0 {
        return PlacementDistribution {
            entries: Vec::new(),
            fallback: true,
            available: 0,
        };
    }
    let entries = weights
        .into_iter()
        .map(|(target, w)| (target, w as f64 / total as f64))
        .collect();
    PlacementDistribution {
        entries,
        fallback: false,
        available: total,
    }
}

/// Samples a placement target given a uniform draw `u` in `[0, 1)`.
///
/// This single categorical draw realizes the same law as repeatedly proposing
/// a uniformly random server until one fits.
pub(crate) fn sample_placement(
    policy: Policy,
    set: &ConfigSet,
    counts: &[u64],
    z: u64,
    type_idx: usize,
    u: f64,
) -> PlacementTarget {
    let (total, weights) = placement_weights(policy, set, counts, z, type_idx);
    if total == 0 {
        return PlacementTarget::ZeroServer; // fallback: fresh empty server
    }
    let mut threshold = u * total as f64;
    for (target, w) in &weights {
        threshold -= *w as f64;
        if threshold < 0.0 {
            return *target;
        }
    }
    weights.last().expect("non-empty weights").0
}
