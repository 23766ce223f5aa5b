//! Shared builders for the two reference systems used across the test suite:
//! a one-dimensional vector-packing bin (capacity 15, item sizes 2 and 3) and
//! a non-vector-packing set with maximal configurations (8,1), (3,3), (1,8).
//! Both run with lambda = (1/2, 1/2) and unit service rates.
#![allow(dead_code)] // each test target uses a different subset

use grand_core::{ConfigSet, Configuration, Policy, SystemSpec};

pub const RHO: [f64; 2] = [0.5, 0.5];

pub fn set_a() -> ConfigSet {
    ConfigSet::vector_packing(&[2.0, 3.0], 15.0).unwrap()
}

pub fn set_b() -> ConfigSet {
    ConfigSet::from_maximal(&[
        Configuration::new(vec![8, 1]),
        Configuration::new(vec![3, 3]),
        Configuration::new(vec![1, 8]),
    ])
    .unwrap()
}

pub fn spec_a(r: f64, policy: Policy) -> SystemSpec {
    SystemSpec::new(set_a(), vec![0.5, 0.5], vec![1.0, 1.0], r, policy).unwrap()
}

pub fn spec_b(r: f64, policy: Policy) -> SystemSpec {
    SystemSpec::new(set_b(), vec![0.5, 0.5], vec![1.0, 1.0], r, policy).unwrap()
}

pub fn config(counts: &[u32]) -> Configuration {
    Configuration::new(counts.to_vec())
}
