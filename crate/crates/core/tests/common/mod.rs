#![allow(dead_code)]

use lie_eqgnn::data::{synthetic_jets, JetEntry};
use lie_eqgnn::model::{JetGraph, Model, ModelConfig, Variant};

/// Synthetic jets capped at the default node limit.
pub fn jets(n_per_class: usize, seed: u64) -> Vec<JetEntry> {
    let mut out = synthetic_jets(n_per_class, seed).unwrap();
    for j in &mut out {
        j.truncate(16);
    }
    out
}

pub fn graphs(n_per_class: usize, seed: u64) -> Vec<JetGraph<f64>> {
    jets(n_per_class, seed).iter().map(|j| j.to_graph(true).unwrap()).collect()
}

/// Small jets keep the quantum variants fast in unit-scale tests.
pub fn small_graphs(n_per_class: usize, seed: u64, nodes: usize) -> Vec<JetGraph<f64>> {
    let mut out = synthetic_jets(n_per_class, seed).unwrap();
    out.iter_mut()
        .map(|j| {
            j.truncate(nodes);
            j.to_graph(true).unwrap()
        })
        .collect()
}

pub fn model(variant: Variant, seed: u64) -> Model<f64> {
    Model::new(ModelConfig::for_variant(variant), seed).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
