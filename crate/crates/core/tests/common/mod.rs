#![allow(dead_code)]

use irate_core::{Edge, TransitionSystem};
use proptest::prelude::*;

/// A system on `1..=max_states` states with edges drawn from a 0/1 matrix
/// and optional labels from `labels` (`None` entries give ε-edges).
pub fn system(max_states: usize, labels: &'static [Option<&'static str>]) -> impl Strategy<Value = TransitionSystem> {
    (1..=max_states)
        .prop_flat_map(move |n| {
            (
                Just(n),
                proptest::collection::vec(0..=(labels.len().max(1) * 2), n * n),
                0..n,
                0..n,
            )
        })
        .prop_map(move |(n, cells, enter, exit)| {
            let states: Vec<String> = (0..n).map(|i| format!("q{i}")).collect();
            let mut edges = Vec::new();
            for (c, &v) in cells.iter().enumerate() {
                // roughly half of the cells hold an edge
                if v == 0 || v > labels.len().max(1) {
                    continue;
                }
                let label = labels.get(v - 1).copied().flatten().map(String::from);
                edges.push(Edge::new(c / n, c % n, label));
            }
            TransitionSystem::from_parts(states, enter, exit, edges).unwrap()
        })
}

pub fn unlabeled(max_states: usize) -> impl Strategy<Value = TransitionSystem> {
    system(max_states, &[None])
}

pub fn lambda(m: &TransitionSystem) -> f64 {
    irate_core::spectral_rate(m).unwrap().lambda
}
