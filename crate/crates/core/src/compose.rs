//! Sequential and nondeterministic-choice composition.

use crate::system::{fresh_id, Edge, TransitionSystem};

/// Fresh entering state of a choice composition.
pub const CHOICE_ENTER: &str = "⊞";
/// Fresh exit state of a choice composition.
pub const CHOICE_EXIT: &str = "⊠";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CompositionMode {
    /// `(M1; M2)`: an ε-edge from the exit of `M1` to the entering state of `M2`.
    Sequential,
    /// `(M1 □ M2)`: a fresh entering state branching into both systems and
    /// a fresh exit state joining both exits.
    Choice,
}

/// Composes two systems. When their state ids overlap, every id is
/// prefixed with `1:` or `2:`.
pub fn compose(m1: &TransitionSystem, m2: &TransitionSystem, mode: CompositionMode) -> TransitionSystem {
    match mode {
        CompositionMode::Sequential => sequential(m1, m2),
        CompositionMode::Choice => choice(m1, m2),
    }
}

fn disjoint_ids(m1: &TransitionSystem, m2: &TransitionSystem) -> (Vec<String>, Vec<String>) {
    let clash = m1.states().iter().any(|s| m2.state_index(s).is_some())
        || m1.enter_id() == m2.enter_id()
        || m1.exit_id() == m2.exit_id();
    if clash {
        (
            m1.states().iter().map(|s| format!("1:{s}")).collect(),
            m2.states().iter().map(|s| format!("2:{s}")).collect(),
        )
    } else {
        (m1.states().to_vec(), m2.states().to_vec())
    }
}

fn shifted(edges: &[Edge], by: usize) -> impl Iterator<Item = Edge> + '_ {
    edges
        .iter()
        .map(move |e| Edge::new(e.from + by, e.to + by, e.label.clone()))
}

fn sequential(m1: &TransitionSystem, m2: &TransitionSystem) -> TransitionSystem {
    let (Some(x1), Some(e2)) = (m1.exit(), m2.enter()) else {
        return TransitionSystem::empty(m1.enter_id(), m2.exit_id());
    };
    let (Some(e1), Some(x2)) = (m1.enter(), m2.exit()) else {
        return TransitionSystem::empty(m1.enter_id(), m2.exit_id());
    };
    let (s1, s2) = disjoint_ids(m1, m2);
    let off = s1.len();
    let states = s1.into_iter().chain(s2).collect();
    let mut edges: Vec<Edge> = m1.edges().to_vec();
    edges.extend(shifted(m2.edges(), off));
    edges.push(Edge::new(x1, e2 + off, None));
    TransitionSystem::from_parts(states, e1, x2 + off, edges).expect("composition is well formed")
}

fn choice(m1: &TransitionSystem, m2: &TransitionSystem) -> TransitionSystem {
    let (s1, s2) = disjoint_ids(m1, m2);
    let mut states: Vec<String> = s1.iter().chain(&s2).cloned().collect();
    let enter_id = fresh_id(&states, CHOICE_ENTER);
    states.insert(0, enter_id);
    let exit_id = fresh_id(&states, CHOICE_EXIT);
    states.push(exit_id);
    let exit = states.len() - 1;

    let mut edges: Vec<Edge> = Vec::new();
    for (m, off) in [(m1, 1), (m2, 1 + s1.len())] {
        if let (Some(e), Some(x)) = (m.enter(), m.exit()) {
            edges.push(Edge::new(0, e + off, None));
            edges.extend(shifted(m.edges(), off));
            edges.push(Edge::new(x + off, exit, None));
        }
    }
    TransitionSystem::from_parts(states, 0, exit, edges).expect("composition is well formed")
}
