//! θ-information-rich components.
//!
//! A θ-IRC of `M` is a minimal reachable subgraph whose rate is at least
//! `θ·λ_M`. [`find_irc`] finds one by greedy edge deletion: every edge is
//! tried once, in canonical order; a deletion is kept when the rate of the
//! remaining graph (with `M`'s own entering and exit states) stays at or
//! above `θ·λ_M`, otherwise the edge is restored and never tried again.
//! The richest strongly connected component of what is left is returned.

use serde::Serialize;

use crate::error::IrcError;
use crate::rate::{spectral_radius_of_graph, spectral_rate, RateConfig};
use crate::scc::{is_trivial, scc_decompose};
use crate::system::{Edge, TransitionSystem};

/// Slack applied to every `λ ≥ θ·λ_M` comparison.
pub const RATE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Decision {
    Deleted,
    Restored,
}

/// A subgraph of an analyzed system, by state and edge index into it.
#[derive(Debug, Clone, PartialEq)]
pub struct RichComponent {
    pub kept_states: Vec<usize>,
    pub kept_edges: Vec<usize>,
    pub entry: usize,
    pub exit: usize,
    pub lambda_component: f64,
    pub theta: f64,
    /// Edge deletion decisions in the order they were made.
    pub trace_log: Vec<(usize, Decision)>,
    /// Rate computations performed by the deletion loop.
    pub rate_evaluations: usize,
}

impl RichComponent {
    /// The component as a standalone system whose state ids and edges are
    /// those of `parent`.
    pub fn to_system(&self, parent: &TransitionSystem) -> TransitionSystem {
        subsystem(parent, &self.kept_states, &self.kept_edges, self.entry, self.exit)
    }

    pub fn edges<'a>(&'a self, parent: &'a TransitionSystem) -> impl Iterator<Item = &'a Edge> + 'a {
        self.kept_edges.iter().map(move |&k| &parent.edges()[k])
    }
}

/// The states `states` and edges `edges` of `parent` (both in canonical
/// order) as their own system with the given terminals.
pub(crate) fn subsystem(
    parent: &TransitionSystem,
    states: &[usize],
    edges: &[usize],
    entry: usize,
    exit: usize,
) -> TransitionSystem {
    let mut local = vec![usize::MAX; parent.num_states()];
    let mut ids = Vec::with_capacity(states.len());
    for (i, &q) in states.iter().enumerate() {
        local[q] = i;
        ids.push(parent.state_id(q).to_string());
    }
    let edges = edges
        .iter()
        .map(|&k| {
            let e = &parent.edges()[k];
            Edge::new(local[e.from], local[e.to], e.label.clone())
        })
        .collect();
    TransitionSystem::from_parts(ids, local[entry], local[exit], edges)
        .expect("component of a valid system is valid")
}

pub(crate) fn check_theta(theta: f64) -> Result<(), IrcError> {
    if (0.0..=1.0).contains(&theta) {
        Ok(())
    } else {
        Err(IrcError::InvalidTheta(theta))
    }
}

/// Finds a θ-IRC of `system` by greedy edge deletion.
pub fn find_irc(system: &TransitionSystem, theta: f64) -> Result<RichComponent, IrcError> {
    check_theta(theta)?;
    let lambda = spectral_rate(system)?.lambda;
    if lambda == 0.0 && theta > 0.0 {
        return Err(IrcError::ZeroRate);
    }
    let threshold = theta * lambda;
    let m = system.num_edges();
    let mut present = vec![true; m];
    let mut trace_log = Vec::with_capacity(m);
    for k in 0..m {
        present[k] = false;
        let reduced = system.with_edges(|j| present[j]);
        if spectral_rate(&reduced)?.lambda >= threshold - RATE_EPS {
            trace_log.push((k, Decision::Deleted));
        } else {
            present[k] = true;
            trace_log.push((k, Decision::Restored));
        }
    }

    let remaining = system.with_edges(|j| present[j]);
    let config = RateConfig::default();
    let mut best: Option<(Vec<usize>, f64)> = None;
    for comp in scc_decompose(&remaining) {
        let rate = if is_trivial(&remaining, &comp) {
            0.0
        } else {
            let edges: Vec<usize> = component_edges(&remaining, &comp);
            let sub = subsystem(&remaining, &comp, &edges, comp[0], comp[0]);
            spectral_radius_of_graph(&sub, &config)?.lambda
        };
        // ties keep the component with the smallest state index
        if best.as_ref().is_none_or(|(_, r)| rate > *r + RATE_EPS) {
            best = Some((comp, rate));
        }
    }
    let (kept_states, lambda_component) = best.expect("a system has at least one state");
    let kept_edges: Vec<usize> = component_edges(system, &kept_states)
        .into_iter()
        .filter(|&k| present[k])
        .collect();
    let q = kept_states[0];
    Ok(RichComponent {
        kept_states,
        kept_edges,
        entry: q,
        exit: q,
        lambda_component,
        theta,
        trace_log,
        rate_evaluations: m,
    })
}

/// Edge indices with both endpoints in the sorted state set `comp`.
fn component_edges(system: &TransitionSystem, comp: &[usize]) -> Vec<usize> {
    system
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| comp.binary_search(&e.from).is_ok() && comp.binary_search(&e.to).is_ok())
        .map(|(k, _)| k)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IrcVerdict {
    pub rate_ok: bool,
    pub minimal: bool,
    /// First edge (canonical order) whose removal keeps the rate condition.
    pub witness: Option<usize>,
}

/// Checks the rate condition and single-edge minimality of `component`
/// against `system`.
pub fn verify_irc(
    system: &TransitionSystem,
    component: &RichComponent,
    theta: f64,
) -> Result<IrcVerdict, IrcError> {
    check_theta(theta)?;
    check_subgraph(system, component)?;
    let threshold = theta * spectral_rate(system)?.lambda;
    let sub = component.to_system(system);
    let rate_ok = spectral_rate(&sub)?.lambda >= threshold - RATE_EPS;
    let mut witness = None;
    for local in 0..sub.num_edges() {
        let reduced = sub.with_edges(|j| j != local);
        if spectral_rate(&reduced)?.lambda >= threshold - RATE_EPS {
            witness = Some(component.kept_edges[local]);
            break;
        }
    }
    Ok(IrcVerdict { rate_ok, minimal: witness.is_none(), witness })
}

fn check_subgraph(system: &TransitionSystem, c: &RichComponent) -> Result<(), IrcError> {
    let n = system.num_states();
    let sorted = |v: &[usize]| v.windows(2).all(|w| w[0] < w[1]);
    if !sorted(&c.kept_states) || !sorted(&c.kept_edges) {
        return Err(IrcError::NotSubgraph("state and edge lists must be strictly increasing".into()));
    }
    if let Some(&q) = c.kept_states.iter().find(|&&q| q >= n) {
        return Err(IrcError::NotSubgraph(format!("state #{q} does not exist")));
    }
    let has = |q: usize| c.kept_states.binary_search(&q).is_ok();
    for (what, q) in [("entry", c.entry), ("exit", c.exit)] {
        if !has(q) {
            return Err(IrcError::NotSubgraph(format!("{what} #{q} is not a kept state")));
        }
    }
    for &k in &c.kept_edges {
        let e = system
            .edges()
            .get(k)
            .ok_or_else(|| IrcError::NotSubgraph(format!("edge #{k} does not exist")))?;
        if !has(e.from) || !has(e.to) {
            return Err(IrcError::NotSubgraph(format!(
                "edge {} -> {} leaves the kept states",
                system.state_id(e.from),
                system.state_id(e.to)
            )));
        }
    }
    Ok(())
}
