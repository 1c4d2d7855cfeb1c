//! θ-information-rich input sets.
//!
//! An IRI is built around a θ-IRC: a fixed simple path `α` from the
//! entering state to the component, any walk `γ` inside the component, and
//! a fixed simple path `β` from the component to the exit. The input words
//! `w(αγβ)` of all such paths form the IRI, accepted by the automaton
//! `α ; IRC ; β` returned here.
//!
//! With an input language `L` (a DFA) the system is first restricted to the
//! paths that consume a word of `L` ([`build_constrained_path_automaton`]);
//! the IRI of that path automaton is then projected back onto input
//! symbols.
//!
//! Rates are always measured on paths. When several paths carry the same
//! word (ε-edges, repeated labels) the word-level rate can be lower.

use std::collections::{HashMap, HashSet, VecDeque};

use crate::error::{IrcError, IriError};
use crate::irc::{find_irc, RichComponent};
use crate::rate::spectral_rate;
use crate::system::{clean_with_origin, fresh_id, Edge, Label, TransitionSystem};

/// Automaton accepting a θ-IRI.
#[derive(Debug, Clone)]
pub struct IriAutomaton {
    /// Labeled automaton `α ; IRC ; β`.
    pub system: TransitionSystem,
    /// For each edge of `system`, the edge of the source system it copies.
    pub source_edges: Vec<usize>,
    /// Rate of `system`'s path graph.
    pub lambda_path: f64,
    /// The component, indexed into the system it was searched in (the path
    /// automaton in the constrained case).
    pub component: RichComponent,
    pub alpha_len: usize,
    pub beta_len: usize,
}

/// IRI of a labeled system `M`.
pub fn find_iri(system: &TransitionSystem, theta: f64) -> Result<IriAutomaton, IriError> {
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(IrcError::InvalidTheta(theta).into());
    }
    let component = find_irc(system, theta)?;
    let (enter, exit) = (
        system.enter().expect("positive rate implies a non-empty system"),
        system.exit().expect("positive rate implies a non-empty system"),
    );
    let alpha = shortest_path(system, enter, component.entry)
        .expect("component entry is reachable from the entering state");
    let beta = shortest_path(system, component.exit, exit)
        .expect("exit is reachable from the component exit");

    let mut states: Vec<String> = Vec::new();
    let mut edges: Vec<Edge> = Vec::new();
    let mut source_edges: Vec<usize> = Vec::new();

    // α copies, then the component, then β copies.
    for (i, &k) in alpha.iter().enumerate() {
        let q = system.edges()[k].from;
        let id = format!("α{i}:{}", system.state_id(q));
        states.push(fresh_id(&states, &id));
    }
    let comp_base = states.len();
    for &q in &component.kept_states {
        let id = system.state_id(q).to_string();
        states.push(fresh_id(&states, &id));
    }
    let beta_base = states.len();
    for (i, &k) in beta.iter().enumerate() {
        let q = system.edges()[k].to;
        let id = format!("β{}:{}", i + 1, system.state_id(q));
        states.push(fresh_id(&states, &id));
    }
    let local = |q: usize| {
        comp_base + component.kept_states.binary_search(&q).expect("state of the component")
    };
    let entry_local = local(component.entry);
    let exit_local = local(component.exit);

    for (i, &k) in alpha.iter().enumerate() {
        let to = if i + 1 == alpha.len() { entry_local } else { i + 1 };
        edges.push(Edge::new(i, to, system.edges()[k].label.clone()));
        source_edges.push(k);
    }
    for &k in &component.kept_edges {
        let e = &system.edges()[k];
        edges.push(Edge::new(local(e.from), local(e.to), e.label.clone()));
        source_edges.push(k);
    }
    for (i, &k) in beta.iter().enumerate() {
        let from = if i == 0 { exit_local } else { beta_base + i - 1 };
        edges.push(Edge::new(from, beta_base + i, system.edges()[k].label.clone()));
        source_edges.push(k);
    }
    let start = if alpha.is_empty() { entry_local } else { 0 };
    let end = if beta.is_empty() { exit_local } else { states.len() - 1 };
    let automaton = TransitionSystem::from_parts(states, start, end, edges)?;
    let lambda_path = spectral_rate(&automaton)?.lambda;
    Ok(IriAutomaton {
        system: automaton,
        source_edges,
        lambda_path,
        component,
        alpha_len: alpha.len(),
        beta_len: beta.len(),
    })
}

/// Shortest path from `from` to `to` as edge indices. Among shortest paths
/// the one whose state sequence is lexicographically smallest (by index)
/// is chosen; between parallel edges, the first in canonical order.
fn shortest_path(system: &TransitionSystem, from: usize, to: usize) -> Option<Vec<usize>> {
    let mut out = system.out_edges();
    for list in &mut out {
        list.sort_by_key(|&k| (system.edges()[k].to, k));
    }
    let mut parent: Vec<Option<usize>> = vec![None; system.num_states()];
    let mut seen = vec![false; system.num_states()];
    seen[from] = true;
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        if u == to {
            break;
        }
        for &k in &out[u] {
            let v = system.edges()[k].to;
            if !seen[v] {
                seen[v] = true;
                parent[v] = Some(k);
                queue.push_back(v);
            }
        }
    }
    if !seen[to] {
        return None;
    }
    let mut path = Vec::new();
    let mut cur = to;
    while cur != from {
        let k = parent[cur].expect("BFS tree edge");
        path.push(k);
        cur = system.edges()[k].from;
    }
    path.reverse();
    Some(path)
}

/// Checks that `dfa` has at most one edge per (state, symbol). ε-edges are
/// reported only when `allow_epsilon` is false.
fn check_deterministic(dfa: &TransitionSystem, allow_epsilon: bool) -> Result<(), IriError> {
    let mut seen: HashSet<(usize, &str)> = HashSet::new();
    for e in dfa.edges() {
        match e.label.as_deref() {
            None if !allow_epsilon => {
                return Err(IriError::EpsilonInLanguage(dfa.state_id(e.from).to_string()))
            }
            None => {}
            Some(a) if !seen.insert((e.from, a)) => {
                return Err(IriError::Nondeterministic {
                    state: dfa.state_id(e.from).to_string(),
                    symbol: a.to_string(),
                });
            }
            Some(_) => {}
        }
    }
    Ok(())
}

/// IRI of a regular language given by a deterministic automaton. ε-edges
/// are tolerated (they arise from merging several accepting states into
/// one exit); labels must otherwise be deterministic.
pub fn find_iri_language(language: &TransitionSystem, theta: f64) -> Result<IriAutomaton, IriError> {
    check_deterministic(language, true)?;
    if language.edges().iter().any(Edge::is_epsilon) {
        log::info!("language automaton carries ε-edges; treating them as exit normalization");
    }
    find_iri(language, theta)
}

/// Automaton over the paths of `M` that consume a word of `L`.
#[derive(Debug, Clone)]
pub struct PathAutomaton {
    /// Product automaton; each edge is labeled `e<k>/<symbol>` after the
    /// edge `k` of `M` it simulates.
    pub system: TransitionSystem,
    /// `(state of M, state of L)` per state of `system`.
    pub pairs: Vec<(usize, usize)>,
    /// The simulated edge of `M`, per edge of `system`.
    pub model_edges: Vec<usize>,
    /// Input symbol consumed, per edge of `system`.
    pub inputs: Vec<Label>,
}

/// Product of `M` with the DFA of `L`: an `M`-edge labeled `a` advances
/// `L` by `a`, an ε-edge leaves `L` in place. Accepting state is
/// `(exit of M, exit of L)`; the result is cleaned.
pub fn build_constrained_path_automaton(
    model: &TransitionSystem,
    language: &TransitionSystem,
) -> Result<PathAutomaton, IriError> {
    check_deterministic(language, false)?;
    let empty = || PathAutomaton {
        system: TransitionSystem::empty(
            format!("({},{})", model.enter_id(), language.enter_id()),
            format!("({},{})", model.exit_id(), language.exit_id()),
        ),
        pairs: Vec::new(),
        model_edges: Vec::new(),
        inputs: Vec::new(),
    };
    let (Some(me), Some(mx), Some(le), Some(lx)) =
        (model.enter(), model.exit(), language.enter(), language.exit())
    else {
        return Ok(empty());
    };
    let mut delta: HashMap<(usize, &str), usize> = HashMap::new();
    for e in language.edges() {
        delta.insert((e.from, e.label.as_deref().expect("ε-free")), e.to);
    }
    let out = model.out_edges();
    let start = (me, le);
    let mut ids = HashMap::from([(start, 0usize)]);
    let mut pairs = vec![start];
    let mut edges = Vec::new();
    let mut model_edges = Vec::new();
    let mut inputs = Vec::new();
    let mut queue = VecDeque::from([start]);
    while let Some(cur @ (m, l)) = queue.pop_front() {
        let from = ids[&cur];
        for &k in &out[m] {
            let e = &model.edges()[k];
            let next_l = match e.label.as_deref() {
                None => Some(l),
                Some(a) => delta.get(&(l, a)).copied(),
            };
            let Some(nl) = next_l else { continue };
            let next = (e.to, nl);
            let to = *ids.entry(next).or_insert_with(|| {
                pairs.push(next);
                queue.push_back(next);
                pairs.len() - 1
            });
            let tag = format!("e{k}/{}", e.label.as_deref().unwrap_or("ε"));
            edges.push(Edge::new(from, to, Some(tag)));
            model_edges.push(k);
            inputs.push(e.label.clone());
        }
    }
    let Some(&accept) = ids.get(&(mx, lx)) else {
        return Ok(empty());
    };
    // canonical order: states by (M state, L state), edges by (M edge, L state)
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by_key(|&i| pairs[i]);
    let mut rank = vec![0; pairs.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r;
    }
    let mut edge_order: Vec<usize> = (0..edges.len()).collect();
    edge_order.sort_by_key(|&k| (model_edges[k], pairs[edges[k].from].1));
    let edges: Vec<Edge> = edge_order
        .iter()
        .map(|&k| Edge::new(rank[edges[k].from], rank[edges[k].to], edges[k].label.clone()))
        .collect();
    let model_edges: Vec<usize> = edge_order.iter().map(|&k| model_edges[k]).collect();
    let inputs: Vec<Label> = edge_order.iter().map(|&k| inputs[k].clone()).collect();
    let pairs: Vec<(usize, usize)> = order.iter().map(|&i| pairs[i]).collect();
    let (start, accept) = (rank[0], rank[accept]);
    let mut names: Vec<String> = Vec::with_capacity(pairs.len());
    for &(m, l) in &pairs {
        let id = format!("({},{})", model.state_id(m), language.state_id(l));
        names.push(fresh_id(&names, &id));
    }
    let raw = TransitionSystem::from_parts(names, start, accept, edges)?;
    let (system, origin) = clean_with_origin(&raw);
    let pairs = system
        .states()
        .iter()
        .map(|id| pairs[raw.state_index(id).expect("cleaned state exists")])
        .collect();
    Ok(PathAutomaton {
        pairs,
        model_edges: origin.iter().map(|&k| model_edges[k]).collect(),
        inputs: origin.iter().map(|&k| inputs[k].clone()).collect(),
        system,
    })
}

/// IRI of `M` restricted to inputs from `L`, projected onto input symbols.
/// `source_edges` of the result refer to the edges of `M`.
pub fn find_iri_constrained(
    model: &TransitionSystem,
    language: &TransitionSystem,
    theta: f64,
) -> Result<IriAutomaton, IriError> {
    let paths = build_constrained_path_automaton(model, language)?;
    if paths.system.is_empty() {
        return Err(IriError::EmptyProduct);
    }
    let on_paths = find_iri(&paths.system, theta)?;
    let projected = on_paths
        .system
        .relabeled(|k, _| paths.inputs[on_paths.source_edges[k]].clone())?;
    let source_edges = on_paths.source_edges.iter().map(|&k| paths.model_edges[k]).collect();
    Ok(IriAutomaton { system: projected, source_edges, ..on_paths })
}
