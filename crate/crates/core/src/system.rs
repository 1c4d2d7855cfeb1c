//! Finite state transition systems.
//!
//! A [`TransitionSystem`] is a finite directed graph with one entering
//! state and one exit state. Edges optionally carry a label from a finite
//! alphabet; an absent label is the null symbol ε. The order of states and
//! edges in the source document is preserved and used as the tie-break
//! order by every algorithm in this crate.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ParseError;

/// Edge label; `None` is ε.
pub type Label = Option<String>;

/// A transition between two states, identified by internal index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub label: Label,
}

impl Edge {
    pub fn new(from: usize, to: usize, label: Label) -> Self {
        Edge { from, to, label }
    }

    pub fn is_epsilon(&self) -> bool {
        self.label.is_none()
    }
}

/// A finite state transition system `⟨states, edges, enter, exit⟩`.
///
/// States are opaque string ids; internally they are indexed by their
/// position in [`states`](Self::states). A system with no states is the
/// *empty* system: cleaning produces it when the exit cannot be reached
/// from the entering state. The enter/exit ids are remembered even then so
/// that diagnostics stay readable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransitionSystem {
    states: Vec<String>,
    index: HashMap<String, usize>,
    enter_id: String,
    exit_id: String,
    edges: Vec<Edge>,
}

impl TransitionSystem {
    /// Builds a validated system from state ids and `(from, to, label)`
    /// triples given by id.
    pub fn new<S, E>(
        states: impl IntoIterator<Item = S>,
        enter: &str,
        exit: &str,
        edges: impl IntoIterator<Item = (E, E, Label)>,
    ) -> Result<Self, ParseError>
    where
        S: Into<String>,
        E: AsRef<str>,
    {
        let states: Vec<String> = states.into_iter().map(Into::into).collect();
        let index = index_states(&states)?;
        let lookup = |id: &str| {
            index
                .get(id)
                .copied()
                .ok_or_else(|| ParseError::UnknownState(id.to_string()))
        };
        lookup(enter)?;
        lookup(exit)?;
        let mut resolved = Vec::new();
        for (from, to, label) in edges {
            resolved.push(Edge::new(lookup(from.as_ref())?, lookup(to.as_ref())?, label));
        }
        Self::from_indexed(states, index, enter.to_string(), exit.to_string(), resolved)
    }

    /// Builds a system from already-indexed edges. `enter` and `exit` are
    /// indices into `states`.
    pub fn from_parts(
        states: Vec<String>,
        enter: usize,
        exit: usize,
        edges: Vec<Edge>,
    ) -> Result<Self, ParseError> {
        let index = index_states(&states)?;
        let n = states.len();
        for &i in &[enter, exit] {
            if i >= n {
                return Err(ParseError::UnknownState(format!("#{i}")));
            }
        }
        for e in &edges {
            if e.from >= n || e.to >= n {
                return Err(ParseError::UnknownState(format!("#{}", e.from.max(e.to))));
            }
        }
        let enter_id = states[enter].clone();
        let exit_id = states[exit].clone();
        Self::from_indexed(states, index, enter_id, exit_id, edges)
    }

    fn from_indexed(
        states: Vec<String>,
        index: HashMap<String, usize>,
        enter_id: String,
        exit_id: String,
        edges: Vec<Edge>,
    ) -> Result<Self, ParseError> {
        let mut seen = HashSet::with_capacity(edges.len());
        for e in &edges {
            if !seen.insert((e.from, e.to, e.label.as_deref())) {
                return Err(ParseError::DuplicateEdge {
                    from: states[e.from].clone(),
                    to: states[e.to].clone(),
                    label: e.label.clone(),
                });
            }
        }
        Ok(TransitionSystem { states, index, enter_id, exit_id, edges })
    }

    /// The empty system: no states, no edges, no enter→exit path.
    pub fn empty(enter_id: impl Into<String>, exit_id: impl Into<String>) -> Self {
        TransitionSystem {
            states: Vec::new(),
            index: HashMap::new(),
            enter_id: enter_id.into(),
            exit_id: exit_id.into(),
            edges: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn state_id(&self, i: usize) -> &str {
        &self.states[i]
    }

    pub fn state_index(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Index of the entering state, `None` for the empty system.
    pub fn enter(&self) -> Option<usize> {
        self.state_index(&self.enter_id)
    }

    /// Index of the exit state, `None` for the empty system.
    pub fn exit(&self) -> Option<usize> {
        self.state_index(&self.exit_id)
    }

    pub fn enter_id(&self) -> &str {
        &self.enter_id
    }

    pub fn exit_id(&self) -> &str {
        &self.exit_id
    }

    /// The non-ε labels present, sorted.
    pub fn alphabet(&self) -> BTreeSet<&str> {
        self.edges.iter().filter_map(|e| e.label.as_deref()).collect()
    }

    /// True when every edge is ε.
    pub fn is_unlabeled(&self) -> bool {
        self.edges.iter().all(Edge::is_epsilon)
    }

    /// Outgoing edge indices per state, in canonical edge order.
    pub fn out_edges(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.states.len()];
        for (k, e) in self.edges.iter().enumerate() {
            out[e.from].push(k);
        }
        out
    }

    /// Adjacency matrix with edge multiplicities (parallel labeled edges
    /// each count once).
    pub fn adjacency(&self) -> Vec<Vec<f64>> {
        let n = self.states.len();
        let mut a = vec![vec![0.0; n]; n];
        for e in &self.edges {
            a[e.from][e.to] += 1.0;
        }
        a
    }

    /// The same states with only the edges whose index is in `keep`.
    pub fn with_edges(&self, keep: impl Fn(usize) -> bool) -> TransitionSystem {
        let edges = self
            .edges
            .iter()
            .enumerate()
            .filter(|(k, _)| keep(*k))
            .map(|(_, e)| e.clone())
            .collect();
        TransitionSystem { edges, ..self.clone() }
    }

    /// Same graph with a different entering and exit state.
    pub fn with_terminals(&self, enter: usize, exit: usize) -> TransitionSystem {
        TransitionSystem {
            enter_id: self.states[enter].clone(),
            exit_id: self.states[exit].clone(),
            ..self.clone()
        }
    }

    /// Same graph with every edge label replaced by `relabel(edge_index)`.
    pub fn relabeled(
        &self,
        relabel: impl Fn(usize, &Edge) -> Label,
    ) -> Result<TransitionSystem, ParseError> {
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(k, e)| Edge::new(e.from, e.to, relabel(k, e)))
            .collect();
        Self::from_indexed(
            self.states.clone(),
            self.index.clone(),
            self.enter_id.clone(),
            self.exit_id.clone(),
            edges,
        )
    }

    /// Induced subsystem on the states selected by `keep`, preserving
    /// state and edge order. Returns the subsystem and, for each of its
    /// edges, the index of the originating edge.
    pub fn induced(&self, keep: &[bool]) -> (TransitionSystem, Vec<usize>) {
        let mut remap = vec![usize::MAX; self.states.len()];
        let mut states = Vec::new();
        for (i, id) in self.states.iter().enumerate() {
            if keep[i] {
                remap[i] = states.len();
                states.push(id.clone());
            }
        }
        let mut edges = Vec::new();
        let mut origin = Vec::new();
        for (k, e) in self.edges.iter().enumerate() {
            if keep[e.from] && keep[e.to] {
                edges.push(Edge::new(remap[e.from], remap[e.to], e.label.clone()));
                origin.push(k);
            }
        }
        let index = states.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
        let sys = TransitionSystem {
            states,
            index,
            enter_id: self.enter_id.clone(),
            exit_id: self.exit_id.clone(),
            edges,
        };
        (sys, origin)
    }

    /// States reachable from `start` following edges forward.
    pub fn reachable_from(&self, start: usize) -> Vec<bool> {
        self.search(start, false)
    }

    /// States from which `target` is reachable.
    pub fn coreachable_to(&self, target: usize) -> Vec<bool> {
        self.search(target, true)
    }

    fn search(&self, start: usize, backward: bool) -> Vec<bool> {
        let n = self.states.len();
        let mut adj = vec![Vec::new(); n];
        for e in &self.edges {
            if backward {
                adj[e.to].push(e.from);
            } else {
                adj[e.from].push(e.to);
            }
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([start]);
        seen[start] = true;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// Serializes to the transition-system JSON document.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("document serializes")
    }

    fn to_document(&self) -> SystemDocument {
        SystemDocument {
            states: self.states.clone(),
            enter: Terminal::One(self.enter_id.clone()),
            exit: Terminal::One(self.exit_id.clone()),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeDocument {
                    from: self.states[e.from].clone(),
                    to: self.states[e.to].clone(),
                    label: e.label.clone(),
                })
                .collect(),
        }
    }
}

impl fmt::Display for TransitionSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "system[{} states, {} edges, {} -> {}]",
            self.states.len(),
            self.edges.len(),
            self.enter_id,
            self.exit_id
        )
    }
}

impl Serialize for TransitionSystem {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_document().serialize(s)
    }
}

fn index_states(states: &[String]) -> Result<HashMap<String, usize>, ParseError> {
    let mut index = HashMap::with_capacity(states.len());
    for (i, s) in states.iter().enumerate() {
        if index.insert(s.clone(), i).is_some() {
            return Err(ParseError::DuplicateState(s.clone()));
        }
    }
    Ok(index)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SystemDocument {
    states: Vec<String>,
    enter: Terminal,
    exit: Terminal,
    edges: Vec<EdgeDocument>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Terminal {
    One(String),
    Many(Vec<String>),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDocument {
    from: String,
    to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

/// Parser switches.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Accept arrays for `"enter"` / `"exit"` and normalize them to a fresh
    /// super-enter / super-exit state joined by ε-edges.
    pub normalize_terminals: bool,
}

/// Fresh entering state added when several entering states are normalized.
pub const SUPER_ENTER: &str = "⊳";
/// Fresh exit state added when several exit states are normalized.
pub const SUPER_EXIT: &str = "⊲";

/// Parses a transition-system JSON document with default options.
pub fn parse_system(text: &str) -> Result<TransitionSystem, ParseError> {
    parse_system_with(text, ParseOptions::default())
}

pub fn parse_system_with(text: &str, opts: ParseOptions) -> Result<TransitionSystem, ParseError> {
    let doc: SystemDocument = serde_json::from_str(text)?;
    let edges = doc.edges.into_iter().map(|e| (e.from, e.to, e.label));
    match (doc.enter, doc.exit) {
        (Terminal::One(enter), Terminal::One(exit)) => {
            TransitionSystem::new(doc.states, &enter, &exit, edges)
        }
        (enter, exit) => {
            if !opts.normalize_terminals {
                return Err(ParseError::MultipleTerminals);
            }
            let as_vec = |t: Terminal| match t {
                Terminal::One(s) => vec![s],
                Terminal::Many(v) => v,
            };
            let (enters, exits) = (as_vec(enter), as_vec(exit));
            let edges: Vec<(String, String, Label)> = edges.collect();
            normalize_terminals(doc.states, &enters, &exits, edges)
        }
    }
}

/// Builds a single-enter/single-exit system from several entering and exit
/// states. With one state on a side that side is used directly; otherwise
/// a fresh state ([`SUPER_ENTER`] / [`SUPER_EXIT`]) is added with ε-edges.
pub fn normalize_terminals(
    mut states: Vec<String>,
    enters: &[String],
    exits: &[String],
    mut edges: Vec<(String, String, Label)>,
) -> Result<TransitionSystem, ParseError> {
    if enters.is_empty() || exits.is_empty() {
        return Err(ParseError::MissingTerminal);
    }
    for id in enters.iter().chain(exits) {
        if !states.contains(id) {
            return Err(ParseError::UnknownState(id.clone()));
        }
    }
    let enter = if enters.len() == 1 {
        enters[0].clone()
    } else {
        let fresh = fresh_id(&states, SUPER_ENTER);
        states.insert(0, fresh.clone());
        for e in enters {
            edges.push((fresh.clone(), e.clone(), None));
        }
        log::info!("normalized {} entering states into {fresh}", enters.len());
        fresh
    };
    let exit = if exits.len() == 1 {
        exits[0].clone()
    } else {
        let fresh = fresh_id(&states, SUPER_EXIT);
        states.push(fresh.clone());
        for x in exits {
            edges.push((x.clone(), fresh.clone(), None));
        }
        log::info!("normalized {} exit states into {fresh}", exits.len());
        fresh
    };
    TransitionSystem::new(states, &enter, &exit, edges)
}

/// `base` with primes appended until it collides with no existing id.
pub(crate) fn fresh_id(states: &[String], base: &str) -> String {
    let mut id = base.to_string();
    while states.contains(&id) {
        id.push('\'');
    }
    id
}

/// Restricts `system` to the states lying on some enter→exit path.
///
/// Returns the empty system when the exit is unreachable.
pub fn clean(system: &TransitionSystem) -> TransitionSystem {
    clean_with_origin(system).0
}

/// [`clean`], also returning the original index of every surviving edge.
pub fn clean_with_origin(system: &TransitionSystem) -> (TransitionSystem, Vec<usize>) {
    let (Some(enter), Some(exit)) = (system.enter(), system.exit()) else {
        return (TransitionSystem::empty(system.enter_id(), system.exit_id()), Vec::new());
    };
    let fwd = system.reachable_from(enter);
    if !fwd[exit] {
        return (TransitionSystem::empty(system.enter_id(), system.exit_id()), Vec::new());
    }
    let bwd = system.coreachable_to(exit);
    let keep: Vec<bool> = fwd.iter().zip(&bwd).map(|(a, b)| *a && *b).collect();
    system.induced(&keep)
}
