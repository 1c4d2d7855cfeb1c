//! Synchronous composition of two transition systems.
//!
//! A path of `M1 ‖ M2` is a word over the unpaired states of `M1`, the
//! unpaired states of `M2` and the synchronization pairs. Erasing the
//! other machine's symbols (and the other half of each pair) must leave an
//! enter→exit path of each machine. [`build_sync_product`] builds a DFA
//! for this language whose states track each machine's progress: not yet
//! started, or sitting at a state. Since the DFA is deterministic, its
//! enter→exit path counts are exactly the word counts.

use std::collections::{HashMap, HashSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{IrcError, ParseError};
use crate::irc::{check_theta, Decision, RichComponent, RATE_EPS};
use crate::rate::{spectral_rate, RateResult};
use crate::system::{clean_with_origin, fresh_id, Edge, TransitionSystem};

/// Synchronization pairs by state id, `(state of M1, state of M2)`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyncPairSet {
    pub pairs: Vec<(String, String)>,
}

impl SyncPairSet {
    pub fn new<A: Into<String>, B: Into<String>>(pairs: impl IntoIterator<Item = (A, B)>) -> Self {
        SyncPairSet { pairs: pairs.into_iter().map(|(a, b)| (a.into(), b.into())).collect() }
    }

    /// Parses `{"pairs": [["s1", "s2"], …]}`.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Resolves ids against the two machines, checking that no state is
    /// used by two pairs.
    pub fn resolve(
        &self,
        m1: &TransitionSystem,
        m2: &TransitionSystem,
    ) -> Result<Vec<(usize, usize)>, ParseError> {
        let mut seen1 = HashSet::new();
        let mut seen2 = HashSet::new();
        let mut out = Vec::with_capacity(self.pairs.len());
        for (a, b) in &self.pairs {
            let p = m1.state_index(a).ok_or_else(|| ParseError::UnknownState(a.clone()))?;
            let q = m2.state_index(b).ok_or_else(|| ParseError::UnknownState(b.clone()))?;
            if !seen1.insert(p) {
                return Err(ParseError::RepeatedPairState(a.clone()));
            }
            if !seen2.insert(q) {
                return Err(ParseError::RepeatedPairState(b.clone()));
            }
            out.push((p, q));
        }
        Ok(out)
    }
}

/// How far one machine has progressed along its path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Progress {
    NotStarted,
    At(usize),
}

/// A letter of a path of `M1 ‖ M2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SyncSymbol {
    /// An unpaired state of `M1`.
    First(usize),
    /// An unpaired state of `M2`.
    Second(usize),
    /// The synchronization pair with this index.
    Pair(usize),
}

/// The cleaned DFA accepting `Paths(M1 ‖ M2)`.
#[derive(Debug, Clone)]
pub struct SyncProduct {
    pub system: TransitionSystem,
    /// Progress of both machines, per state of `system`.
    pub progress: Vec<(Progress, Progress)>,
    /// The letter read, per edge of `system`.
    pub symbols: Vec<SyncSymbol>,
    /// Reachable DFA states before cleaning.
    pub reachable_states: usize,
}

impl SyncProduct {
    /// The unique successor on `symbol`, if any.
    pub fn step(&self, state: usize, symbol: SyncSymbol) -> Option<usize> {
        self.system
            .edges()
            .iter()
            .zip(&self.symbols)
            .find(|(e, s)| e.from == state && **s == symbol)
            .map(|(e, _)| e.to)
    }
}

fn successor_matrix(m: &TransitionSystem) -> Vec<Vec<bool>> {
    let n = m.num_states();
    let mut adj = vec![vec![false; n]; n];
    for e in m.edges() {
        adj[e.from][e.to] = true;
    }
    adj
}

fn can_read(adj: &[Vec<bool>], enter: usize, at: Progress, q: usize) -> bool {
    match at {
        Progress::NotStarted => q == enter,
        Progress::At(c) => adj[c][q],
    }
}

/// Builds the DFA of `Paths(M1 ‖ M2)`.
pub fn build_sync_product(
    m1: &TransitionSystem,
    m2: &TransitionSystem,
    pairs: &SyncPairSet,
) -> Result<SyncProduct, ParseError> {
    let resolved = pairs.resolve(m1, m2)?;
    Ok(build_resolved(m1, m2, &resolved))
}

pub(crate) fn build_resolved(
    m1: &TransitionSystem,
    m2: &TransitionSystem,
    pairs: &[(usize, usize)],
) -> SyncProduct {
    let empty = || SyncProduct {
        system: TransitionSystem::empty("(-,-)", "(exit,exit)"),
        progress: Vec::new(),
        symbols: Vec::new(),
        reachable_states: 0,
    };
    let (Some(e1), Some(x1), Some(e2), Some(x2)) = (m1.enter(), m1.exit(), m2.enter(), m2.exit()) else {
        return empty();
    };
    let (adj1, adj2) = (successor_matrix(m1), successor_matrix(m2));
    let mut paired1 = vec![false; m1.num_states()];
    let mut paired2 = vec![false; m2.num_states()];
    for &(p, q) in pairs {
        paired1[p] = true;
        paired2[q] = true;
    }
    let mut alphabet: Vec<SyncSymbol> = Vec::new();
    alphabet.extend((0..m1.num_states()).filter(|&q| !paired1[q]).map(SyncSymbol::First));
    alphabet.extend((0..pairs.len()).map(SyncSymbol::Pair));
    alphabet.extend((0..m2.num_states()).filter(|&q| !paired2[q]).map(SyncSymbol::Second));

    let start = (Progress::NotStarted, Progress::NotStarted);
    let mut ids: HashMap<(Progress, Progress), usize> = HashMap::from([(start, 0)]);
    let mut tags = vec![start];
    let mut edges: Vec<Edge> = Vec::new();
    let mut symbols: Vec<SyncSymbol> = Vec::new();
    let mut queue = VecDeque::from([start]);
    while let Some(cur @ (s1, s2)) = queue.pop_front() {
        let from = ids[&cur];
        for &sym in &alphabet {
            let next = match sym {
                SyncSymbol::First(q) => can_read(&adj1, e1, s1, q).then_some((Progress::At(q), s2)),
                SyncSymbol::Second(q) => can_read(&adj2, e2, s2, q).then_some((s1, Progress::At(q))),
                SyncSymbol::Pair(i) => {
                    let (p, q) = pairs[i];
                    (can_read(&adj1, e1, s1, p) && can_read(&adj2, e2, s2, q))
                        .then_some((Progress::At(p), Progress::At(q)))
                }
            };
            let Some(next) = next else { continue };
            let to = *ids.entry(next).or_insert_with(|| {
                tags.push(next);
                queue.push_back(next);
                tags.len() - 1
            });
            edges.push(Edge::new(from, to, Some(symbol_name(m1, m2, pairs, sym))));
            symbols.push(sym);
        }
    }
    let accept = (Progress::At(x1), Progress::At(x2));
    let Some(&exit) = ids.get(&accept) else {
        return SyncProduct { reachable_states: tags.len(), ..empty() };
    };
    let mut names: Vec<String> = Vec::with_capacity(tags.len());
    for &(a, b) in &tags {
        let name = format!("({},{})", progress_name(m1, a), progress_name(m2, b));
        names.push(fresh_id(&names, &name));
    }
    let raw = TransitionSystem::from_parts(names, 0, exit, edges).expect("product is well formed");
    let (system, origin) = clean_with_origin(&raw);
    let progress = system
        .states()
        .iter()
        .map(|id| tags[raw.state_index(id).expect("cleaned state exists")])
        .collect();
    let symbols = origin.iter().map(|&k| symbols[k]).collect();
    SyncProduct { system, progress, symbols, reachable_states: tags.len() }
}

fn progress_name(m: &TransitionSystem, p: Progress) -> &str {
    match p {
        Progress::NotStarted => "-",
        Progress::At(q) => m.state_id(q),
    }
}

fn symbol_name(m1: &TransitionSystem, m2: &TransitionSystem, pairs: &[(usize, usize)], s: SyncSymbol) -> String {
    match s {
        SyncSymbol::First(q) => format!("1:{}", m1.state_id(q)),
        SyncSymbol::Second(q) => format!("2:{}", m2.state_id(q)),
        SyncSymbol::Pair(i) => format!("<{},{}>", m1.state_id(pairs[i].0), m2.state_id(pairs[i].1)),
    }
}

/// Rate of `Paths(M1 ‖ M2)`.
pub fn sync_rate(
    m1: &TransitionSystem,
    m2: &TransitionSystem,
    pairs: &SyncPairSet,
) -> Result<RateResult, IrcError> {
    let product = build_sync_product(m1, m2, pairs)?;
    Ok(spectral_rate(&product.system)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    First,
    Second,
}

/// A θ-IRC `(M1', M2')` of a synchronous composition.
#[derive(Debug, Clone, PartialEq)]
pub struct SyncRichComponents {
    pub first: RichComponent,
    pub second: RichComponent,
    /// `λ(M1' ‖ M2')`.
    pub lambda: f64,
    /// `λ(M1 ‖ M2)`.
    pub lambda_full: f64,
    pub trace_log: Vec<(Side, usize, Decision)>,
    pub rate_evaluations: usize,
}

/// Greedy edge deletion on both machines (all `M1` edges in canonical
/// order, then all `M2` edges), rebuilding the product after each trial.
/// Both components keep their machine's entering and exit states.
pub fn find_sync_irc(
    m1: &TransitionSystem,
    m2: &TransitionSystem,
    pairs: &SyncPairSet,
    theta: f64,
) -> Result<SyncRichComponents, IrcError> {
    check_theta(theta)?;
    let resolved = pairs.resolve(m1, m2)?;
    let rate_of = |p1: &[bool], p2: &[bool]| -> Result<f64, IrcError> {
        let a = m1.with_edges(|k| p1[k]);
        let b = m2.with_edges(|k| p2[k]);
        Ok(spectral_rate(&build_resolved(&a, &b, &resolved).system)?.lambda)
    };
    let mut present1 = vec![true; m1.num_edges()];
    let mut present2 = vec![true; m2.num_edges()];
    let lambda_full = rate_of(&present1, &present2)?;
    if lambda_full == 0.0 && theta > 0.0 {
        return Err(IrcError::ZeroRate);
    }
    let threshold = theta * lambda_full;
    let mut trace_log = Vec::new();
    let candidates = (0..m1.num_edges())
        .map(|k| (Side::First, k))
        .chain((0..m2.num_edges()).map(|k| (Side::Second, k)));
    for (side, k) in candidates {
        let flag = |p1: &mut Vec<bool>, p2: &mut Vec<bool>, v: bool| match side {
            Side::First => p1[k] = v,
            Side::Second => p2[k] = v,
        };
        flag(&mut present1, &mut present2, false);
        if rate_of(&present1, &present2)? >= threshold - RATE_EPS {
            trace_log.push((side, k, Decision::Deleted));
        } else {
            flag(&mut present1, &mut present2, true);
            trace_log.push((side, k, Decision::Restored));
        }
    }
    let lambda = rate_of(&present1, &present2)?;
    let component = |m: &TransitionSystem, present: &[bool], side: Side| {
        let kept_edges: Vec<usize> = (0..m.num_edges()).filter(|&k| present[k]).collect();
        let (enter, exit) = (m.enter().expect("non-empty"), m.exit().expect("non-empty"));
        let mut states = vec![enter, exit];
        for &k in &kept_edges {
            states.extend([m.edges()[k].from, m.edges()[k].to]);
        }
        states.sort_unstable();
        states.dedup();
        let log: Vec<(usize, Decision)> = trace_log
            .iter()
            .filter(|(s, _, _)| *s == side)
            .map(|&(_, k, d)| (k, d))
            .collect();
        RichComponent {
            kept_states: states,
            kept_edges,
            entry: enter,
            exit,
            lambda_component: lambda,
            theta,
            rate_evaluations: log.len(),
            trace_log: log,
        }
    };
    Ok(SyncRichComponents {
        first: component(m1, &present1, Side::First),
        second: component(m2, &present2, Side::Second),
        lambda,
        lambda_full,
        rate_evaluations: trace_log.len(),
        trace_log,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SyncIrcVerdict {
    pub rate_ok: bool,
    pub minimal: bool,
    pub witness: Option<(Side, usize)>,
}

/// Checks `λ(M1' ‖ M2') ≥ θ·λ(M1 ‖ M2)` and that deleting any single kept
/// edge from either side breaks it.
pub fn verify_sync_irc(
    m1: &TransitionSystem,
    m2: &TransitionSystem,
    pairs: &SyncPairSet,
    found: &SyncRichComponents,
    theta: f64,
) -> Result<SyncIrcVerdict, IrcError> {
    check_theta(theta)?;
    let resolved = pairs.resolve(m1, m2)?;
    let rate_with = |k1: &dyn Fn(usize) -> bool, k2: &dyn Fn(usize) -> bool| -> Result<f64, IrcError> {
        let a = m1.with_edges(k1);
        let b = m2.with_edges(k2);
        Ok(spectral_rate(&build_resolved(&a, &b, &resolved).system)?.lambda)
    };
    let keep1 = |k: usize| found.first.kept_edges.contains(&k);
    let keep2 = |k: usize| found.second.kept_edges.contains(&k);
    let threshold = theta * rate_with(&|_| true, &|_| true)?;
    let rate_ok = rate_with(&keep1, &keep2)? >= threshold - RATE_EPS;
    let mut witness = None;
    for &k in &found.first.kept_edges {
        if rate_with(&|j| j != k && keep1(j), &keep2)? >= threshold - RATE_EPS {
            witness = Some((Side::First, k));
            break;
        }
    }
    if witness.is_none() {
        for &k in &found.second.kept_edges {
            if rate_with(&keep1, &|j| j != k && keep2(j))? >= threshold - RATE_EPS {
                witness = Some((Side::Second, k));
                break;
            }
        }
    }
    Ok(SyncIrcVerdict { rate_ok, minimal: witness.is_none(), witness })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_traits::ToPrimitive;

    use crate::rate::count_paths;

    fn chain(a: &str, b: &str) -> TransitionSystem {
        TransitionSystem::new([a, b], a, b, [(a, b, None)]).unwrap()
    }

    fn fibonacci() -> TransitionSystem {
        TransitionSystem::new(["a", "b"], "a", "a", [("a", "a", None), ("a", "b", None), ("b", "a", None)])
            .unwrap()
    }

    fn words(p: &SyncProduct, len: usize) -> u64 {
        count_paths(&p.system, len).count.to_u64().unwrap()
    }

    #[test]
    fn free_interleavings_of_two_chains() {
        let p = build_sync_product(&chain("a1", "b1"), &chain("a2", "b2"), &SyncPairSet::default()).unwrap();
        assert_eq!(words(&p, 4), 6);
        assert_eq!((0..=8).filter(|&n| n != 4).map(|n| words(&p, n)).sum::<u64>(), 0);
        assert!(p.system.num_states() <= 9);
    }

    #[test]
    fn one_pair_leaves_two_words() {
        let pairs = SyncPairSet::new([("a1", "a2")]);
        let p = build_sync_product(&chain("a1", "b1"), &chain("a2", "b2"), &pairs).unwrap();
        assert_eq!(words(&p, 3), 2);
        let s = p.step(0, SyncSymbol::Pair(0)).unwrap();
        assert_eq!(p.progress[s], (Progress::At(0), Progress::At(0)));
    }

    #[test]
    fn lock_step_has_one_word() {
        let pairs = SyncPairSet::new([("a1", "a2"), ("b1", "b2")]);
        let (m1, m2) = (chain("a1", "b1"), chain("a2", "b2"));
        let p = build_sync_product(&m1, &m2, &pairs).unwrap();
        assert_eq!(words(&p, 2), 1);
        assert_eq!(p.system.num_states(), 3);
        assert_eq!(sync_rate(&m1, &m2, &pairs).unwrap().lambda, 0.0);
        assert_eq!(find_sync_irc(&m1, &m2, &pairs, 0.5).unwrap_err(), IrcError::ZeroRate);
    }

    #[test]
    fn unmatched_pair_gives_empty_language() {
        // a pair may start one machine while advancing the other
        let pairs = SyncPairSet::new([("a1", "b2")]);
        let p = build_sync_product(&chain("a1", "b1"), &chain("a2", "b2"), &pairs).unwrap();
        assert!(!p.system.is_empty());
        assert_eq!(words(&p, 3), 1);
        let pairs = SyncPairSet::new([("b1", "a2")]);
        let p = build_sync_product(&chain("a1", "b1"), &chain("a2", "b2"), &pairs).unwrap();
        assert_eq!(words(&p, 3), 1);
        let pairs = SyncPairSet::new([("a1", "a2")]);
        let m2 = TransitionSystem::new(["a2", "b2"], "b2", "a2", [("a2", "b2", None)]).unwrap();
        let p = build_sync_product(&chain("a1", "b1"), &m2, &pairs).unwrap();
        assert!(p.system.is_empty());
    }

    #[test]
    fn interleaving_two_fibonacci_machines() {
        // Σ_{i+j=n} C(n,i) φ^i φ^j = (2φ)^n
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        let r = sync_rate(&fibonacci(), &fibonacci(), &SyncPairSet::default()).unwrap();
        assert_abs_diff_eq!(r.lambda, (2.0 * golden).log2(), epsilon = 1e-9);
        assert!(r.lambda > 0.6942);
    }

    #[test]
    fn pair_validation() {
        let (m1, m2) = (chain("a1", "b1"), chain("a2", "b2"));
        let dup = SyncPairSet::new([("a1", "a2"), ("a1", "b2")]);
        assert_eq!(dup.resolve(&m1, &m2).unwrap_err(), ParseError::RepeatedPairState("a1".into()));
        let unknown = SyncPairSet::new([("zz", "a2")]);
        assert_eq!(unknown.resolve(&m1, &m2).unwrap_err(), ParseError::UnknownState("zz".into()));
        let parsed = SyncPairSet::parse(r#"{"pairs":[["a1","a2"]]}"#).unwrap();
        assert_eq!(parsed, SyncPairSet::new([("a1", "a2")]));
        assert!(SyncPairSet::parse(r#"{"pairs":[],"x":1}"#).is_err());
    }

    #[test]
    fn zero_theta_deletes_all_edges() {
        let found = find_sync_irc(&fibonacci(), &fibonacci(), &SyncPairSet::default(), 0.0).unwrap();
        assert!(found.first.kept_edges.is_empty() && found.second.kept_edges.is_empty());
        assert_eq!(found.first.kept_states, [0]);
        assert_eq!(found.rate_evaluations, 6);
    }

    #[test]
    fn full_theta_on_fibonacci_pair() {
        let (m1, m2, pairs) = (fibonacci(), fibonacci(), SyncPairSet::default());
        let found = find_sync_irc(&m1, &m2, &pairs, 1.0).unwrap();
        assert_eq!(found.first.kept_edges, [0, 1, 2]);
        assert_eq!(found.second.kept_edges, [0, 1, 2]);
        let v = verify_sync_irc(&m1, &m2, &pairs, &found, 1.0).unwrap();
        assert!(v.rate_ok && v.minimal);
    }
}
