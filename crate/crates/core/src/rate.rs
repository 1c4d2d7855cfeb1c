//! Information rate of a transition system.
//!
//! The rate of `M` is `lim log₂ S(n) / n`, where `S(n)` counts the
//! enter→exit paths of length `n`. On the cleaned graph this equals
//! `log₂ ρ` for the spectral radius `ρ` of the adjacency matrix, clamped
//! at zero (`log 0 = 0` by convention).
//!
//! [`spectral_rate`] computes `ρ` by power iteration on each strongly
//! connected block of the cleaned graph; the spectral radius of a
//! reducible non-negative matrix is the largest spectral radius among its
//! irreducible diagonal blocks. Iterating on `B + I` for an irreducible
//! block `B` gives a primitive matrix, so the iteration converges even
//! when `B` is periodic. The Collatz–Wielandt bracket
//! `min (Bv)ᵢ/vᵢ ≤ ρ ≤ max (Bv)ᵢ/vᵢ` serves as the convergence test.
//!
//! [`count_paths`] and [`rate_estimate_from_counts`] count paths exactly
//! with arbitrary-precision integers and are the independent oracle for
//! the spectral route.

use num_bigint::BigUint;
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::RateError;
use crate::scc::{is_trivial, scc_decompose};
use crate::system::{clean, TransitionSystem};

/// Power-iteration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateConfig {
    /// Convergence threshold on the relative width of the eigenvalue bracket.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for RateConfig {
    fn default() -> Self {
        RateConfig { tolerance: 1e-12, max_iterations: 100_000 }
    }
}

/// Spectral radius and information rate of a system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateResult {
    /// Spectral radius of the cleaned adjacency matrix.
    pub rho: f64,
    /// Bits per symbol, `max(0, log₂ rho)`.
    pub lambda: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Relative width of the final Collatz–Wielandt bracket.
    pub residual: f64,
}

impl RateResult {
    fn from_rho(rho: f64, iterations: usize, converged: bool, residual: f64) -> Self {
        RateResult { rho, lambda: rate_from_rho(rho), iterations, converged, residual }
    }
}

/// `max(0, log₂ rho)`.
pub fn rate_from_rho(rho: f64) -> f64 {
    if rho > 1.0 {
        rho.log2()
    } else {
        0.0
    }
}

pub fn spectral_rate(system: &TransitionSystem) -> Result<RateResult, RateError> {
    spectral_rate_with(system, &RateConfig::default())
}

pub fn spectral_rate_with(
    system: &TransitionSystem,
    config: &RateConfig,
) -> Result<RateResult, RateError> {
    let cleaned = clean(system);
    spectral_radius_of_graph(&cleaned, config)
}

/// Spectral radius of the whole adjacency matrix of `system`, without
/// cleaning. Used for strongly connected components, which are their own
/// cleaned graph for any choice of terminals inside them.
pub fn spectral_radius_of_graph(
    system: &TransitionSystem,
    config: &RateConfig,
) -> Result<RateResult, RateError> {
    let mut best = RateResult::from_rho(0.0, 0, true, 0.0);
    let mut iterations = 0;
    for comp in scc_decompose(system) {
        if is_trivial(system, &comp) {
            continue;
        }
        let block = block_edges(system, &comp);
        let r = power_iterate(comp.len(), &block, config);
        iterations += r.iterations;
        if !r.converged {
            return Err(RateError::NotConverged {
                estimate: RateResult { iterations, ..r },
            });
        }
        if r.rho > best.rho {
            best = r;
        }
    }
    best.iterations = iterations;
    Ok(best)
}

/// Edges with both endpoints in `comp`, renumbered to block-local indices.
fn block_edges(system: &TransitionSystem, comp: &[usize]) -> Vec<(usize, usize)> {
    let mut local = vec![usize::MAX; system.num_states()];
    for (i, &q) in comp.iter().enumerate() {
        local[q] = i;
    }
    system
        .edges()
        .iter()
        .filter(|e| local[e.from] != usize::MAX && local[e.to] != usize::MAX)
        .map(|e| (local[e.from], local[e.to]))
        .collect()
}

/// Power iteration on `B + I` for an irreducible block `B` given as an
/// edge list over `k` states.
fn power_iterate(k: usize, edges: &[(usize, usize)], config: &RateConfig) -> RateResult {
    let mut v = vec![1.0f64; k];
    let mut w = vec![0.0f64; k];
    let mut estimate = 0.0;
    let mut residual = f64::INFINITY;
    for it in 1..=config.max_iterations {
        w.copy_from_slice(&v);
        for &(i, j) in edges {
            w[i] += v[j];
        }
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (wi, vi) in w.iter().zip(&v) {
            let r = wi / vi;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        estimate = 0.5 * (lo + hi) - 1.0;
        residual = (hi - lo) / hi.max(1.0);
        if residual <= config.tolerance {
            return RateResult::from_rho(estimate.max(0.0), it, true, residual);
        }
        let norm = w.iter().copied().fold(0.0, f64::max);
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / norm;
        }
    }
    RateResult::from_rho(estimate.max(0.0), config.max_iterations, false, residual)
}

/// Number of enter→exit paths with exactly `n` edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathCount {
    pub n: usize,
    pub count: BigUint,
}

/// Exact count of enter→exit paths of length `n`.
pub fn count_paths(system: &TransitionSystem, n: usize) -> PathCount {
    let count = path_counts(system, n).pop().unwrap_or_default();
    PathCount { n, count }
}

/// `S(0), S(1), …, S(n_max)` by dynamic programming over the adjacency,
/// counting parallel edges with multiplicity.
pub fn path_counts(system: &TransitionSystem, n_max: usize) -> Vec<BigUint> {
    let (Some(enter), Some(exit)) = (system.enter(), system.exit()) else {
        return vec![BigUint::zero(); n_max + 1];
    };
    let n = system.num_states();
    let mut cur = vec![BigUint::zero(); n];
    cur[enter] = BigUint::from(1u8);
    let mut out = Vec::with_capacity(n_max + 1);
    out.push(cur[exit].clone());
    for _ in 0..n_max {
        let mut next = vec![BigUint::zero(); n];
        for e in system.edges() {
            if !cur[e.from].is_zero() {
                next[e.to] += &cur[e.from];
            }
        }
        out.push(next[exit].clone());
        cur = next;
    }
    out
}

/// `log₂ x` for an arbitrarily large positive integer.
pub fn log2_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits <= 960 {
        return x.to_f64().expect("fits in f64").log2();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64-bit head");
    top.log2() + shift as f64
}

/// Least-squares slope of `log₂ S(n)` against `n` over the lengths in
/// `[n_lo, n_hi]` with a non-zero count. Zero when fewer than two such
/// lengths exist.
///
/// # Panics
///
/// Panics unless `n_lo < n_hi`.
pub fn rate_estimate_from_counts(system: &TransitionSystem, n_lo: usize, n_hi: usize) -> f64 {
    assert!(n_lo < n_hi, "empty window [{n_lo}, {n_hi}]");
    let counts = path_counts(system, n_hi);
    let points: Vec<(f64, f64)> = (n_lo..=n_hi)
        .filter(|&n| !counts[n].is_zero())
        .map(|n| (n as f64, log2_big(&counts[n])))
        .collect();
    if points.len() < 2 {
        return 0.0;
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = points.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = points.iter().map(|(x, _)| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
