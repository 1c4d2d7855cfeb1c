//! Strongly connected components (iterative Tarjan).

use crate::system::TransitionSystem;

/// Partitions the states of `system` into maximal strongly connected
/// components.
///
/// Each component is sorted by state index and the list is ordered by the
/// smallest index of each component. A singleton without a self-loop is a
/// trivial component; see [`is_trivial`].
pub fn scc_decompose(system: &TransitionSystem) -> Vec<Vec<usize>> {
    let n = system.num_states();
    let mut adj = vec![Vec::new(); n];
    for e in system.edges() {
        adj[e.from].push(e.to);
    }
    let mut comps = tarjan(&adj);
    for c in &mut comps {
        c.sort_unstable();
    }
    comps.sort_by_key(|c| c[0]);
    comps
}

/// A component is trivial when it is a single state without a self-loop.
pub fn is_trivial(system: &TransitionSystem, component: &[usize]) -> bool {
    match component {
        [q] => !system.edges().iter().any(|e| e.from == *q && e.to == *q),
        _ => false,
    }
}

fn tarjan(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNVISITED: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut next = 0;
    // (node, position in its adjacency list)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < adj[v].len() {
                let w = adj[v][*pos];
                *pos += 1;
                if index[w] == UNVISITED {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comps.push(comp);
            }
        }
    }
    comps
}
