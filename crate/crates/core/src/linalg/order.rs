use std::collections::BTreeSet;

use super::Csc;

/// Minimum-degree ordering on the pattern of A + Aᵀ.
///
/// Plain elimination-graph variant; adequate for the network sizes handled
/// here. Ties break on the lowest index so the ordering is deterministic.
pub fn minimum_degree(a: &Csc) -> Vec<usize> {
    let n = a.ncols();
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (i, j, _) in a.iter() {
        if i != j && i < n {
            adj[i].insert(j);
            adj[j].insert(i);
        }
    }
    let mut eliminated = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best = usize::MAX;
        let mut best_deg = usize::MAX;
        for (v, nb) in adj.iter().enumerate() {
            if !eliminated[v] && nb.len() < best_deg {
                best = v;
                best_deg = nb.len();
            }
        }
        eliminated[best] = true;
        order.push(best);
        let nbrs: Vec<usize> = std::mem::take(&mut adj[best]).into_iter().collect();
        for &u in &nbrs {
            adj[u].remove(&best);
        }
        for (k, &u) in nbrs.iter().enumerate() {
            for &w in &nbrs[k + 1..] {
                adj[u].insert(w);
                adj[w].insert(u);
            }
        }
    }
    order
}
