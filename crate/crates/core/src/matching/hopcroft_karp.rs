//! Maximum bipartite matching by shortest augmenting paths in phases.

use std::collections::VecDeque;

const UNREACHED: usize = usize::MAX;

/// Maximum matching of `adj.len()` left vertices into `right` right vertices.
///
/// Returns the partner of every left vertex.
pub fn maximum_matching(right: usize, adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let left = adj.len();
    let mut pair_left: Vec<Option<usize>> = vec![None; left];
    let mut pair_right: Vec<Option<usize>> = vec![None; right];
    let mut dist = vec![UNREACHED; left];
    loop {
        // Layer left vertices by alternating distance from the free ones.
        let mut queue = VecDeque::new();
        for u in 0..left {
            if pair_left[u].is_none() {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = UNREACHED;
            }
        }
        let mut found = UNREACHED;
        while let Some(u) = queue.pop_front() {
            if dist[u] >= found {
                continue;
            }
            for &w in &adj[u] {
                match pair_right[w] {
                    None => found = found.min(dist[u] + 1),
                    Some(v) if dist[v] == UNREACHED => {
                        dist[v] = dist[u] + 1;
                        queue.push_back(v);
                    }
                    Some(_) => {}
                }
            }
        }
        if found == UNREACHED {
            return pair_left;
        }
        // Vertex-disjoint augmenting paths along the layers.
        let mut next_edge = vec![0usize; left];
        for root in 0..left {
            if pair_left[root].is_some() {
                continue;
            }
            let mut stack = vec![root];
            let mut via: Vec<usize> = Vec::new();
            while let Some(&u) = stack.last() {
                if next_edge[u] == adj[u].len() {
                    dist[u] = UNREACHED;
                    stack.pop();
                    via.pop();
                    continue;
                }
                let w = adj[u][next_edge[u]];
                next_edge[u] += 1;
                match pair_right[w] {
                    None if dist[u] + 1 == found => {
                        pair_left[u] = Some(w);
                        pair_right[w] = Some(u);
                        for (&v, &slot) in stack.iter().zip(&via).rev() {
                            pair_left[v] = Some(slot);
                            pair_right[slot] = Some(v);
                        }
                        for &v in &stack {
                            dist[v] = UNREACHED;
                        }
                        break;
                    }
                    Some(v) if dist[v] != UNREACHED && dist[v] == dist[u] + 1 => {
                        stack.push(v);
                        via.push(w);
                    }
                    _ => {}
                }
            }
        }
    }
}
