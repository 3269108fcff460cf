use std::collections::BTreeMap;

use crate::graph::FollowGraph;

/// Ordered triples `(A, B, C)` of distinct agents with `A->B`, `A->C` and `B->C`.
pub fn closed_triads(graph: &FollowGraph) -> u64 {
    let mut total = 0u64;
    for a in 0..graph.n() {
        let out_a = graph.followees(a);
        for &b in out_a {
            total += sorted_intersection(out_a, graph.followees(b as usize));
        }
    }
    total
}

fn sorted_intersection(a: &[u32], b: &[u32]) -> u64 {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Greedy agglomerative modularity maximization (Clauset–Newman–Moore) on
/// the undirected projection, reciprocal follows weighted 2. Returns the
/// community label of every agent; labels are the smallest member id.
pub fn greedy_modularity(graph: &FollowGraph) -> Vec<usize> {
    let n = graph.n();
    let mut weights: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
    for (i, j) in graph.edges() {
        let (i, j) = (i as usize, j as usize);
        *weights[i].entry(j).or_insert(0.0) += 1.0;
        *weights[j].entry(i).or_insert(0.0) += 1.0;
    }
    let two_m: f64 = weights.iter().flat_map(|row| row.values()).sum();
    let mut label: Vec<usize> = (0..n).collect();
    if two_m == 0.0 {
        return label;
    }

    // e[i][j]: fraction of edge ends joining communities i and j; a[i]: fraction of ends in i.
    let mut e: Vec<BTreeMap<usize, f64>> = weights
        .into_iter()
        .map(|row| row.into_iter().map(|(j, w)| (j, w / two_m)).collect())
        .collect();
    let mut a: Vec<f64> = e.iter().map(|row| row.values().sum()).collect();
    let mut alive = vec![true; n];

    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..n {
            if !alive[i] {
                continue;
            }
            for (&j, &eij) in e[i].range(i + 1..) {
                let dq = 2.0 * (eij - a[i] * a[j]);
                if best.is_none_or(|(b, _, _)| dq > b) {
                    best = Some((dq, i, j));
                }
            }
        }
        let Some((dq, keep, gone)) = best else { break };
        if dq <= 0.0 {
            break;
        }
        // Fold `gone` into `keep`.
        let row = std::mem::take(&mut e[gone]);
        for (k, w) in row {
            if k == keep {
                continue;
            }
            e[k].remove(&gone);
            *e[k].entry(keep).or_insert(0.0) += w;
            *e[keep].entry(k).or_insert(0.0) += w;
        }
        e[keep].remove(&gone);
        a[keep] += a[gone];
        a[gone] = 0.0;
        alive[gone] = false;
        for l in label.iter_mut() {
            if *l == gone {
                *l = keep;
            }
        }
    }
    label
}

pub fn community_count(graph: &FollowGraph) -> usize {
    let mut labels = greedy_modularity(graph);
    labels.sort_unstable();
    labels.dedup();
    labels.len()
}
