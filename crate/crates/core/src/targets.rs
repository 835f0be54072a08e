//! Target selection: RAND, CC and CLOSE.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::graph::{Graph, Label, NodeId};
use crate::rng::stage_rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetMethod {
    Rand,
    Cc,
    Close,
}

impl fmt::Display for TargetMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TargetMethod::Rand => "rand",
            TargetMethod::Cc => "cc",
            TargetMethod::Close => "close",
        })
    }
}

impl FromStr for TargetMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rand" | "random" => Ok(TargetMethod::Rand),
            "cc" => Ok(TargetMethod::Cc),
            "close" => Ok(TargetMethod::Close),
            _ => Err(Error::invalid(format!("unknown target method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TargetSpec {
    pub method: TargetMethod,
    pub count: usize,
    pub seed: u64,
}

fn positives_checked(g: &Graph, count: usize) -> Result<Vec<NodeId>> {
    let pos = g.nodes_with_label(Label::Positive);
    if count == 0 {
        return Err(Error::invalid("target count must be at least 1"));
    }
    if pos.len() < count {
        return Err(Error::Insufficient {
            what: "positive nodes",
            needed: count,
            available: pos.len(),
        });
    }
    Ok(pos)
}

/// Sorted target set chosen by `spec.method`.
pub fn select_targets(g: &Graph, spec: &TargetSpec) -> Result<Vec<NodeId>> {
    match spec.method {
        TargetMethod::Rand => select_rand(g, spec),
        TargetMethod::Cc => select_cc(g, spec),
        TargetMethod::Close => select_close(g, spec),
    }
}

pub fn select_rand(g: &Graph, spec: &TargetSpec) -> Result<Vec<NodeId>> {
    let pos = positives_checked(g, spec.count)?;
    let mut rng = stage_rng(spec.seed);
    let mut out: Vec<NodeId> = index::sample(&mut rng, pos.len(), spec.count)
        .into_iter()
        .map(|i| pos[i])
        .collect();
    out.sort_unstable();
    Ok(out)
}

/// BFS over the positive-induced subgraph from a random positive, restarting
/// from a random unvisited positive when a component runs out.
pub fn select_cc(g: &Graph, spec: &TargetSpec) -> Result<Vec<NodeId>> {
    let pos = positives_checked(g, spec.count)?;
    let mut rng = stage_rng(spec.seed);
    let mut visited = vec![false; g.node_count()];
    let mut out = Vec::with_capacity(spec.count);
    let mut queue = VecDeque::new();
    'outer: while out.len() < spec.count {
        let unvisited: Vec<NodeId> = pos.iter().copied().filter(|&u| !visited[u as usize]).collect();
        let start = unvisited[rng.gen_range(0..unvisited.len())];
        visited[start as usize] = true;
        out.push(start);
        queue.clear();
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u) {
                if out.len() >= spec.count {
                    break 'outer;
                }
                if !visited[v as usize] && g.label(v) == Label::Positive {
                    visited[v as usize] = true;
                    out.push(v);
                    queue.push_back(v);
                }
            }
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// BFS hop distances from `src`; `u32::MAX` marks unreachable nodes.
fn bfs_distances(g: &Graph, src: NodeId, dist: &mut [u32], queue: &mut VecDeque<NodeId>) {
    dist.fill(u32::MAX);
    dist[src as usize] = 0;
    queue.clear();
    queue.push_back(src);
    while let Some(u) = queue.pop_front() {
        let d = dist[u as usize] + 1;
        for &v in g.neighbors(u) {
            if dist[v as usize] == u32::MAX {
                dist[v as usize] = d;
                queue.push_back(v);
            }
        }
    }
}

/// For every positive node (ascending id), Σ over negatives of the hop
/// distance, with unreachable negatives counted as `n + 1`. Also returns
/// whether any positive reaches any negative.
///
/// BFS runs from whichever class is smaller and accumulates into the
/// positives, so the cost is min(|P|, |N|) traversals.
pub fn negative_distance_sums(g: &Graph, exec: Execution) -> (Vec<NodeId>, Vec<u64>, bool) {
    let pos = g.nodes_with_label(Label::Positive);
    let neg = g.nodes_with_label(Label::Negative);
    let n = g.node_count();
    let cap = n as u64 + 1;
    let init = || (vec![0u32; n], VecDeque::new());
    if pos.len() <= neg.len() {
        // (sum over reached negatives, reached count)
        let per_pos = exec.map_range_init(pos.len(), init, |(dist, queue), i| {
            bfs_distances(g, pos[i], dist, queue);
            let mut sum = 0u64;
            let mut reached = 0u64;
            for &v in &neg {
                let d = dist[v as usize];
                if d != u32::MAX {
                    sum += d as u64;
                    reached += 1;
                }
            }
            (sum, reached)
        });
        let any = per_pos.iter().any(|&(_, r)| r > 0);
        let sums = per_pos
            .iter()
            .map(|&(s, r)| s + (neg.len() as u64 - r) * cap)
            .collect();
        (pos, sums, any)
    } else {
        let per_neg = exec.map_range_init(neg.len(), init, |(dist, queue), i| {
            bfs_distances(g, neg[i], dist, queue);
            pos.iter()
                .map(|&u| dist[u as usize])
                .collect::<Vec<u32>>()
        });
        let mut sums = vec![0u64; pos.len()];
        let mut any = false;
        for row in &per_neg {
            for (s, &d) in sums.iter_mut().zip(row) {
                if d == u32::MAX {
                    *s += cap;
                } else {
                    *s += d as u64;
                    any = true;
                }
            }
        }
        (pos, sums, any)
    }
}

/// The `count` positives with the largest closeness 1 / Σ_neg d(u, v),
/// ties by ascending id.
pub fn select_close(g: &Graph, spec: &TargetSpec) -> Result<Vec<NodeId>> {
    positives_checked(g, spec.count)?;
    let (pos, sums, any) = negative_distance_sums(g, Execution::default());
    if !any {
        return Err(Error::NoReachableNegative);
    }
    // largest closeness == smallest distance sum
    let mut order: Vec<usize> = (0..pos.len()).collect();
    order.sort_by_key(|&i| (sums[i], pos[i]));
    let mut out: Vec<NodeId> = order[..spec.count].iter().map(|&i| pos[i]).collect();
    out.sort_unstable();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labeled(n: usize, edges: &[(NodeId, NodeId)], pos: &[NodeId]) -> Graph {
        let labels = (0..n as NodeId)
            .map(|u| if pos.contains(&u) { Label::Positive } else { Label::Negative })
            .collect();
        Graph::from_edges(n, edges.iter().copied())
            .unwrap()
            .with_labels(labels)
            .unwrap()
    }

    fn spec(method: TargetMethod, count: usize, seed: u64) -> TargetSpec {
        TargetSpec { method, count, seed }
    }

    #[test]
    fn rand_all_and_deterministic() {
        let g = labeled(6, &[(0, 1)], &[1, 3, 5]);
        assert_eq!(select_rand(&g, &spec(TargetMethod::Rand, 3, 1)).unwrap(), vec![1, 3, 5]);
        let a = select_rand(&g, &spec(TargetMethod::Rand, 2, 7)).unwrap();
        assert_eq!(a, select_rand(&g, &spec(TargetMethod::Rand, 2, 7)).unwrap());
        assert!(select_rand(&g, &spec(TargetMethod::Rand, 4, 7)).is_err());
        assert!(select_rand(&g, &spec(TargetMethod::Rand, 0, 7)).is_err());
    }

    #[test]
    fn cc_on_positive_path() {
        // positives 0-1-2-3-4 path, negatives 5, 6
        let g = labeled(7, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 6)], &[0, 1, 2, 3, 4]);
        let mut seen_end = false;
        for seed in 0..64 {
            let t = select_cc(&g, &spec(TargetMethod::Cc, 3, seed)).unwrap();
            assert_eq!(t.len(), 3);
            // BFS on a path always yields a contiguous window
            assert_eq!(t[2] - t[0], 2, "{t:?}");
            if t == vec![0, 1, 2] {
                seen_end = true;
            }
        }
        assert!(seen_end);
        let one = select_cc(&g, &spec(TargetMethod::Cc, 1, 3)).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(g.label(one[0]), Label::Positive);
    }

    #[test]
    fn cc_restarts_across_components() {
        let g = labeled(6, &[(0, 1), (2, 3)], &[0, 1, 2, 3]);
        let t = select_cc(&g, &spec(TargetMethod::Cc, 4, 11)).unwrap();
        assert_eq!(t, vec![0, 1, 2, 3]);
    }

    #[test]
    fn close_prefers_hub() {
        // positive 0 adjacent to all negatives 3,4,5; positives 1,2 hang off 0
        let g = labeled(6, &[(0, 3), (0, 4), (0, 5), (0, 1), (1, 2)], &[0, 1, 2]);
        assert_eq!(select_close(&g, &spec(TargetMethod::Close, 1, 0)).unwrap(), vec![0]);
        assert_eq!(select_close(&g, &spec(TargetMethod::Close, 2, 0)).unwrap(), vec![0, 1]);
    }

    #[test]
    fn close_unreachable() {
        let g = labeled(4, &[(0, 1), (2, 3)], &[0, 1]);
        assert!(matches!(
            select_close(&g, &spec(TargetMethod::Close, 1, 0)),
            Err(Error::NoReachableNegative)
        ));
    }

    #[test]
    fn distance_sums_both_directions_agree() {
        // more negatives than positives → BFS from positives
        let edges = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (1, 6)];
        let g1 = labeled(8, &edges, &[0, 6]);
        let (_, s1, _) = negative_distance_sums(&g1, Execution::Serial);
        // flip roles: same graph with more positives than negatives, BFS from negatives
        let g2 = labeled(8, &edges, &[0, 6, 1, 2, 3, 4, 7]);
        let (p2, s2, _) = negative_distance_sums(&g2, Execution::Serial);
        // negatives of g2 = {5}; distances from 5: 0→5, 1→4, 2→3, 3→2, 4→1, 6→5, 7 unreachable (cap 9)
        assert_eq!(p2, vec![0, 1, 2, 3, 4, 6, 7]);
        assert_eq!(s2, vec![5, 4, 3, 2, 1, 5, 9]);
        // g1 negatives {1,2,3,4,5,7}: from 0 → 1+2+3+4+5+9 = 24; from 6 → 1+2+3+4+5+9 = 24
        assert_eq!(s1, vec![24, 24]);
    }
}
