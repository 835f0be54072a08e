//! Random and Del-Add baseline attacks.

use rand::seq::index;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::graph::{FlipSet, Graph, Label, NodeId};
use crate::rng::{derive_indexed, stage_rng};

fn merge_rows(rows: Vec<Result<Vec<(NodeId, NodeId)>>>) -> Result<FlipSet> {
    let mut flips = FlipSet::new();
    for row in rows {
        for (u, v) in row? {
            flips.insert(u, v);
        }
    }
    Ok(flips)
}

/// Toggles the pair between each target and `k` distinct uniformly chosen
/// other nodes. Per-target streams are derived from `seed` and the target
/// id, so the result does not depend on scheduling.
pub fn random_attack(g: &Graph, targets: &[NodeId], k: usize, seed: u64) -> Result<FlipSet> {
    let n = g.node_count();
    if k > n.saturating_sub(1) {
        return Err(Error::Insufficient {
            what: "nodes to pair with",
            needed: k,
            available: n.saturating_sub(1),
        });
    }
    let rows = Execution::default().map_range(targets.len(), |i| {
        let u = targets[i];
        let mut rng = stage_rng(derive_indexed(seed, u as u64));
        Ok(index::sample(&mut rng, n - 1, k)
            .into_iter()
            .map(|j| {
                let v = j as NodeId;
                (u, if v >= u { v + 1 } else { v })
            })
            .collect())
    });
    merge_rows(rows)
}

/// For a target with `d` positive neighbors: deletes `k` random positive
/// edges when `d > k`, otherwise deletes all `d` and inserts edges to
/// `k − d` random non-adjacent negative nodes.
pub fn del_add_attack(g: &Graph, targets: &[NodeId], k: usize, seed: u64) -> Result<FlipSet> {
    let negatives = g.nodes_with_label(Label::Negative);
    let rows = Execution::default().map_range(targets.len(), |i| {
        let u = targets[i];
        let mut rng = stage_rng(derive_indexed(seed, u as u64));
        let pos_nbrs: Vec<NodeId> = g
            .neighbors(u)
            .iter()
            .copied()
            .filter(|&v| g.label(v) == Label::Positive)
            .collect();
        let d = pos_nbrs.len();
        if d > k {
            return Ok(index::sample(&mut rng, d, k)
                .into_iter()
                .map(|j| (u, pos_nbrs[j]))
                .collect());
        }
        let mut out: Vec<(NodeId, NodeId)> = pos_nbrs.iter().map(|&v| (u, v)).collect();
        let want = k - d;
        if want > 0 {
            let free: Vec<NodeId> = negatives
                .iter()
                .copied()
                .filter(|&v| v != u && !g.has_edge(u, v))
                .collect();
            if free.len() < want {
                return Err(Error::Insufficient {
                    what: "non-adjacent negative nodes",
                    needed: want,
                    available: free.len(),
                });
            }
            out.extend(
                index::sample(&mut rng, free.len(), want)
                    .into_iter()
                    .map(|j| (u, free[j])),
            );
        }
        Ok(out)
    });
    merge_rows(rows)
}
