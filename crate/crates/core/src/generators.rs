//! Random graph generators for tests, benchmarks, and offline experiments.

use std::collections::HashSet;

use rand::Rng;

use crate::error::Result;
use crate::graph::{Graph, NodeId};
use crate::rng::stage_rng;

/// G(n, p). All nodes unlabeled.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Graph> {
    let mut rng = stage_rng(seed);
    let mut edges = Vec::new();
    for u in 0..n as NodeId {
        for v in u + 1..n as NodeId {
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges)
}

/// Sparse random graph with exactly `m` distinct edges (rejection sampled).
pub fn random_edges(n: usize, m: usize, seed: u64) -> Result<Graph> {
    let mut rng = stage_rng(seed);
    let mut seen = HashSet::with_capacity(m);
    let mut edges = Vec::with_capacity(m);
    let max = n * n.saturating_sub(1) / 2;
    let m = m.min(max);
    while edges.len() < m {
        let u = rng.gen_range(0..n) as NodeId;
        let v = rng.gen_range(0..n) as NodeId;
        if u != v && seen.insert((u.min(v), u.max(v))) {
            edges.push((u, v));
        }
    }
    Graph::from_edges(n, edges)
}

/// Parameters of a clustered social-graph surrogate.
///
/// Nodes are split into `hubs` ego groups with Zipf-like sizes (exponent
/// `hub_exponent`). Each group's first node is joined to every member, and
/// the rest of the group is cut into circles of `min_community..=
/// max_community` nodes. An `intra_fraction` share of the edge budget is
/// spent as uniform-density edges inside circles; the remainder goes to
/// random links, four in five of them inside a group. With `hubs == 0` the
/// whole graph is one hubless group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommunitySpec {
    pub nodes: usize,
    pub edges: usize,
    pub min_community: usize,
    pub max_community: usize,
    pub intra_fraction: f64,
    pub hubs: usize,
    pub hub_exponent: f64,
    pub seed: u64,
}

impl CommunitySpec {
    /// Matches the published statistics of the SNAP ego-Facebook graph:
    /// 4,039 nodes, 88,234 edges, ten ego hubs (largest degree near 1,000)
    /// and an average clustering coefficient near 0.6.
    pub fn facebook_like(seed: u64) -> Self {
        CommunitySpec {
            nodes: 4_039,
            edges: 88_234,
            min_community: 20,
            max_community: 100,
            intra_fraction: 0.9,
            hubs: 10,
            hub_exponent: 0.75,
            seed,
        }
    }
}

fn group_bounds(n: usize, hubs: usize, exponent: f64) -> Vec<(usize, usize)> {
    if hubs <= 1 {
        return vec![(0, n)];
    }
    let weights: Vec<f64> = (1..=hubs).map(|i| (i as f64).powf(-exponent)).collect();
    let total: f64 = weights.iter().sum();
    let mut out = Vec::with_capacity(hubs);
    let mut start = 0;
    let mut acc = 0.0;
    for (i, w) in weights.iter().enumerate() {
        acc += w;
        let end = if i + 1 == hubs {
            n
        } else {
            ((acc / total) * n as f64).round() as usize
        };
        out.push((start, end.max(start + 1).min(n)));
        start = end.max(start + 1).min(n);
    }
    out
}

pub fn community_graph(spec: &CommunitySpec) -> Result<Graph> {
    let n = spec.nodes;
    if spec.min_community == 0 || spec.min_community > spec.max_community {
        return Err(crate::error::Error::invalid(format!(
            "community sizes {}..={} are empty",
            spec.min_community, spec.max_community
        )));
    }
    let max_edges = n * n.saturating_sub(1) / 2;
    if spec.edges > max_edges {
        return Err(crate::error::Error::invalid(format!(
            "{} edges exceed the {max_edges} possible pairs",
            spec.edges
        )));
    }
    let mut rng = stage_rng(spec.seed);
    let groups = group_bounds(n, spec.hubs, spec.hub_exponent);

    let mut seen: HashSet<(NodeId, NodeId)> = HashSet::with_capacity(spec.edges);
    let add = |u: usize, v: usize, seen: &mut HashSet<(NodeId, NodeId)>| {
        let (u, v) = (u as NodeId, v as NodeId);
        u != v && seen.insert((u.min(v), u.max(v)))
    };

    // hubs, and a chain through them so the groups are connected
    let mut circles = Vec::new();
    for (gi, &(a, b)) in groups.iter().enumerate() {
        let members = if spec.hubs > 0 {
            for u in a + 1..b {
                add(a, u, &mut seen);
            }
            if gi > 0 {
                add(groups[gi - 1].0, a, &mut seen);
            }
            a + 1
        } else {
            a
        };
        let mut start = members;
        while start < b {
            let size = rng.gen_range(spec.min_community..=spec.max_community).min(b - start);
            circles.push((start, start + size));
            start += size;
        }
    }

    let intra_pairs: usize = circles
        .iter()
        .map(|&(a, b)| (b - a) * (b - a).saturating_sub(1) / 2)
        .sum();
    let intra_budget = (spec.edges as f64 * spec.intra_fraction).round() as usize;
    let p = (intra_budget as f64 / intra_pairs.max(1) as f64).min(1.0);
    for &(a, b) in &circles {
        for u in a..b {
            for v in u + 1..b {
                if rng.gen::<f64>() < p {
                    add(u, v, &mut seen);
                }
            }
        }
        // spanning path keeps each circle connected
        for u in a + 1..b {
            add(u - 1, u, &mut seen);
        }
    }
    if spec.hubs == 0 {
        for w in circles.windows(2) {
            let u = rng.gen_range(w[0].0..w[0].1);
            let v = rng.gen_range(w[1].0..w[1].1);
            add(u, v, &mut seen);
        }
    }
    let group_of: Vec<usize> = groups
        .iter()
        .enumerate()
        .flat_map(|(i, &(a, b))| std::iter::repeat_n(i, b - a))
        .collect();
    while seen.len() < spec.edges {
        let u = rng.gen_range(0..n);
        let v = if rng.gen::<f64>() < 0.8 {
            let (a, b) = groups[group_of[u]];
            rng.gen_range(a..b)
        } else {
            rng.gen_range(0..n)
        };
        add(u, v, &mut seen);
    }
    if seen.len() > spec.edges {
        return Err(crate::error::Error::invalid(format!(
            "structural edges alone ({}) exceed the budget of {}",
            seen.len(),
            spec.edges
        )));
    }
    let mut edges: Vec<(NodeId, NodeId)> = seen.into_iter().collect();
    edges.sort_unstable();
    Graph::from_edges(n, edges)
}
