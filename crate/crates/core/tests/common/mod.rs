//! Independent reference implementations used by the integration tests.
//! Apart from [`engine_vs_brute_force`], none of these call into the
//! library's propagation, projection or attack code.

#![allow(dead_code, clippy::needless_range_loop, clippy::type_complexity)]

use std::collections::{BTreeSet, VecDeque};

use graph_evasion::graph::{Graph, Label, NodeId, TrainingSet};
use graph_evasion::attack::{run_attack_with, AttackConfig};
use graph_evasion::cost::{CostModel, GraphCosts};
use graph_evasion::propagation::{assign_priors, misclassified_count, propagate, LinLbpParams};
use graph_evasion::Execution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random simple graph on `n` nodes with roughly `p·n(n−1)/2` edges.
pub fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
    let mut r = rng(seed);
    let mut edges = Vec::new();
    for u in 0..n as NodeId {
        for v in u + 1..n as NodeId {
            if r.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

/// Random labels, at least one node of each class when `n ≥ 2`.
pub fn random_labels(n: usize, seed: u64) -> Vec<Label> {
    let mut r = rng(seed);
    let mut labels: Vec<Label> = (0..n)
        .map(|_| if r.gen_bool(0.5) { Label::Positive } else { Label::Negative })
        .collect();
    if n >= 2 {
        labels[0] = Label::Positive;
        labels[1] = Label::Negative;
    }
    labels
}

pub fn dense_adjacency(g: &Graph) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let mut a = vec![vec![0.0; n]; n];
    for (u, v) in g.edges() {
        a[u as usize][v as usize] = 1.0;
        a[v as usize][u as usize] = 1.0;
    }
    a
}

/// Solves `m x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .unwrap();
        m.swap(col, piv);
        b.swap(col, piv);
        let d = m[col][col];
        assert!(d.abs() > 1e-14, "singular system");
        for row in col + 1..n {
            let f = m[row][col] / d;
            if f == 0.0 {
                continue;
            }
            for k in col..n {
                m[row][k] -= f * m[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let s: f64 = (row + 1..n).map(|k| m[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / m[row][row];
    }
    x
}

/// Fixed point of p = q + w·A p from the dense system (I − wA) p = q.
pub fn dense_linlbp(adj: &[Vec<f64>], q: &[f64], w: f64) -> Vec<f64> {
    let n = q.len();
    let m = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { 1.0 } else { 0.0 } - w * adj[i][j])
                .collect()
        })
        .collect();
    gauss_solve(m, q.to_vec())
}

/// ±θ on training nodes, zero elsewhere.
pub fn priors(n: usize, train: &TrainingSet, theta: f64) -> Vec<f64> {
    let mut q = vec![0.0; n];
    for &u in &train.positive {
        q[u as usize] = theta;
    }
    for &u in &train.negative {
        q[u as usize] = -theta;
    }
    q
}

/// Euclidean projection onto {0 ≤ x ≤ 1, Σx ≤ k} by bisection on the shift.
pub fn bisection_projection(s: &[f64], k: f64) -> Vec<f64> {
    let total = |mu: f64| -> f64 { s.iter().map(|&x| (x - mu).clamp(0.0, 1.0)).sum() };
    if total(0.0) <= k {
        return s.iter().map(|&x| x.clamp(0.0, 1.0)).collect();
    }
    let mut lo = 0.0;
    let mut hi = s.iter().cloned().fold(0.0, f64::max);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) > k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mu = 0.5 * (lo + hi);
    s.iter().map(|&x| (x - mu).clamp(0.0, 1.0)).collect()
}

/// Triangles through `u` by checking every neighbor pair.
pub fn brute_local_clustering(adj: &[Vec<f64>], u: usize) -> f64 {
    let nbrs: Vec<usize> = (0..adj.len()).filter(|&v| adj[u][v] != 0.0).collect();
    let d = nbrs.len();
    if d < 2 {
        return 0.0;
    }
    let mut t = 0;
    for i in 0..d {
        for j in i + 1..d {
            if adj[nbrs[i]][nbrs[j]] != 0.0 {
                t += 1;
            }
        }
    }
    t as f64 / (d * (d - 1) / 2) as f64
}

/// Hop distances from `src`, `None` when unreachable.
pub fn bfs_distances(g: &Graph, src: NodeId) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.node_count()];
    dist[src as usize] = Some(0);
    let mut q = VecDeque::from([src]);
    while let Some(u) = q.pop_front() {
        let d = dist[u as usize].unwrap();
        for &v in g.neighbors(u) {
            if dist[v as usize].is_none() {
                dist[v as usize] = Some(d + 1);
                q.push_back(v);
            }
        }
    }
    dist
}

/// Dense adjacency with every pair in `flips` toggled.
pub fn toggled(adj: &[Vec<f64>], flips: &BTreeSet<(usize, usize)>) -> Vec<Vec<f64>> {
    let mut a = adj.to_vec();
    for &(u, v) in flips {
        a[u][v] = 1.0 - a[u][v];
        a[v][u] = 1.0 - a[v][u];
    }
    a
}

/// All subsets of `pool` with at most `k` elements.
pub fn subsets_up_to(pool: &[usize], k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &x in pool {
        let mut extra = Vec::new();
        for s in &out {
            if s.len() < k {
                let mut t = s.clone();
                t.push(x);
                extra.push(t);
            }
        }
        out.extend(extra);
    }
    out
}

/// Best achievable number of misclassified targets over every flip set in
/// which each target touches at most `k` flipped pairs, scored with the
/// dense solver. Returns the best count and the number of sets scored.
pub fn brute_force_best(
    adj: &[Vec<f64>],
    q: &[f64],
    w: f64,
    targets: &[usize],
    k: usize,
) -> (usize, usize) {
    let n = q.len();
    let score = |flips: &BTreeSet<(usize, usize)>| -> usize {
        let p = dense_linlbp(&toggled(adj, flips), q, w);
        targets.iter().filter(|&&t| p[t] < 0.0).count()
    };
    let pairs: Vec<(usize, usize)> = {
        let mut s = BTreeSet::new();
        for &t in targets {
            for v in 0..n {
                if v != t {
                    s.insert((t.min(v), t.max(v)));
                }
            }
        }
        s.into_iter().collect()
    };
    let mut best = 0;
    let mut scored = 0;
    let mut current = BTreeSet::new();
    let mut load = vec![0usize; n];
    #[allow(clippy::too_many_arguments)]
    fn walk(
        i: usize,
        pairs: &[(usize, usize)],
        targets: &[usize],
        k: usize,
        current: &mut BTreeSet<(usize, usize)>,
        load: &mut Vec<usize>,
        best: &mut usize,
        scored: &mut usize,
        score: &dyn Fn(&BTreeSet<(usize, usize)>) -> usize,
    ) {
        if i == pairs.len() {
            *scored += 1;
            *best = (*best).max(score(current));
            return;
        }
        walk(i + 1, pairs, targets, k, current, load, best, scored, score);
        let (u, v) = pairs[i];
        let ok = |x: usize, load: &Vec<usize>| !targets.contains(&x) || load[x] < k;
        if ok(u, load) && ok(v, load) {
            current.insert((u, v));
            load[u] += 1;
            load[v] += 1;
            walk(i + 1, pairs, targets, k, current, load, best, scored, score);
            load[u] -= 1;
            load[v] -= 1;
            current.remove(&(u, v));
        }
    }
    walk(0, &pairs, targets, k, &mut current, &mut load, &mut best, &mut scored, &score);
    (best, scored)
}

/// c·b̃ + λ Σ_T p_next, where p_next is one sweep from `p` with row `u`
/// replaced by |a_u − b̃_u| and every other row left as in the graph.
#[allow(clippy::too_many_arguments)]
pub fn relaxed_objective(
    adj: &[Vec<f64>],
    q: &[f64],
    p: &[f64],
    w: f64,
    lambda: f64,
    targets: &[usize],
    u: usize,
    b: &[f64],
    c: &[f64],
) -> f64 {
    let n = q.len();
    let row = |t: usize, v: usize| -> f64 {
        if t == u {
            (adj[u][v] - b[v]).abs()
        } else {
            adj[t][v]
        }
    };
    let cost: f64 = (0..n).filter(|&v| v != u).map(|v| c[v] * b[v]).sum();
    let post: f64 = targets
        .iter()
        .map(|&t| q[t] + w * (0..n).map(|v| row(t, v) * p[v]).sum::<f64>())
        .sum();
    cost + lambda * post
}

pub const HAND_PARAMS: LinLbpParams = LinLbpParams {
    theta: 0.5,
    weight: 0.1,
    max_iters: 1_000,
    tol: 1e-12,
};

pub fn split_labels() -> Vec<Label> {
    (0..12)
        .map(|i| if i < 6 { Label::Negative } else { Label::Positive })
        .collect()
}

/// 12-node instance: negatives 0..6, positives 6..12.
pub struct HandInstance {
    pub edges: Vec<(NodeId, NodeId)>,
    pub train: TrainingSet,
    pub targets: Vec<NodeId>,
}

/// Two rings joined by two cross edges; no single flip decides either target.
pub fn hard_instance() -> HandInstance {
    HandInstance {
        edges: vec![
            (0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3),
            (6, 7), (7, 8), (8, 9), (9, 10), (10, 11), (11, 6), (6, 9),
            (2, 8), (4, 10),
        ],
        train: TrainingSet::new(vec![6], vec![0]),
        targets: vec![7, 10],
    }
}

/// Each target hangs off the labeled positive 6 and one negative that
/// borders a labeled negative; dropping the edge to 6 flips it.
pub fn easy_instance() -> HandInstance {
    HandInstance {
        edges: vec![
            (0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (4, 5), (5, 1),
            (6, 9), (9, 10), (10, 11), (11, 6),
            (6, 7), (7, 2), (6, 8), (8, 3),
        ],
        train: TrainingSet::new(vec![6], vec![0, 1]),
        targets: vec![7, 8],
    }
}

/// Runs the engine (K = 2, Equal cost) on a 12-node instance and the
/// exhaustive search next to it: (no-attack, engine, optimum) counts of
/// misclassified targets.
pub fn engine_vs_brute_force(
    edges: &[(NodeId, NodeId)],
    train: TrainingSet,
    targets: &[NodeId],
) -> (usize, usize, usize) {
    let g = Graph::from_edges(12, edges.iter().copied())
        .unwrap()
        .with_labels(split_labels())
        .unwrap();
    let params = HAND_PARAMS;
    let q = assign_priors(&g, &train, &params);
    let base = misclassified_count(&propagate(&g, &q, &params, None).unwrap().posterior, targets);
    let cfg = AttackConfig { budget_k: 2, ..AttackConfig::default() };
    let res = run_attack_with(
        &g,
        &train,
        targets,
        &GraphCosts::new(&CostModel::Equal, g.labels()),
        &params,
        &cfg,
        Execution::Serial,
    )
    .unwrap();
    let got = misclassified_count(&res.posterior, targets);
    let t: Vec<usize> = targets.iter().map(|&u| u as usize).collect();
    let (best, scored) =
        brute_force_best(&dense_adjacency(&g), &priors(12, &train, 0.5), 0.1, &t, 2);
    eprintln!("no attack {base}, engine {got}, exhaustive optimum {best} over {scored} flip sets");
    for u in targets {
        assert!(res.flip_set.iter().filter(|&(a, b)| a == *u || b == *u).count() <= 2);
    }
    (base, got, best)
}
