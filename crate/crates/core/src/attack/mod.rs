//! The alternating attack on LinLBP.
//!
//! Each outer iteration runs
//!
//! * **Step I**: propagate posteriors on the graph with the current binary
//!   flips laid over it;
//! * **Step II**: for every target row, a few projected-gradient steps on
//!   the relaxed row b̃_u (starting from the previous binary row), then
//!   binarization, then the target–target symmetrization pass.
//!
//! Only rows owned by target nodes are optimized; pairs of two non-targets
//! are never touched.

mod projection;

use std::fmt;

pub use projection::{project_into, project_row, threshold};

use crate::cost::{adjusted_cost_row, PairCosts};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::graph::{FlipSet, Graph, Label, NodeId, TrainingSet};
use crate::propagation::{assign_priors, misclassified_count, propagate_with, LinLbpParams, Overlay};

/// Subgradient choice for sign(b̃_uv − a_uv) when b̃_uv equals a_uv.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KinkRule {
    /// sign(0) = 0.
    Zero,
    /// The one-sided derivative of |a − b| inside the box: +1 where the pair
    /// is absent (a = 0), −1 where it exists. This equals sign(b̃ − a) at
    /// every point with b̃ ≠ a.
    #[default]
    Feasible,
}

/// How a relaxed row is rounded to at most K ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BinarizeRule {
    /// Entries above 0.5 survive; keep the K largest survivors.
    ThresholdThenTopK,
    /// Keep the K largest strictly positive entries.
    #[default]
    TopKPositive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackConfig {
    /// Lagrange multiplier on Σ_T p_u.
    pub lambda: f64,
    /// Projected-gradient step size.
    pub eta: f64,
    /// Per-node modification budget K.
    pub budget_k: usize,
    pub inner_iters: usize,
    pub outer_iters: usize,
    /// Stop after this many consecutive iterations with the same number of
    /// misclassified targets.
    pub fnr_stall_window: usize,
    pub kink_rule: KinkRule,
    pub binarize_rule: BinarizeRule,
    /// Return the iterate that misclassified the most targets under the
    /// attacker's model (earliest on ties) instead of the last one.
    pub keep_best: bool,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            lambda: 1_000.0,
            eta: 0.1,
            budget_k: 20,
            inner_iters: 4,
            outer_iters: 10,
            fnr_stall_window: 2,
            kink_rule: KinkRule::default(),
            binarize_rule: BinarizeRule::default(),
            keep_best: true,
        }
    }
}

impl AttackConfig {
    /// Defaults with λ = 10,000, used for categorical costs.
    pub fn categorical() -> Self {
        AttackConfig {
            lambda: 10_000.0,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::invalid(format!("lambda {} must be positive", self.lambda)));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::invalid(format!("eta {} must be positive", self.eta)));
        }
        if self.inner_iters == 0 || self.outer_iters == 0 || self.fnr_stall_window == 0 {
            return Err(Error::invalid(
                "inner_iters, outer_iters and fnr_stall_window must be positive",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum FlipKind {
    Insert,
    Delete,
}

impl fmt::Display for FlipKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlipKind::Insert => "insert",
            FlipKind::Delete => "delete",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flip {
    pub u: NodeId,
    pub v: NodeId,
    pub kind: FlipKind,
    pub cost: f64,
}

/// Annotates each pair with its kind against `g` and its cost.
pub fn describe_flips(g: &Graph, flips: &FlipSet, costs: &dyn PairCosts) -> Vec<Flip> {
    flips
        .iter()
        .map(|(u, v)| Flip {
            u,
            v,
            kind: if g.has_edge(u, v) {
                FlipKind::Delete
            } else {
                FlipKind::Insert
            },
            cost: costs.cost(u, v),
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackResult {
    pub flip_set: FlipSet,
    pub flips: Vec<Flip>,
    /// FNR before the attack followed by the FNR after each outer iteration.
    pub fnr_history: Vec<f64>,
    pub total_cost: f64,
    pub edges_added: usize,
    pub edges_deleted: usize,
    pub iterations: usize,
    /// Index into `fnr_history` of the returned flip set.
    pub returned_iteration: usize,
    /// Posterior on the attacked graph under the attacker's parameters.
    pub posterior: Vec<f64>,
}

impl AttackResult {
    pub fn final_fnr(&self) -> f64 {
        self.fnr_history[self.returned_iteration]
    }

    pub fn modified_edges(&self) -> usize {
        self.flips.len()
    }
}

/// Optimization state of one target row.
#[derive(Debug, Clone)]
pub struct RowState {
    /// Relaxed row b̃_u, graph length.
    pub continuous: Vec<f64>,
    /// Gradient-step scratch s_u.
    pub scratch: Vec<f64>,
    /// Binary row b̄_u as the sorted list of flipped partners.
    pub binary: Vec<NodeId>,
}

/// Per-target optimization state. Row `i` belongs to `targets[i]`.
#[derive(Debug, Clone)]
pub struct PerturbationState {
    pub targets: Vec<NodeId>,
    pub rows: Vec<RowState>,
}

impl PerturbationState {
    pub fn new(targets: Vec<NodeId>, n: usize) -> Self {
        let rows = targets
            .iter()
            .map(|_| RowState {
                continuous: vec![0.0; n],
                scratch: vec![0.0; n],
                binary: Vec::new(),
            })
            .collect();
        PerturbationState { targets, rows }
    }

    /// Distinct pairs selected by the binary rows.
    pub fn flip_set(&self) -> FlipSet {
        let mut s = FlipSet::new();
        for (&u, row) in self.targets.iter().zip(&self.rows) {
            for &v in &row.binary {
                s.insert(u, v);
            }
        }
        s
    }

    /// Number of flipped pairs touching each node.
    pub fn flip_count_per_node(&self, n: usize) -> Vec<usize> {
        let mut counts = vec![0; n];
        for (u, v) in self.flip_set().iter() {
            counts[u as usize] += 1;
            counts[v as usize] += 1;
        }
        counts
    }

    /// Applies the target–target product rule to the binary rows.
    pub fn symmetrize(&mut self) {
        let mut binary: Vec<Vec<NodeId>> =
            self.rows.iter_mut().map(|r| std::mem::take(&mut r.binary)).collect();
        symmetrize_targets(&self.targets, &mut binary);
        for (r, b) in self.rows.iter_mut().zip(binary) {
            r.binary = b;
        }
    }
}

/// ∂F̃/∂b̃_u: c_uv + λ · σ_uv · w · p_v, zero on the diagonal.
///
/// `adjacent[v]` is a_uv. σ_uv = sign(b̃_uv − a_uv), with the value at
/// b̃_uv = a_uv picked by `rule`.
#[allow(clippy::too_many_arguments)]
pub fn gradient_into(
    u: NodeId,
    p: &[f64],
    b_tilde: &[f64],
    adjacent: &[bool],
    c_u: &[f64],
    weight: f64,
    lambda: f64,
    rule: KinkRule,
    out: &mut [f64],
) -> Result<()> {
    let scale = lambda * weight;
    for v in 0..out.len() {
        let pv = p[v];
        if !pv.is_finite() {
            return Err(Error::Diverged { node: v, iteration: 0 });
        }
        if v == u as usize {
            out[v] = 0.0;
            continue;
        }
        let a = if adjacent[v] { 1.0 } else { 0.0 };
        let sigma = match rule {
            KinkRule::Feasible => 1.0 - 2.0 * a,
            KinkRule::Zero => {
                let d = b_tilde[v] - a;
                if d > 0.0 {
                    1.0
                } else if d < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        };
        out[v] = c_u[v] + scale * sigma * pv;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
pub fn gradient_row(
    u: NodeId,
    p: &[f64],
    b_tilde: &[f64],
    adjacent: &[bool],
    c_u: &[f64],
    weight: f64,
    lambda: f64,
    rule: KinkRule,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; p.len()];
    gradient_into(u, p, b_tilde, adjacent, c_u, weight, lambda, rule, &mut out)?;
    Ok(out)
}

/// Dense a_u from the sorted neighbor list.
pub fn adjacency_mask(g: &Graph, u: NodeId) -> Vec<bool> {
    let mut m = vec![false; g.node_count()];
    for &v in g.neighbors(u) {
        m[v as usize] = true;
    }
    m
}

/// Inputs shared by every target during one Step II.
pub struct RowContext<'a> {
    pub posterior: &'a [f64],
    pub weight: f64,
    pub config: &'a AttackConfig,
}

/// `inner_iters` rounds of s ← b̃ − η ∇, b̃ ← proj(s), starting from the
/// binary row `start`. Leaves the result in `b_tilde`.
pub fn pgd_inner(
    u: NodeId,
    start: &[NodeId],
    adjacent: &[bool],
    c_u: &[f64],
    ctx: &RowContext<'_>,
    b_tilde: &mut [f64],
    scratch: &mut [f64],
) -> Result<()> {
    let cfg = ctx.config;
    b_tilde.fill(0.0);
    for &v in start {
        b_tilde[v as usize] = 1.0;
    }
    for _ in 0..cfg.inner_iters {
        gradient_into(
            u,
            ctx.posterior,
            b_tilde,
            adjacent,
            c_u,
            ctx.weight,
            cfg.lambda,
            cfg.kink_rule,
            scratch,
        )?;
        for (s, &b) in scratch.iter_mut().zip(b_tilde.iter()) {
            *s = b - cfg.eta * *s;
        }
        scratch[u as usize] = 0.0;
        project_into(scratch, cfg.budget_k as f64, b_tilde)?;
    }
    Ok(())
}

/// Rounds a relaxed row to at most `k` ones, returned as sorted indices.
/// Ties among equal values go to the lower index.
pub fn binarize_row(b_tilde: &[f64], k: usize, rule: BinarizeRule) -> Vec<NodeId> {
    let floor = match rule {
        BinarizeRule::ThresholdThenTopK => 0.5,
        BinarizeRule::TopKPositive => 0.0,
    };
    let mut cand: Vec<NodeId> = (0..b_tilde.len() as NodeId)
        .filter(|&v| b_tilde[v as usize] > floor)
        .collect();
    if cand.len() > k {
        cand.sort_by(|&a, &b| {
            b_tilde[b as usize]
                .total_cmp(&b_tilde[a as usize])
                .then(a.cmp(&b))
        });
        cand.truncate(k);
        cand.sort_unstable();
    }
    cand
}

/// B̄_uv = B̄_vu ← B̄_uv · B̄_vu for every pair of targets. `targets` is
/// sorted and row `i` of `rows` belongs to `targets[i]`.
pub fn symmetrize_targets(targets: &[NodeId], rows: &mut [Vec<NodeId>]) {
    let snapshot: Vec<Vec<NodeId>> = rows.to_vec();
    for (i, row) in rows.iter_mut().enumerate() {
        let u = targets[i];
        row.retain(|&v| match targets.binary_search(&v) {
            Ok(j) => snapshot[j].binary_search(&u).is_ok(),
            Err(_) => true,
        });
    }
}

struct TargetRow {
    u: NodeId,
    adjacent: Vec<bool>,
    costs: Vec<f64>,
}

pub fn run_attack(
    g: &Graph,
    train: &TrainingSet,
    targets: &[NodeId],
    costs: &dyn PairCosts,
    params: &LinLbpParams,
    cfg: &AttackConfig,
) -> Result<AttackResult> {
    run_attack_with(g, train, targets, costs, params, cfg, Execution::default())
}

pub fn run_attack_with(
    g: &Graph,
    train: &TrainingSet,
    targets: &[NodeId],
    costs: &dyn PairCosts,
    params: &LinLbpParams,
    cfg: &AttackConfig,
    exec: Execution,
) -> Result<AttackResult> {
    cfg.validate()?;
    params.validate()?;
    let n = g.node_count();
    let mut targets = targets.to_vec();
    targets.sort_unstable();
    targets.dedup();
    if targets.is_empty() {
        return Err(Error::invalid("empty target set"));
    }
    if let Some(&u) = targets
        .iter()
        .find(|&&u| (u as usize) >= n || g.label(u) != Label::Positive)
    {
        return Err(Error::invalid(format!("target {u} is not a positive node")));
    }

    let q = assign_priors(g, train, params);
    let rows: Vec<TargetRow> = exec.map_range(targets.len(), |i| {
        let u = targets[i];
        TargetRow {
            u,
            adjacent: adjacency_mask(g, u),
            costs: adjusted_cost_row(costs, u, &targets, n),
        }
    });
    let mut state = PerturbationState::new(targets.clone(), n);

    let mut posterior = propagate_with(g, &q, params, None, exec)?.posterior;
    let mut counts = vec![misclassified_count(&posterior, &targets)];
    let t_len = targets.len() as f64;
    let mut iterations = 0;
    let mut best = (0, FlipSet::new(), posterior.clone());

    while iterations < cfg.outer_iters {
        iterations += 1;
        // Step II against the Step-I posterior
        let ctx = RowContext {
            posterior: &posterior,
            weight: params.weight,
            config: cfg,
        };
        let mut errors: Vec<Option<Error>> = (0..targets.len()).map(|_| None).collect();
        let mut jobs: Vec<(&mut RowState, &mut Option<Error>)> =
            state.rows.iter_mut().zip(errors.iter_mut()).collect();
        exec.for_each_mut(&mut jobs, |i, (row, err)| {
            let spec = &rows[i];
            let RowState { continuous, scratch, binary } = &mut **row;
            match pgd_inner(spec.u, binary, &spec.adjacent, &spec.costs, &ctx, continuous, scratch) {
                Ok(()) => *binary = binarize_row(continuous, cfg.budget_k, cfg.binarize_rule),
                Err(e) => **err = Some(e),
            }
        });
        drop(jobs);
        if let Some(e) = errors.into_iter().flatten().next() {
            return Err(e);
        }
        state.symmetrize();

        // Step I for the next iteration doubles as this iteration's score
        let overlay = Overlay::from_flips(&state.flip_set());
        posterior = propagate_with(g, &q, params, Some(&overlay), exec)?.posterior;
        counts.push(misclassified_count(&posterior, &targets));
        if cfg.keep_best && counts[iterations] > counts[best.0] {
            best = (iterations, state.flip_set(), posterior.clone());
        }

        let w = cfg.fnr_stall_window;
        if iterations >= w {
            let tail = &counts[counts.len() - w..];
            if tail.iter().all(|&c| c == tail[0]) {
                break;
            }
        }
    }

    let (returned_iteration, flip_set, posterior) = if cfg.keep_best {
        best
    } else {
        (iterations, state.flip_set(), posterior)
    };
    let flips = describe_flips(g, &flip_set, costs);
    let edges_added = flips.iter().filter(|f| f.kind == FlipKind::Insert).count();
    let total_cost = flips.iter().map(|f| f.cost).sum();
    Ok(AttackResult {
        edges_deleted: flips.len() - edges_added,
        edges_added,
        total_cost,
        flips,
        flip_set,
        fnr_history: counts.iter().map(|&c| c as f64 / t_len).collect(),
        iterations,
        returned_iteration,
        posterior,
    })
}
