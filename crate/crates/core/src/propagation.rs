//! LinLBP priors, posterior propagation, classification metrics, and the
//! random-walk classifier used for transfer evaluation.

use std::collections::HashMap;
use std::io::Write;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::graph::{FlipSet, Graph, Label, NodeId, TrainingSet};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinLbpParams {
    /// Prior magnitude, in (0, 1].
    pub theta: f64,
    /// Uniform edge weight, in (0, 0.5].
    pub weight: f64,
    pub max_iters: usize,
    /// Stop once the L∞ change between sweeps falls below this.
    pub tol: f64,
}

impl Default for LinLbpParams {
    fn default() -> Self {
        LinLbpParams {
            theta: 0.5,
            weight: 0.01,
            max_iters: 100,
            tol: 1e-4,
        }
    }
}

impl LinLbpParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::invalid(format!("theta {} outside (0, 1]", self.theta)));
        }
        if !(self.weight > 0.0 && self.weight <= 0.5) {
            return Err(Error::invalid(format!("weight {} outside (0, 0.5]", self.weight)));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be positive"));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(Error::invalid("tol must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorState {
    pub prior: Vec<f64>,
    pub posterior: Vec<f64>,
    pub iterations_run: usize,
    pub converged: bool,
}

/// Toggled pairs laid over a graph without materializing it.
#[derive(Debug, Clone, Default)]
pub struct Overlay {
    partners: HashMap<NodeId, Vec<NodeId>>,
}

impl Overlay {
    pub fn from_flips(flips: &FlipSet) -> Self {
        Overlay {
            partners: flips.partners(),
        }
    }

    pub fn partners(&self, u: NodeId) -> &[NodeId] {
        self.partners.get(&u).map_or(&[], Vec::as_slice)
    }

    pub fn is_empty(&self) -> bool {
        self.partners.is_empty()
    }
}

/// q_u = θ on labeled positives, −θ on labeled negatives, 0 elsewhere.
pub fn assign_priors(g: &Graph, train: &TrainingSet, params: &LinLbpParams) -> Vec<f64> {
    let mut q = vec![0.0; g.node_count()];
    for &u in &train.positive {
        q[u as usize] = params.theta;
    }
    for &u in &train.negative {
        q[u as usize] = -params.theta;
    }
    q
}

/// Σ p_v over the effective neighbors of `u`, in ascending neighbor order.
/// The effective row is adj(u) Δ flips(u); summing over the merged order
/// gives the same bits as summing over a materialized graph.
#[inline]
fn neighbor_sum(adj: &[NodeId], flips: &[NodeId], p: &[f64]) -> f64 {
    if flips.is_empty() {
        return adj.iter().map(|&v| p[v as usize]).sum();
    }
    let mut acc = 0.0;
    let (mut i, mut j) = (0, 0);
    while i < adj.len() && j < flips.len() {
        match adj[i].cmp(&flips[j]) {
            std::cmp::Ordering::Less => {
                acc += p[adj[i] as usize];
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                acc += p[flips[j] as usize];
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    for &v in &adj[i..] {
        acc += p[v as usize];
    }
    for &v in &flips[j..] {
        acc += p[v as usize];
    }
    acc
}

/// One update `next = q + w · Â prev` over the effective graph Â.
pub fn sweep(
    g: &Graph,
    q: &[f64],
    prev: &[f64],
    next: &mut [f64],
    weight: f64,
    overlay: Option<&Overlay>,
    exec: Execution,
) {
    exec.for_each_mut(next, |u, out| {
        let u = u as NodeId;
        let flips = overlay.map_or(&[][..], |o| o.partners(u));
        *out = q[u as usize] + weight * neighbor_sum(g.neighbors(u), flips, prev);
    });
}

pub fn propagate(
    g: &Graph,
    q: &[f64],
    params: &LinLbpParams,
    overlay: Option<&Overlay>,
) -> Result<PosteriorState> {
    propagate_with(g, q, params, overlay, Execution::default())
}

/// Iterates p ← q + w·Â p from p = q until the L∞ step drops below `tol`
/// or `max_iters` sweeps have run.
pub fn propagate_with(
    g: &Graph,
    q: &[f64],
    params: &LinLbpParams,
    overlay: Option<&Overlay>,
    exec: Execution,
) -> Result<PosteriorState> {
    params.validate()?;
    if q.len() != g.node_count() {
        return Err(Error::invalid(format!(
            "prior has length {} for {} nodes",
            q.len(),
            g.node_count()
        )));
    }
    let mut prev = q.to_vec();
    let mut next = vec![0.0; q.len()];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < params.max_iters {
        iterations += 1;
        sweep(g, q, &prev, &mut next, params.weight, overlay, exec);
        let mut delta: f64 = 0.0;
        for (u, (a, b)) in next.iter().zip(&prev).enumerate() {
            if !a.is_finite() {
                return Err(Error::Diverged {
                    node: u,
                    iteration: iterations,
                });
            }
            delta = delta.max((a - b).abs());
        }
        std::mem::swap(&mut prev, &mut next);
        if delta < params.tol {
            converged = true;
            break;
        }
    }
    Ok(PosteriorState {
        prior: q.to_vec(),
        posterior: prev,
        iterations_run: iterations,
        converged,
    })
}

/// Negative iff the score is strictly below zero.
#[inline]
pub fn classify_score(p: f64) -> Label {
    if p < 0.0 {
        Label::Negative
    } else {
        Label::Positive
    }
}

pub fn classify(p: &[f64]) -> Vec<Label> {
    p.iter().map(|&x| classify_score(x)).collect()
}

/// Number of `targets` with a negative score.
pub fn misclassified_count(p: &[f64], targets: &[NodeId]) -> usize {
    targets.iter().filter(|&&u| p[u as usize] < 0.0).count()
}

/// Fraction of target nodes classified negative.
pub fn fnr(p: &[f64], targets: &[NodeId]) -> Result<f64> {
    if targets.is_empty() {
        return Err(Error::invalid("empty target set"));
    }
    Ok(misclassified_count(p, targets) as f64 / targets.len() as f64)
}

/// Fraction of negative test nodes (negatives outside the training set)
/// classified positive.
pub fn fpr(p: &[f64], g: &Graph, train: &TrainingSet) -> Result<f64> {
    let mut total = 0usize;
    let mut wrong = 0usize;
    for u in 0..g.node_count() as NodeId {
        if g.label(u) == Label::Negative && !train.contains(u) {
            total += 1;
            if p[u as usize] >= 0.0 {
                wrong += 1;
            }
        }
    }
    if total == 0 {
        return Err(Error::invalid("no negative test nodes"));
    }
    Ok(wrong as f64 / total as f64)
}

pub const RW_DEFAULT_ITERS: usize = 10;

/// Random-walk scores: priors 1 / 0 / 0.5 for labeled positive / labeled
/// negative / other, then `iters` rounds of p_u ← Σ_{v∈adj(u)} p_v / deg(v)
/// with labeled nodes clamped. Isolated nodes keep their prior.
pub fn rw_scores(g: &Graph, train: &TrainingSet, iters: usize) -> Vec<f64> {
    let n = g.node_count();
    let mut clamp: Vec<Option<f64>> = vec![None; n];
    for &u in &train.positive {
        clamp[u as usize] = Some(1.0);
    }
    for &u in &train.negative {
        clamp[u as usize] = Some(0.0);
    }
    let mut p: Vec<f64> = clamp.iter().map(|c| c.unwrap_or(0.5)).collect();
    let mut next = p.clone();
    let exec = Execution::default();
    for _ in 0..iters {
        exec.for_each_mut(&mut next, |u, out| {
            if let Some(c) = clamp[u] {
                *out = c;
                return;
            }
            let nbrs = g.neighbors(u as NodeId);
            if nbrs.is_empty() {
                *out = p[u];
                return;
            }
            *out = nbrs
                .iter()
                .map(|&v| p[v as usize] / g.degree(v) as f64)
                .sum();
        });
        std::mem::swap(&mut p, &mut next);
    }
    p
}

/// Positive iff the random-walk score is at least 0.5.
pub fn rw_classify(g: &Graph, train: &TrainingSet, iters: usize) -> Vec<Label> {
    rw_scores(g, train, iters)
        .into_iter()
        .map(|s| if s >= 0.5 { Label::Positive } else { Label::Negative })
        .collect()
}

/// Fraction of targets a label vector calls negative.
pub fn label_fnr(labels: &[Label], targets: &[NodeId]) -> Result<f64> {
    if targets.is_empty() {
        return Err(Error::invalid("empty target set"));
    }
    let neg = targets
        .iter()
        .filter(|&&u| labels[u as usize] == Label::Negative)
        .count();
    Ok(neg as f64 / targets.len() as f64)
}

/// `node_id,posterior,label` rows.
pub fn write_posteriors_csv<W: Write>(mut w: W, p: &[f64]) -> std::io::Result<()> {
    writeln!(w, "node_id,posterior,label")?;
    for (u, &x) in p.iter().enumerate() {
        writeln!(w, "{u},{x:e},{}", classify_score(x).as_char())?;
    }
    Ok(())
}
