//! Partial-knowledge attacks: substitute LinLBP parameters, a substitute
//! training set, and/or a partial view of the negative subgraph. The attack
//! runs on the attacker's view; its flips are mapped back and scored with
//! the defender's true graph, parameters and training set.

use std::borrow::Cow;
use std::collections::HashMap;

use rand::seq::index;
use rand::Rng;

use crate::attack::{describe_flips, run_attack_with, AttackConfig, AttackResult, Flip};
use crate::cost::{CostModel, GraphCosts};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::graph::{extract_partial_graph, FlipSet, Graph, Label, NodeId, TrainingSet};
use crate::propagation::{assign_priors, fnr, propagate_with, LinLbpParams, Overlay};
use crate::rng::stage_rng;

pub const SUBSTITUTE_TRAINING_DEFAULT: usize = 400;
pub const SUBSTITUTE_WEIGHT_DEFAULT: f64 = 0.05;
pub const PARTIAL_TAU_DEFAULT: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParameterKnowledge {
    True,
    Substitute { theta: f64, weight: f64 },
    /// θ' and w' drawn uniformly from (0, 1] and (0, 0.5].
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrainingKnowledge {
    True,
    Substitute { size: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphKnowledge {
    Complete,
    Partial { tau_percent: f64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioSpec {
    pub parameter: ParameterKnowledge,
    pub training: TrainingKnowledge,
    pub graph: GraphKnowledge,
}

impl ScenarioSpec {
    pub fn full_knowledge() -> Self {
        ScenarioSpec {
            parameter: ParameterKnowledge::True,
            training: TrainingKnowledge::True,
            graph: GraphKnowledge::Complete,
        }
    }

    /// Least knowledge: substitute parameters (true θ, w' = 0.05), a
    /// 400-node substitute training set, and a 20% partial graph.
    pub fn least_knowledge(theta: f64, seed: u64) -> Self {
        ScenarioSpec {
            parameter: ParameterKnowledge::Substitute {
                theta,
                weight: SUBSTITUTE_WEIGHT_DEFAULT,
            },
            training: TrainingKnowledge::Substitute {
                size: SUBSTITUTE_TRAINING_DEFAULT,
                seed: crate::rng::derive_seed(seed, "substitute-training"),
            },
            graph: GraphKnowledge::Partial {
                tau_percent: PARTIAL_TAU_DEFAULT,
                seed: crate::rng::derive_seed(seed, "partial-graph"),
            },
        }
    }

    pub fn is_full_knowledge(&self) -> bool {
        *self == Self::full_knowledge()
    }

    pub fn validate(&self) -> Result<()> {
        if let ParameterKnowledge::Substitute { theta, weight } = self.parameter {
            LinLbpParams {
                theta,
                weight,
                ..LinLbpParams::default()
            }
            .validate()?;
        }
        if let TrainingKnowledge::Substitute { size, .. } = self.training {
            if size < 2 || size % 2 != 0 {
                return Err(Error::invalid(format!(
                    "substitute training size {size} must be even and at least 2"
                )));
            }
        }
        if let GraphKnowledge::Partial { tau_percent, .. } = self.graph {
            if !(tau_percent > 0.0 && tau_percent <= 100.0) {
                return Err(Error::invalid(format!("tau {tau_percent} outside (0, 100]")));
            }
        }
        Ok(())
    }
}

/// `size / 2` random positives as labeled positives and `size / 2` random
/// non-positive nodes as labeled negatives.
pub fn substitute_training(g: &Graph, size: usize, seed: u64) -> Result<TrainingSet> {
    if size < 2 || !size.is_multiple_of(2) {
        return Err(Error::invalid(format!(
            "substitute training size {size} must be even and at least 2"
        )));
    }
    let half = size / 2;
    let pos = g.nodes_with_label(Label::Positive);
    let rest: Vec<NodeId> = (0..g.node_count() as NodeId)
        .filter(|&u| g.label(u) != Label::Positive)
        .collect();
    for (what, pool) in [("positive nodes", &pos), ("non-positive nodes", &rest)] {
        if pool.len() < half {
            return Err(Error::Insufficient {
                what,
                needed: half,
                available: pool.len(),
            });
        }
    }
    let mut rng = stage_rng(seed);
    let pick = |rng: &mut crate::rng::StageRng, pool: &[NodeId]| -> Vec<NodeId> {
        index::sample(rng, pool.len(), half)
            .into_iter()
            .map(|i| pool[i])
            .collect()
    };
    let positive = pick(&mut rng, &pos);
    let negative = pick(&mut rng, &rest);
    Ok(TrainingSet::new(positive, negative))
}

/// Parameters the attacker works with.
pub fn attacker_params(spec: &ScenarioSpec, truth: &LinLbpParams) -> LinLbpParams {
    match spec.parameter {
        ParameterKnowledge::True => *truth,
        ParameterKnowledge::Substitute { theta, weight } => LinLbpParams {
            theta,
            weight,
            ..*truth
        },
        ParameterKnowledge::Random { seed } => {
            let mut rng = stage_rng(seed);
            // 1 − U[0,1) lies in (0, 1]
            let theta = 1.0 - rng.gen::<f64>();
            let weight = 0.5 * (1.0 - rng.gen::<f64>());
            LinLbpParams {
                theta,
                weight,
                ..*truth
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    /// Attack as run on the attacker's view (view ids).
    pub attack: AttackResult,
    /// Flips in true-graph ids.
    pub flip_set: FlipSet,
    /// Flips annotated against the true graph with true costs.
    pub flips: Vec<Flip>,
    pub total_cost: f64,
    /// Target FNR under the defender's true configuration.
    pub fnr: f64,
    /// Defender's posterior on the attacked true graph.
    pub posterior: Vec<f64>,
    pub attacker_params: LinLbpParams,
}

#[allow(clippy::too_many_arguments)]
pub fn run_scenario(
    g_true: &Graph,
    train_true: &TrainingSet,
    params_true: &LinLbpParams,
    spec: &ScenarioSpec,
    targets: &[NodeId],
    cost_model: &CostModel,
    cfg: &AttackConfig,
    exec: Execution,
) -> Result<ScenarioOutcome> {
    spec.validate()?;
    let n = g_true.node_count();

    // attacker's view and view ↔ true id maps
    let (view, to_true): (Cow<'_, Graph>, Option<Vec<NodeId>>) = match spec.graph {
        GraphKnowledge::Complete => (Cow::Borrowed(g_true), None),
        GraphKnowledge::Partial { tau_percent, seed } => {
            let p = extract_partial_graph(g_true, tau_percent, seed)?;
            (Cow::Owned(p.graph), Some(p.to_full))
        }
    };
    let to_view: Option<HashMap<NodeId, NodeId>> = to_true.as_ref().map(|m| {
        m.iter()
            .enumerate()
            .map(|(i, &u)| (u, i as NodeId))
            .collect()
    });
    let view_targets: Vec<NodeId> = match &to_view {
        None => targets.to_vec(),
        Some(map) => targets
            .iter()
            .map(|u| {
                map.get(u).copied().ok_or_else(|| {
                    Error::invalid(format!("target {u} missing from the partial view"))
                })
            })
            .collect::<Result<_>>()?,
    };
    let view_train = match spec.training {
        TrainingKnowledge::True => match &to_view {
            None => train_true.clone(),
            Some(map) => train_true.restrict(map),
        },
        TrainingKnowledge::Substitute { size, seed } => substitute_training(&view, size, seed)?,
    };
    let params = attacker_params(spec, params_true);
    let costs = match &to_true {
        None => GraphCosts::new(cost_model, g_true.labels()),
        Some(m) => GraphCosts::mapped(cost_model, g_true.labels(), m),
    };

    let attack = run_attack_with(&view, &view_train, &view_targets, &costs, &params, cfg, exec)?;

    let flip_set = match &to_true {
        None => attack.flip_set.clone(),
        Some(m) => attack.flip_set.remap(m),
    };
    if let Some((u, v)) = flip_set.iter().find(|&(u, v)| u as usize >= n || v as usize >= n) {
        return Err(Error::invalid(format!(
            "flip ({u}, {v}) maps outside the true graph"
        )));
    }
    let true_costs = GraphCosts::new(cost_model, g_true.labels());
    let flips = describe_flips(g_true, &flip_set, &true_costs);
    let total_cost = flips.iter().map(|f| f.cost).sum();

    let q = assign_priors(g_true, train_true, params_true);
    let overlay = Overlay::from_flips(&flip_set);
    let posterior = propagate_with(g_true, &q, params_true, Some(&overlay), exec)?.posterior;
    let fnr = fnr(&posterior, targets)?;
    Ok(ScenarioOutcome {
        attack,
        flip_set,
        flips,
        total_cost,
        fnr,
        posterior,
        attacker_params: params,
    })
}
