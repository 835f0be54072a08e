//! Per-pair modification costs.

use rand::seq::index;

use crate::error::{Error, Result};
use crate::graph::{FlipSet, Graph, Label, NodeId};
use crate::rng::{mix64, stage_rng, unit_f64};

pub const CATEGORICAL_COMPROMISED_DEFAULT: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub enum CostModel {
    /// Every pair costs 1.
    Equal,
    /// Stateless pseudo-random cost in `[lo, hi]`, keyed by the unordered
    /// pair and the seed.
    Uniform { lo: f64, hi: f64, seed: u64 },
    /// Positive–positive, positive–compromised, positive–other costs.
    /// `compromised` is sorted.
    Categorical {
        pos_pos: f64,
        pos_compromised: f64,
        pos_uncompromised: f64,
        compromised: Vec<NodeId>,
    },
}

impl CostModel {
    pub fn uniform(seed: u64) -> Self {
        CostModel::Uniform {
            lo: 1.0,
            hi: 10.0,
            seed,
        }
    }

    /// Categorical costs (1, 10, 100) with `count` compromised negatives
    /// drawn uniformly.
    pub fn categorical(g: &Graph, count: usize, seed: u64) -> Result<Self> {
        let negatives = g.nodes_with_label(Label::Negative);
        if negatives.len() < count {
            return Err(Error::Insufficient {
                what: "negative nodes to compromise",
                needed: count,
                available: negatives.len(),
            });
        }
        let mut rng = stage_rng(seed);
        let mut compromised: Vec<NodeId> = index::sample(&mut rng, negatives.len(), count)
            .into_iter()
            .map(|i| negatives[i])
            .collect();
        compromised.sort_unstable();
        Ok(CostModel::Categorical {
            pos_pos: 1.0,
            pos_compromised: 10.0,
            pos_uncompromised: 100.0,
            compromised,
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CostModel::Equal => "equal",
            CostModel::Uniform { .. } => "uniform",
            CostModel::Categorical { .. } => "categorical",
        }
    }

    pub fn validate(&self, labels: &[Label]) -> Result<()> {
        match self {
            CostModel::Equal => Ok(()),
            CostModel::Uniform { lo, hi, .. } => {
                if lo.is_finite() && hi.is_finite() && *lo > 0.0 && lo <= hi {
                    Ok(())
                } else {
                    Err(Error::invalid(format!("uniform cost interval [{lo}, {hi}] invalid")))
                }
            }
            CostModel::Categorical { compromised, .. } => {
                for &u in compromised {
                    if labels.get(u as usize) != Some(&Label::Negative) {
                        return Err(Error::invalid(format!(
                            "compromised node {u} is not a negative node"
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// C_uv. Symmetric in `u`, `v`.
    pub fn pair_cost(&self, u: NodeId, v: NodeId, labels: &[Label]) -> Result<f64> {
        if u == v {
            return Err(Error::invalid(format!("self-pair ({u}, {u}) has no cost")));
        }
        Ok(self.pair_cost_unchecked(u, v, labels))
    }

    #[inline]
    pub(crate) fn pair_cost_unchecked(&self, u: NodeId, v: NodeId, labels: &[Label]) -> f64 {
        match self {
            CostModel::Equal => 1.0,
            CostModel::Uniform { lo, hi, seed } => {
                let (a, b) = (u.min(v) as u64, u.max(v) as u64);
                let bits = mix64(mix64(seed ^ 0x243f_6a88_85a3_08d3) ^ ((a << 32) | b));
                lo + (hi - lo) * unit_f64(bits)
            }
            CostModel::Categorical {
                pos_pos,
                pos_compromised,
                pos_uncompromised,
                compromised,
            } => {
                let pu = labels[u as usize] == Label::Positive;
                let pv = labels[v as usize] == Label::Positive;
                match (pu, pv) {
                    (true, true) => *pos_pos,
                    (true, false) | (false, true) => {
                        let other = if pu { v } else { u };
                        if compromised.binary_search(&other).is_ok() {
                            *pos_compromised
                        } else {
                            *pos_uncompromised
                        }
                    }
                    // never touched by the attack
                    (false, false) => *pos_uncompromised,
                }
            }
        }
    }

    /// Σ C_uv over the flipped pairs, each counted once.
    pub fn total_cost(&self, flips: &FlipSet, labels: &[Label]) -> f64 {
        flips
            .iter()
            .map(|(u, v)| self.pair_cost_unchecked(u, v, labels))
            .sum()
    }
}

/// Pair costs as seen by the attack engine, in the engine's node ids.
pub trait PairCosts: Sync {
    fn cost(&self, u: NodeId, v: NodeId) -> f64;
}

/// A cost model bound to true labels, optionally through a view→true id
/// map so a partial view is charged the true pair costs.
#[derive(Debug, Clone, Copy)]
pub struct GraphCosts<'a> {
    pub model: &'a CostModel,
    pub labels: &'a [Label],
    pub to_true: Option<&'a [NodeId]>,
}

impl<'a> GraphCosts<'a> {
    pub fn new(model: &'a CostModel, labels: &'a [Label]) -> Self {
        GraphCosts {
            model,
            labels,
            to_true: None,
        }
    }

    pub fn mapped(model: &'a CostModel, labels: &'a [Label], to_true: &'a [NodeId]) -> Self {
        GraphCosts {
            model,
            labels,
            to_true: Some(to_true),
        }
    }
}

impl PairCosts for GraphCosts<'_> {
    #[inline]
    fn cost(&self, u: NodeId, v: NodeId) -> f64 {
        match self.to_true {
            Some(m) => self
                .model
                .pair_cost_unchecked(m[u as usize], m[v as usize], self.labels),
            None => self.model.pair_cost_unchecked(u, v, self.labels),
        }
    }
}

/// Adjusted cost row c_u: C_uv off the target set, C_uv / 2 between two
/// targets (those pairs appear in two rows), +∞ on the diagonal.
/// `targets` must be sorted.
pub fn adjusted_cost_row(
    costs: &dyn PairCosts,
    u: NodeId,
    targets: &[NodeId],
    n: usize,
) -> Vec<f64> {
    debug_assert!(targets.binary_search(&u).is_ok(), "row owner must be a target");
    let mut row: Vec<f64> = (0..n as NodeId)
        .map(|v| if v == u { f64::INFINITY } else { costs.cost(u, v) })
        .collect();
    for &v in targets {
        if v != u {
            row[v as usize] /= 2.0;
        }
    }
    row
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels() -> Vec<Label> {
        vec![
            Label::Positive,
            Label::Positive,
            Label::Negative,
            Label::Negative,
            Label::Negative,
        ]
    }

    fn categorical() -> CostModel {
        CostModel::Categorical {
            pos_pos: 1.0,
            pos_compromised: 10.0,
            pos_uncompromised: 100.0,
            compromised: vec![2],
        }
    }

    #[test]
    fn equal_cost() {
        assert_eq!(CostModel::Equal.pair_cost(0, 4, &labels()).unwrap(), 1.0);
        assert!(CostModel::Equal.pair_cost(3, 3, &labels()).is_err());
    }

    #[test]
    fn categorical_cost() {
        let l = labels();
        let m = categorical();
        assert_eq!(m.pair_cost(0, 1, &l).unwrap(), 1.0);
        assert_eq!(m.pair_cost(0, 2, &l).unwrap(), 10.0);
        assert_eq!(m.pair_cost(3, 1, &l).unwrap(), 100.0);
        m.validate(&l).unwrap();
        let bad = CostModel::Categorical {
            pos_pos: 1.0,
            pos_compromised: 10.0,
            pos_uncompromised: 100.0,
            compromised: vec![0],
        };
        assert!(bad.validate(&l).is_err());
    }

    #[test]
    fn uniform_cost_range_and_symmetry() {
        let l = vec![Label::Unlabeled; 300];
        let m = CostModel::uniform(42);
        for u in 0..300 {
            for v in (u + 1)..300 {
                let c = m.pair_cost(u, v, &l).unwrap();
                assert!((1.0..=10.0).contains(&c));
                assert_eq!(c, m.pair_cost(v, u, &l).unwrap());
            }
        }
        assert_ne!(m.pair_cost(1, 2, &l).unwrap(), CostModel::uniform(43).pair_cost(1, 2, &l).unwrap());
    }

    #[test]
    fn adjusted_row() {
        let l = labels();
        let m = CostModel::Equal;
        let costs = GraphCosts::new(&m, &l);
        let row = adjusted_cost_row(&costs, 0, &[0, 1], 5);
        assert_eq!(row[0], f64::INFINITY);
        assert_eq!(row[1], 0.5);
        assert_eq!(&row[2..], &[1.0, 1.0, 1.0]);
        let cat = categorical();
        let row = adjusted_cost_row(&GraphCosts::new(&cat, &l), 1, &[0, 1], 5);
        assert_eq!(row[0], 0.5);
        assert_eq!(row[2], 10.0);
    }

    #[test]
    fn totals() {
        let l = labels();
        assert_eq!(CostModel::Equal.total_cost(&FlipSet::new(), &l), 0.0);
        let flips: FlipSet = [(0, 1), (1, 2), (4, 0)].into_iter().collect();
        assert_eq!(categorical().total_cost(&flips, &l), 111.0);
        assert_eq!(CostModel::Equal.total_cost(&flips, &l), 3.0);
    }

    #[test]
    fn mapped_costs_use_true_ids() {
        let l = labels();
        let m = categorical();
        // view node 0 → true 2 (compromised), view 1 → true 0 (positive)
        let map = [2, 0];
        let c = GraphCosts::mapped(&m, &l, &map);
        assert_eq!(c.cost(0, 1), 10.0);
    }
}
