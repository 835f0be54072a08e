//! Flat `key = value` experiment configuration.
//!
//! Blank lines and `#` comments are ignored. Later assignments win, so
//! command-line overrides are applied with [`ExperimentConfig::set`] after
//! the file is read.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::attack::{AttackConfig, BinarizeRule, KinkRule};
use crate::cost::CATEGORICAL_COMPROMISED_DEFAULT;
use crate::error::{Error, Result};
use crate::propagation::{LinLbpParams, RW_DEFAULT_ITERS};
use crate::scenarios::{
    PARTIAL_TAU_DEFAULT, SUBSTITUTE_TRAINING_DEFAULT, SUBSTITUTE_WEIGHT_DEFAULT,
};
use crate::targets::TargetMethod;

/// Where the graph comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Dataset {
    /// Deterministic clustered surrogate with the node and edge counts of
    /// the SNAP ego-Facebook graph.
    FacebookLike,
    /// SNAP-style edge list. Without a labels file the graph is treated as
    /// all-negative and positives are synthesized.
    File {
        edges: PathBuf,
        labels: Option<PathBuf>,
    },
}

impl Dataset {
    /// Short name for the report.
    pub fn name(&self) -> String {
        match self {
            Dataset::FacebookLike => "facebook-like".to_string(),
            Dataset::File { edges, .. } => edges
                .file_stem()
                .map(|s| s.to_string_lossy().replace(',', "_"))
                .unwrap_or_else(|| "graph".to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Method {
    None,
    Random,
    DelAdd,
    Ours,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::None, Method::Random, Method::DelAdd, Method::Ours];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::None => "none",
            Method::Random => "random",
            Method::DelAdd => "del-add",
            Method::Ours => "ours",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "none" => Ok(Method::None),
            "random" => Ok(Method::Random),
            "del-add" | "deladd" => Ok(Method::DelAdd),
            "ours" | "attack" => Ok(Method::Ours),
            _ => Err(format!("unknown method {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CostKind {
    Equal,
    Uniform,
    Categorical,
}

impl CostKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CostKind::Equal => "equal",
            CostKind::Uniform => "uniform",
            CostKind::Categorical => "categorical",
        }
    }
}

impl FromStr for CostKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "equal" => Ok(CostKind::Equal),
            "uniform" => Ok(CostKind::Uniform),
            "categorical" => Ok(CostKind::Categorical),
            _ => Err(format!("unknown cost kind {s:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    K,
    AttackEdges,
    TargetCount,
    Lambda,
    Eta,
    Tau,
    SubstituteWeight,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepAxis::K => "k",
            SweepAxis::AttackEdges => "attack_edges",
            SweepAxis::TargetCount => "target_count",
            SweepAxis::Lambda => "lambda",
            SweepAxis::Eta => "eta",
            SweepAxis::Tau => "tau",
            SweepAxis::SubstituteWeight => "substitute_w",
        }
    }

    fn integral(self) -> bool {
        matches!(self, SweepAxis::K | SweepAxis::AttackEdges | SweepAxis::TargetCount)
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "k" | "K" => Ok(SweepAxis::K),
            "attack_edges" | "ae" | "AE" => Ok(SweepAxis::AttackEdges),
            "target_count" | "targets" => Ok(SweepAxis::TargetCount),
            "lambda" => Ok(SweepAxis::Lambda),
            "eta" => Ok(SweepAxis::Eta),
            "tau" => Ok(SweepAxis::Tau),
            "substitute_w" => Ok(SweepAxis::SubstituteWeight),
            _ => Err(format!("unknown sweep axis {s:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParameterChoice {
    True,
    Substitute,
    Random,
}

/// Attacker knowledge as written in the config. Seeds are filled in from
/// the master seed when the experiment runs.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeConfig {
    pub parameter: ParameterChoice,
    /// Defaults to the true θ.
    pub substitute_theta: Option<f64>,
    pub substitute_weight: f64,
    pub substitute_training: bool,
    pub substitute_training_size: usize,
    pub partial_graph: bool,
    pub tau_percent: f64,
}

impl Default for KnowledgeConfig {
    fn default() -> Self {
        KnowledgeConfig {
            parameter: ParameterChoice::True,
            substitute_theta: None,
            substitute_weight: SUBSTITUTE_WEIGHT_DEFAULT,
            substitute_training: false,
            substitute_training_size: SUBSTITUTE_TRAINING_DEFAULT,
            partial_graph: false,
            tau_percent: PARTIAL_TAU_DEFAULT,
        }
    }
}

impl KnowledgeConfig {
    pub fn is_full(&self) -> bool {
        self.parameter == ParameterChoice::True && !self.substitute_training && !self.partial_graph
    }

    /// `full`, or the `+`-joined list of substituted components.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        match self.parameter {
            ParameterChoice::True => {}
            ParameterChoice::Substitute => parts.push("parameter"),
            ParameterChoice::Random => parts.push("parameter-random"),
        }
        if self.substitute_training {
            parts.push("training");
        }
        if self.partial_graph {
            parts.push("graph");
        }
        if parts.is_empty() {
            "full".to_string()
        } else {
            parts.join("+")
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: Dataset,
    pub attack_edges: usize,
    pub training_per_class: usize,
    pub target_method: TargetMethod,
    pub target_count: usize,
    pub cost: CostKind,
    pub compromised: usize,
    pub params: LinLbpParams,
    /// `attack.lambda` is overwritten by [`ExperimentConfig::lambda`] when
    /// the experiment runs.
    pub attack: AttackConfig,
    /// `None` picks 1,000, or 10,000 for categorical costs.
    pub lambda: Option<f64>,
    pub knowledge: KnowledgeConfig,
    /// Also run the full-knowledge attack when `knowledge` is partial.
    pub compare_full_knowledge: bool,
    pub methods: Vec<Method>,
    pub sweep: Option<Sweep>,
    pub rw_iters: usize,
    pub out: PathBuf,
    pub seed: u64,
    pub threads: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: Dataset::FacebookLike,
            attack_edges: 10_000,
            training_per_class: 100,
            target_method: TargetMethod::Cc,
            target_count: 100,
            cost: CostKind::Equal,
            compromised: CATEGORICAL_COMPROMISED_DEFAULT,
            params: LinLbpParams::default(),
            attack: AttackConfig::default(),
            lambda: None,
            knowledge: KnowledgeConfig::default(),
            compare_full_knowledge: false,
            methods: Method::ALL.to_vec(),
            sweep: None,
            rw_iters: RW_DEFAULT_ITERS,
            out: PathBuf::from("out"),
            seed: 0,
            threads: None,
        }
    }
}

fn field_err(key: &str, msg: impl fmt::Display) -> Error {
    Error::Config(format!("{key}: {msg}"))
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: fmt::Display,
{
    value
        .parse()
        .map_err(|e| field_err(key, format!("cannot parse {value:?}: {e}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(field_err(key, format!("expected true or false, got {value:?}"))),
    }
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>>
where
    T::Err: fmt::Display,
{
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect()
}

impl ExperimentConfig {
    pub fn resolved_lambda(&self) -> f64 {
        self.lambda.unwrap_or(match self.cost {
            CostKind::Categorical => AttackConfig::categorical().lambda,
            _ => AttackConfig::default().lambda,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text)?;
        Ok(cfg)
    }

    pub fn parse_str(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value, got {line:?}", i + 1))
            })?;
            self.set(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    /// Applies a `key=value` override.
    pub fn set_pair(&mut self, pair: &str) -> Result<()> {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected key=value, got {pair:?}")))?;
        self.set(key.trim(), value.trim())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "dataset" | "graph" => {
                let labels = match &self.dataset {
                    Dataset::File { labels, .. } => labels.clone(),
                    Dataset::FacebookLike => None,
                };
                self.dataset = if value == "facebook-like" {
                    Dataset::FacebookLike
                } else {
                    Dataset::File {
                        edges: PathBuf::from(value),
                        labels,
                    }
                };
            }
            "labels" => match &mut self.dataset {
                Dataset::File { labels, .. } => {
                    *labels = (!value.is_empty()).then(|| PathBuf::from(value))
                }
                Dataset::FacebookLike => {
                    return Err(field_err(key, "set `dataset` to an edge-list path first"))
                }
            },
            "attack_edges" => self.attack_edges = parse(key, value)?,
            "training_per_class" => self.training_per_class = parse(key, value)?,
            "target_method" => self.target_method = parse(key, value)?,
            "target_count" => self.target_count = parse(key, value)?,
            "cost" => self.cost = parse(key, value)?,
            "compromised" => self.compromised = parse(key, value)?,
            "theta" => self.params.theta = parse(key, value)?,
            "weight" | "w" => self.params.weight = parse(key, value)?,
            "max_iters" => self.params.max_iters = parse(key, value)?,
            "tol" => self.params.tol = parse(key, value)?,
            "lambda" => self.lambda = Some(parse(key, value)?),
            "eta" => self.attack.eta = parse(key, value)?,
            "k" | "K" => self.attack.budget_k = parse(key, value)?,
            "inner_iters" => self.attack.inner_iters = parse(key, value)?,
            "outer_iters" => self.attack.outer_iters = parse(key, value)?,
            "stall_window" => self.attack.fnr_stall_window = parse(key, value)?,
            "kink_rule" => {
                self.attack.kink_rule = match value {
                    "feasible" => KinkRule::Feasible,
                    "zero" => KinkRule::Zero,
                    _ => return Err(field_err(key, format!("expected feasible or zero, got {value:?}"))),
                }
            }
            "binarize" => {
                self.attack.binarize_rule = match value {
                    "top-k" => BinarizeRule::TopKPositive,
                    "threshold" => BinarizeRule::ThresholdThenTopK,
                    _ => {
                        return Err(field_err(
                            key,
                            format!("expected top-k or threshold, got {value:?}"),
                        ))
                    }
                }
            }
            "keep_best" => self.attack.keep_best = parse_bool(key, value)?,
            "parameter_knowledge" => {
                self.knowledge.parameter = match value {
                    "true" => ParameterChoice::True,
                    "substitute" => ParameterChoice::Substitute,
                    "random" => ParameterChoice::Random,
                    _ => {
                        return Err(field_err(
                            key,
                            format!("expected true, substitute or random, got {value:?}"),
                        ))
                    }
                }
            }
            "substitute_theta" => self.knowledge.substitute_theta = Some(parse(key, value)?),
            "substitute_w" => self.knowledge.substitute_weight = parse(key, value)?,
            "training_knowledge" => {
                self.knowledge.substitute_training = match value {
                    "true" => false,
                    "substitute" => true,
                    _ => {
                        return Err(field_err(
                            key,
                            format!("expected true or substitute, got {value:?}"),
                        ))
                    }
                }
            }
            "substitute_training_size" => {
                self.knowledge.substitute_training_size = parse(key, value)?
            }
            "graph_knowledge" => {
                self.knowledge.partial_graph = match value {
                    "complete" => false,
                    "partial" => true,
                    _ => {
                        return Err(field_err(
                            key,
                            format!("expected complete or partial, got {value:?}"),
                        ))
                    }
                }
            }
            "tau" => self.knowledge.tau_percent = parse(key, value)?,
            "compare_full_knowledge" => self.compare_full_knowledge = parse_bool(key, value)?,
            "methods" => self.methods = parse_list(key, value)?,
            "sweep_axis" => {
                let values = self.sweep.take().map(|s| s.values).unwrap_or_default();
                self.sweep = if value.is_empty() || value == "none" {
                    None
                } else {
                    Some(Sweep {
                        axis: parse(key, value)?,
                        values,
                    })
                };
            }
            "sweep_values" => match &mut self.sweep {
                Some(s) => s.values = parse_list(key, value)?,
                None => return Err(field_err(key, "set `sweep_axis` first")),
            },
            "rw_iters" => self.rw_iters = parse(key, value)?,
            "out" => self.out = PathBuf::from(value),
            "seed" => self.seed = parse(key, value)?,
            "threads" => self.threads = Some(parse(key, value)?),
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let check = |key: &str, r: Result<()>| r.map_err(|e| field_err(key, e));
        check("theta/weight/max_iters/tol", self.params.validate())?;
        let mut attack = self.attack.clone();
        attack.lambda = self.resolved_lambda();
        check("lambda/eta/iters", attack.validate())?;
        if self.training_per_class == 0 {
            return Err(field_err("training_per_class", "must be positive"));
        }
        if self.target_count == 0 {
            return Err(field_err("target_count", "must be positive"));
        }
        if self.methods.is_empty() {
            return Err(field_err("methods", "list is empty"));
        }
        if self.rw_iters == 0 {
            return Err(field_err("rw_iters", "must be positive"));
        }
        let k = &self.knowledge;
        if let Some(t) = k.substitute_theta {
            if !(t > 0.0 && t <= 1.0) {
                return Err(field_err("substitute_theta", format!("{t} outside (0, 1]")));
            }
        }
        if !(k.substitute_weight > 0.0 && k.substitute_weight <= 0.5) {
            return Err(field_err(
                "substitute_w",
                format!("{} outside (0, 0.5]", k.substitute_weight),
            ));
        }
        if k.substitute_training_size < 2 || !k.substitute_training_size.is_multiple_of(2) {
            return Err(field_err(
                "substitute_training_size",
                "must be even and at least 2",
            ));
        }
        if !(k.tau_percent > 0.0 && k.tau_percent <= 100.0) {
            return Err(field_err("tau", format!("{} outside (0, 100]", k.tau_percent)));
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return Err(field_err("sweep_values", "list is empty"));
            }
            for &v in &s.values {
                if s.axis.integral() && (v < 0.0 || v.fract() != 0.0) {
                    return Err(field_err(
                        "sweep_values",
                        format!("{} needs non-negative integers, got {v}", s.axis.as_str()),
                    ));
                }
                self.at_point(s.axis, v).validate_point()?;
            }
        }
        Ok(())
    }

    fn validate_point(&self) -> Result<()> {
        let mut copy = self.clone();
        copy.sweep = None;
        copy.validate()
    }

    /// This config with one sweep value applied and the sweep removed.
    pub fn at_point(&self, axis: SweepAxis, value: f64) -> ExperimentConfig {
        let mut c = self.clone();
        c.sweep = None;
        match axis {
            SweepAxis::K => c.attack.budget_k = value as usize,
            SweepAxis::AttackEdges => c.attack_edges = value as usize,
            SweepAxis::TargetCount => c.target_count = value as usize,
            SweepAxis::Lambda => c.lambda = Some(value),
            SweepAxis::Eta => c.attack.eta = value,
            SweepAxis::Tau => {
                c.knowledge.partial_graph = true;
                c.knowledge.tau_percent = value;
            }
            SweepAxis::SubstituteWeight => {
                c.knowledge.parameter = ParameterChoice::Substitute;
                c.knowledge.substitute_weight = value;
            }
        }
        c
    }
}
