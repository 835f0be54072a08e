//! Experiment pipeline: load or generate a graph, synthesize positives,
//! sample training nodes and targets, run the configured attacks, and
//! evaluate each one with the defender's true configuration.
//!
//! Every random stage draws from `derive_seed(master, tag)` with a fixed tag
//! per stage (`synthesis`, `training`, `targets`, `cost`, `random-attack`,
//! `del-add`, `knowledge`). Sweep points reuse the same child seeds, so only
//! the swept quantity changes between them.

pub mod config;
pub mod report;

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::time::Instant;

pub use config::{
    CostKind, Dataset, ExperimentConfig, KnowledgeConfig, Method, ParameterChoice, Sweep,
    SweepAxis,
};
pub use report::{
    flip_set_of, format_table, read_flips_csv, read_report_csv, report_overlap, write_flips_csv,
    write_fnr_history_csv, write_report_csv, write_timings_csv, RunRow, Timing, REPORT_HEADER,
};

use crate::attack::{describe_flips, Flip, FlipKind};
use crate::baselines::{del_add_attack, random_attack};
use crate::cost::{CostModel, GraphCosts};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::generators::{community_graph, CommunitySpec};
use crate::graph::{
    avg_clustering_coefficient, load_edge_list, load_labels, sample_training,
    synthesize_positives, FlipSet, Graph, IdMap, Label, NodeId, SynthesisSpec, TrainingSet,
};
use crate::propagation::{
    assign_priors, fnr, fpr, label_fnr, propagate_with, rw_classify, write_posteriors_csv,
    LinLbpParams, Overlay,
};
use crate::rng::derive_seed;
use crate::scenarios::{
    run_scenario, GraphKnowledge, ParameterKnowledge, ScenarioSpec, TrainingKnowledge,
};
use crate::targets::{select_targets, TargetSpec};

/// Generator seed of the Facebook-like surrogate. Fixed so the surrogate is
/// one dataset rather than a family indexed by the experiment seed.
pub const SURROGATE_SEED: u64 = 0x0fb_4039;

/// A graph as loaded, before positives are synthesized.
#[derive(Debug, Clone)]
pub struct LoadedDataset {
    pub name: String,
    pub graph: Graph,
    pub ids: Option<IdMap>,
    /// Labels came from a file; synthesis is skipped.
    pub labeled: bool,
}

pub fn load_dataset(ds: &Dataset) -> Result<LoadedDataset> {
    match ds {
        Dataset::FacebookLike => {
            let g = community_graph(&CommunitySpec::facebook_like(SURROGATE_SEED))?;
            let n = g.node_count();
            Ok(LoadedDataset {
                name: ds.name(),
                graph: g.with_labels(vec![Label::Negative; n])?,
                ids: None,
                labeled: false,
            })
        }
        Dataset::File { edges, labels } => {
            let (mut g, ids) = load_edge_list(edges)?;
            let labeled = match labels {
                Some(path) => {
                    load_labels(path, &ids, &mut g)?;
                    true
                }
                None => {
                    g.set_labels(vec![Label::Negative; g.node_count()])?;
                    false
                }
            };
            Ok(LoadedDataset {
                name: ds.name(),
                graph: g,
                ids: Some(ids),
                labeled,
            })
        }
    }
}

/// Result of one attack method at one sweep point.
#[derive(Debug, Clone)]
pub struct MethodOutcome {
    pub method: Method,
    pub row: RunRow,
    pub flips: Vec<Flip>,
    /// Attacker-side FNR per outer iteration (ours only).
    pub fnr_history: Option<Vec<f64>>,
    /// Defender posterior on the attacked graph.
    pub posterior: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct PointOutcome {
    pub sweep: Option<(SweepAxis, f64)>,
    pub targets: Vec<NodeId>,
    pub methods: Vec<MethodOutcome>,
    pub timings: Vec<Timing>,
}

impl PointOutcome {
    pub fn method(&self, m: Method) -> Option<&MethodOutcome> {
        self.methods.iter().find(|o| o.method == m)
    }

    /// Directory name for this point's artifacts, empty without a sweep.
    pub fn dir_name(&self) -> String {
        match self.sweep {
            None => String::new(),
            Some((axis, v)) => format!("{}_{v}", axis.as_str()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub points: Vec<PointOutcome>,
    pub ids: Option<IdMap>,
}

impl ExperimentOutcome {
    pub fn rows(&self) -> Vec<RunRow> {
        self.points
            .iter()
            .flat_map(|p| p.methods.iter().map(|m| m.row.clone()))
            .collect()
    }

    pub fn timings(&self) -> Vec<Timing> {
        self.points.iter().flat_map(|p| p.timings.clone()).collect()
    }
}

/// Validates, runs, and writes every output file under `cfg.out`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutcome> {
    run_experiment_with(cfg, Execution::default())
}

pub fn run_experiment_with(cfg: &ExperimentConfig, exec: Execution) -> Result<ExperimentOutcome> {
    let outcome = execute(cfg, exec)?;
    write_outputs(&outcome, &cfg.out)?;
    Ok(outcome)
}

/// Runs the experiment without touching the filesystem beyond loading.
pub fn execute(cfg: &ExperimentConfig, exec: Execution) -> Result<ExperimentOutcome> {
    cfg.validate()?;
    let data = load_dataset(&cfg.dataset)?;
    let points: Vec<(Option<(SweepAxis, f64)>, ExperimentConfig)> = match &cfg.sweep {
        None => vec![(None, cfg.clone())],
        Some(s) => {
            let mut values = s.values.clone();
            values.sort_by(f64::total_cmp);
            values.dedup();
            values
                .into_iter()
                .map(|v| (Some((s.axis, v)), cfg.at_point(s.axis, v)))
                .collect()
        }
    };
    let results = exec.map_range(points.len(), |i| {
        let (sweep, point_cfg) = &points[i];
        run_point(&data, point_cfg, *sweep, exec)
    });
    let points = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ExperimentOutcome {
        points,
        ids: data.ids,
    })
}

struct Prepared {
    graph: Graph,
    train: TrainingSet,
    targets: Vec<NodeId>,
    cost: CostModel,
    prior: Vec<f64>,
    cross_edges: usize,
    cc_before: f64,
}

fn prepare(data: &LoadedDataset, cfg: &ExperimentConfig) -> Result<Prepared> {
    let graph = if data.labeled {
        data.graph.clone()
    } else {
        synthesize_positives(
            &data.graph,
            SynthesisSpec {
                attack_edges: cfg.attack_edges,
                seed: derive_seed(cfg.seed, "synthesis"),
            },
        )?
    };
    let train = sample_training(&graph, cfg.training_per_class, derive_seed(cfg.seed, "training"))?;
    let targets = select_targets(
        &graph,
        &TargetSpec {
            method: cfg.target_method,
            count: cfg.target_count,
            seed: derive_seed(cfg.seed, "targets"),
        },
    )?;
    let cost_seed = derive_seed(cfg.seed, "cost");
    let cost = match cfg.cost {
        CostKind::Equal => CostModel::Equal,
        CostKind::Uniform => CostModel::uniform(cost_seed),
        CostKind::Categorical => CostModel::categorical(&graph, cfg.compromised, cost_seed)?,
    };
    let prior = assign_priors(&graph, &train, &cfg.params);
    let cross_edges = graph
        .edges()
        .filter(|&(u, v)| {
            matches!(
                (graph.label(u), graph.label(v)),
                (Label::Positive, Label::Negative) | (Label::Negative, Label::Positive)
            )
        })
        .count();
    let cc_before = avg_clustering_coefficient(&graph, &targets)?;
    Ok(Prepared {
        graph,
        train,
        targets,
        cost,
        prior,
        cross_edges,
        cc_before,
    })
}

fn scenario_spec(k: &KnowledgeConfig, params: &LinLbpParams, seed: u64) -> ScenarioSpec {
    let seed = derive_seed(seed, "knowledge");
    ScenarioSpec {
        parameter: match k.parameter {
            ParameterChoice::True => ParameterKnowledge::True,
            ParameterChoice::Substitute => ParameterKnowledge::Substitute {
                theta: k.substitute_theta.unwrap_or(params.theta),
                weight: k.substitute_weight,
            },
            ParameterChoice::Random => ParameterKnowledge::Random {
                seed: derive_seed(seed, "parameters"),
            },
        },
        training: if k.substitute_training {
            TrainingKnowledge::Substitute {
                size: k.substitute_training_size,
                seed: derive_seed(seed, "substitute-training"),
            }
        } else {
            TrainingKnowledge::True
        },
        graph: if k.partial_graph {
            GraphKnowledge::Partial {
                tau_percent: k.tau_percent,
                seed: derive_seed(seed, "partial-graph"),
            }
        } else {
            GraphKnowledge::Complete
        },
    }
}

struct Evaluation {
    posterior: Vec<f64>,
    fnr: f64,
    fpr: f64,
    fnr_rw: f64,
    cc_after: f64,
}

fn evaluate(
    p: &Prepared,
    cfg: &ExperimentConfig,
    flips: &FlipSet,
    posterior: Option<Vec<f64>>,
    exec: Execution,
) -> Result<Evaluation> {
    let posterior = match posterior {
        Some(x) => x,
        None => {
            let overlay = Overlay::from_flips(flips);
            let overlay = (!overlay.is_empty()).then_some(&overlay);
            propagate_with(&p.graph, &p.prior, &cfg.params, overlay, exec)?.posterior
        }
    };
    let attacked = if flips.is_empty() {
        None
    } else {
        Some(p.graph.apply_flips(flips))
    };
    let g = attacked.as_ref().unwrap_or(&p.graph);
    Ok(Evaluation {
        fnr: fnr(&posterior, &p.targets)?,
        fpr: fpr(&posterior, &p.graph, &p.train)?,
        fnr_rw: label_fnr(&rw_classify(g, &p.train, cfg.rw_iters), &p.targets)?,
        cc_after: avg_clustering_coefficient(g, &p.targets)?,
        posterior,
    })
}

fn run_point(
    data: &LoadedDataset,
    cfg: &ExperimentConfig,
    sweep: Option<(SweepAxis, f64)>,
    exec: Execution,
) -> Result<PointOutcome> {
    let sweep_value = sweep.map(|(_, v)| v.to_string()).unwrap_or_default();
    let mut timings = Vec::new();
    let mut time = |method: &str, stage: &'static str, start: Instant| {
        timings.push(Timing {
            sweep_value: sweep_value.clone(),
            method: method.to_string(),
            stage,
            seconds: start.elapsed().as_secs_f64(),
        })
    };

    let start = Instant::now();
    let p = prepare(data, cfg)?;
    time("-", "prepare", start);

    let mut attack_cfg = cfg.attack.clone();
    attack_cfg.lambda = cfg.resolved_lambda();
    let costs = GraphCosts::new(&p.cost, p.graph.labels());

    let base_row = RunRow {
        dataset: data.name.clone(),
        knowledge: "full".into(),
        sweep_axis: sweep.map(|(a, _)| a.as_str().to_string()).unwrap_or_default(),
        sweep_value: sweep_value.clone(),
        method: String::new(),
        target_method: cfg.target_method.to_string(),
        cost: cfg.cost.as_str().into(),
        k: cfg.attack.budget_k,
        attack_edges: p.cross_edges,
        targets: p.targets.len(),
        fnr: 0.0,
        fpr: 0.0,
        fnr_rw: 0.0,
        edges_modified: 0,
        edges_added: 0,
        edges_deleted: 0,
        total_cost: 0.0,
        cc_before: p.cc_before,
        cc_after: p.cc_before,
        iterations: 0,
    };

    let mut runs: Vec<(Method, KnowledgeConfig)> = Vec::new();
    let mut methods = cfg.methods.clone();
    methods.dedup();
    for m in methods {
        if m == Method::Ours && cfg.compare_full_knowledge && !cfg.knowledge.is_full() {
            runs.push((m, KnowledgeConfig::default()));
        }
        runs.push((m, cfg.knowledge.clone()));
    }

    let mut outcomes = Vec::with_capacity(runs.len());
    for (method, knowledge) in runs {
        let start = Instant::now();
        let mut history = None;
        let mut posterior = None;
        let mut iterations = 0;
        let flip_set = match method {
            Method::None => FlipSet::new(),
            Method::Random => random_attack(
                &p.graph,
                &p.targets,
                cfg.attack.budget_k,
                derive_seed(cfg.seed, "random-attack"),
            )?,
            Method::DelAdd => del_add_attack(
                &p.graph,
                &p.targets,
                cfg.attack.budget_k,
                derive_seed(cfg.seed, "del-add"),
            )?,
            Method::Ours => {
                let spec = scenario_spec(&knowledge, &cfg.params, cfg.seed);
                let out = run_scenario(
                    &p.graph,
                    &p.train,
                    &cfg.params,
                    &spec,
                    &p.targets,
                    &p.cost,
                    &attack_cfg,
                    exec,
                )?;
                history = Some(out.attack.fnr_history.clone());
                posterior = Some(out.posterior);
                iterations = out.attack.iterations;
                out.flip_set
            }
        };
        time(method.as_str(), "attack", start);

        let start = Instant::now();
        let flips = describe_flips(&p.graph, &flip_set, &costs);
        let eval = evaluate(&p, cfg, &flip_set, posterior, exec)?;
        time(method.as_str(), "evaluate", start);

        let added = flips.iter().filter(|f| f.kind == FlipKind::Insert).count();
        let row = RunRow {
            knowledge: if method == Method::Ours {
                knowledge.label()
            } else {
                "full".into()
            },
            method: method.as_str().into(),
            fnr: eval.fnr,
            fpr: eval.fpr,
            fnr_rw: eval.fnr_rw,
            edges_modified: flips.len(),
            edges_added: added,
            edges_deleted: flips.len() - added,
            total_cost: flips.iter().map(|f| f.cost).sum(),
            cc_after: eval.cc_after,
            iterations,
            ..base_row.clone()
        };
        outcomes.push(MethodOutcome {
            method,
            row,
            flips,
            fnr_history: history,
            posterior: eval.posterior,
        });
    }

    Ok(PointOutcome {
        sweep,
        targets: p.targets,
        methods: outcomes,
        timings,
    })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let mut w = create(path)?;
    f(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

/// Writes `report.csv` and `timings.csv` under `dir`, plus per-point
/// `flips.csv` (ours), `flips_<baseline>.csv`, `fnr_history.csv` and
/// `posteriors.csv`. Sweep points get one subdirectory each.
pub fn write_outputs(outcome: &ExperimentOutcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let rows = outcome.rows();
    write_file(&dir.join("report.csv"), |w| write_report_csv(w, &rows))?;
    let timings = outcome.timings();
    write_file(&dir.join("timings.csv"), |w| write_timings_csv(w, &timings))?;
    if let Some(ids) = &outcome.ids {
        write_file(&dir.join("id_map.txt"), |w| ids.write(w))?;
    }
    for point in &outcome.points {
        let pdir = dir.join(point.dir_name());
        fs::create_dir_all(&pdir).map_err(|e| Error::io(&pdir, e))?;
        for m in &point.methods {
            let knowledge_suffix = if m.row.knowledge == "full" {
                String::new()
            } else {
                format!("_{}", m.row.knowledge)
            };
            let name = match m.method {
                Method::None => continue,
                Method::Ours => format!("flips{knowledge_suffix}.csv"),
                other => format!("flips_{other}.csv"),
            };
            write_file(&pdir.join(name), |w| write_flips_csv(w, &m.flips))?;
            if let Some(h) = &m.fnr_history {
                let name = format!("fnr_history{knowledge_suffix}.csv");
                write_file(&pdir.join(name), |w| write_fnr_history_csv(w, h))?;
            }
        }
        let shown = point
            .methods
            .iter()
            .rev()
            .find(|m| m.method == Method::Ours)
            .or_else(|| point.methods.first());
        if let Some(m) = shown {
            write_file(&pdir.join("posteriors.csv"), |w| {
                write_posteriors_csv(w, &m.posterior)
            })?;
        }
    }
    Ok(())
}
