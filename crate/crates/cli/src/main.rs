use std::fs::File;
use std::io::{BufReader, ErrorKind, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use graph_evasion::exec::configure_threads;
use graph_evasion::harness::{
    flip_set_of, format_table, read_flips_csv, read_report_csv, report_overlap,
    run_experiment_with, ExperimentConfig, Method, ParameterChoice, Sweep,
};
use graph_evasion::Execution;

/// Structural evasion attacks on LinLBP: experiments and reports.
#[derive(Parser)]
#[command(name = "graph-evasion", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single run: no-attack baseline plus the optimization attack.
    Attack(RunArgs),
    /// Repeat the pipeline for every value of one parameter.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// k, attack_edges, target_count, lambda, eta, tau or substitute_w.
        #[arg(long)]
        axis: Option<String>,
        /// Comma-separated values.
        #[arg(long)]
        values: Option<String>,
    },
    /// Random and Del-Add baselines next to the no-attack row.
    Baseline(RunArgs),
    /// Partial-knowledge attack compared with full knowledge. Without any
    /// of the knowledge flags all three are substituted.
    Scenario {
        #[command(flatten)]
        run: RunArgs,
        /// Substitute LinLBP parameters (see `substitute_w`).
        #[arg(long)]
        substitute_params: bool,
        /// Draw θ and w at random instead.
        #[arg(long)]
        random_params: bool,
        /// Substitute training set (see `substitute_training_size`).
        #[arg(long)]
        substitute_training: bool,
        /// Partial graph (see `tau`).
        #[arg(long)]
        partial_graph: bool,
    },
    /// Print a report as a table, or count overlapping flips of two runs.
    Report {
        /// Output directory of an earlier run, or a report.csv path.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Two flips.csv files to compare.
        #[arg(long, num_args = 2, value_names = ["A", "B"])]
        overlap: Option<Vec<PathBuf>>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Edge list ("u v" per line), or `facebook-like` for the built-in
    /// surrogate.
    #[arg(long)]
    graph: Option<String>,
    /// Optional "node_id P|N" labels for --graph; skips synthesis.
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Flat key = value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Run every loop on the calling thread.
    #[arg(long)]
    serial: bool,
    /// Config override, repeatable: --set k=10 --set cost=uniform.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

impl RunArgs {
    /// Preset, then config file, then --set, then dedicated flags.
    fn build(&self, preset: impl FnOnce(&mut ExperimentConfig)) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        preset(&mut cfg);
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            cfg.apply_text(&text)
                .with_context(|| format!("in config {}", path.display()))?;
        }
        for pair in &self.overrides {
            cfg.set_pair(pair)?;
        }
        if let Some(g) = &self.graph {
            cfg.set("dataset", g)?;
        }
        if let Some(l) = &self.labels {
            cfg.set("labels", &l.to_string_lossy())?;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out = o.clone();
        }
        if let Some(t) = self.threads {
            cfg.threads = Some(t);
        }
        Ok(cfg)
    }

    fn execution(&self) -> Execution {
        if self.serial {
            Execution::Serial
        } else {
            Execution::default()
        }
    }
}

/// Writes to stdout; a closed pipe (`| head`) ends output quietly.
fn emit(text: &str) -> Result<()> {
    match std::io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() != ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn run(cfg: &ExperimentConfig, exec: Execution) -> Result<()> {
    cfg.validate()?;
    if let Some(t) = cfg.threads {
        if t == 0 {
            bail!("--threads must be positive");
        }
        configure_threads(t).map_err(anyhow::Error::msg)?;
    }
    let outcome = run_experiment_with(cfg, exec)?;
    emit(&format_table(&outcome.rows()))?;
    emit(&format!("wrote {}\n", cfg.out.join("report.csv").display()))
}

fn print_report(out: &Path) -> Result<()> {
    let path = if out.is_dir() {
        out.join("report.csv")
    } else {
        out.to_path_buf()
    };
    let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
    let rows = read_report_csv(BufReader::new(file))
        .with_context(|| format!("reading {}", path.display()))?;
    emit(&format_table(&rows))
}

fn overlap(a: &Path, b: &Path) -> Result<usize> {
    let load = |p: &Path| -> Result<_> {
        let file = File::open(p).with_context(|| format!("opening {}", p.display()))?;
        let flips =
            read_flips_csv(BufReader::new(file)).with_context(|| format!("reading {}", p.display()))?;
        Ok(flip_set_of(&flips))
    };
    Ok(report_overlap(&load(a)?, &load(b)?))
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Attack(args) => {
            let mut cfg = args.build(|c| c.methods = vec![Method::None, Method::Ours])?;
            cfg.sweep = None;
            run(&cfg, args.execution())
        }
        Command::Baseline(args) => {
            let mut cfg =
                args.build(|c| c.methods = vec![Method::None, Method::Random, Method::DelAdd])?;
            cfg.sweep = None;
            run(&cfg, args.execution())
        }
        Command::Sweep { run: args, axis, values } => {
            let mut cfg = args.build(|_| {})?;
            if let Some(axis) = axis {
                cfg.set("sweep_axis", &axis)?;
            }
            if let Some(values) = values {
                let axis = match &cfg.sweep {
                    Some(s) => s.axis,
                    None => bail!("--values needs --axis or sweep_axis in the config"),
                };
                cfg.sweep = Some(Sweep { axis, values: Vec::new() });
                cfg.set("sweep_values", &values)?;
            }
            if cfg.sweep.is_none() {
                bail!("sweep needs --axis/--values or sweep_axis/sweep_values in the config");
            }
            run(&cfg, args.execution())
        }
        Command::Scenario {
            run: args,
            substitute_params,
            random_params,
            substitute_training,
            partial_graph,
        } => {
            if substitute_params && random_params {
                bail!("--substitute-params and --random-params are exclusive");
            }
            let all = !(substitute_params || random_params || substitute_training || partial_graph);
            let mut cfg = args.build(|c| {
                c.methods = vec![Method::None, Method::Ours];
                c.compare_full_knowledge = true;
                let k = &mut c.knowledge;
                k.parameter = if random_params {
                    ParameterChoice::Random
                } else if substitute_params || all {
                    ParameterChoice::Substitute
                } else {
                    ParameterChoice::True
                };
                k.substitute_training = substitute_training || all;
                k.partial_graph = partial_graph || all;
            })?;
            cfg.sweep = None;
            run(&cfg, args.execution())
        }
        Command::Report { out, overlap: pair } => match pair {
            Some(p) => {
                emit(&format!("{}\n", overlap(&p[0], &p[1])?))
            }
            None => print_report(&out),
        },
    }
}
