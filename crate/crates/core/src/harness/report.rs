//! CSV outputs and readers.

use std::io::{BufRead, Write};

use crate::attack::{Flip, FlipKind};
use crate::error::{Error, Result};
use crate::graph::{FlipSet, NodeId};

pub const REPORT_HEADER: &str = "dataset,knowledge,sweep_axis,sweep_value,method,target_method,\
cost,k,attack_edges,targets,fnr,fpr,fnr_rw,edges_modified,edges_added,edges_deleted,\
total_cost,cc_before,cc_after,iterations";

/// One row of `report.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRow {
    pub dataset: String,
    pub knowledge: String,
    pub sweep_axis: String,
    pub sweep_value: String,
    pub method: String,
    pub target_method: String,
    pub cost: String,
    pub k: usize,
    /// Positive–negative edges in the evaluated graph before the attack.
    pub attack_edges: usize,
    pub targets: usize,
    pub fnr: f64,
    pub fpr: f64,
    /// Target FNR of the random-walk classifier on the attacked graph.
    pub fnr_rw: f64,
    pub edges_modified: usize,
    pub edges_added: usize,
    pub edges_deleted: usize,
    pub total_cost: f64,
    /// Average clustering coefficient of the targets.
    pub cc_before: f64,
    pub cc_after: f64,
    pub iterations: usize,
}

impl RunRow {
    fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.dataset,
            self.knowledge,
            self.sweep_axis,
            self.sweep_value,
            self.method,
            self.target_method,
            self.cost,
            self.k,
            self.attack_edges,
            self.targets,
            self.fnr,
            self.fpr,
            self.fnr_rw,
            self.edges_modified,
            self.edges_added,
            self.edges_deleted,
            self.total_cost,
            self.cc_before,
            self.cc_after,
            self.iterations
        )
    }

    fn from_csv(line: &str, line_no: usize) -> Result<Self> {
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 20 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("expected 20 fields, found {}", f.len()),
            });
        }
        let num = |i: usize| -> Result<f64> {
            f[i].parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("field {} is not a number: {:?}", i + 1, f[i]),
            })
        };
        let count = |i: usize| -> Result<usize> {
            f[i].parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("field {} is not a count: {:?}", i + 1, f[i]),
            })
        };
        Ok(RunRow {
            dataset: f[0].into(),
            knowledge: f[1].into(),
            sweep_axis: f[2].into(),
            sweep_value: f[3].into(),
            method: f[4].into(),
            target_method: f[5].into(),
            cost: f[6].into(),
            k: count(7)?,
            attack_edges: count(8)?,
            targets: count(9)?,
            fnr: num(10)?,
            fpr: num(11)?,
            fnr_rw: num(12)?,
            edges_modified: count(13)?,
            edges_added: count(14)?,
            edges_deleted: count(15)?,
            total_cost: num(16)?,
            cc_before: num(17)?,
            cc_after: num(18)?,
            iterations: count(19)?,
        })
    }
}

pub fn write_report_csv<W: Write>(mut w: W, rows: &[RunRow]) -> std::io::Result<()> {
    writeln!(w, "{REPORT_HEADER}")?;
    for r in rows {
        writeln!(w, "{}", r.to_csv())?;
    }
    Ok(())
}

pub fn read_report_csv<R: BufRead>(r: R) -> Result<Vec<RunRow>> {
    let mut rows = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        if i == 0 {
            if line.trim() != REPORT_HEADER {
                return Err(Error::Parse {
                    line: 1,
                    message: "unexpected report header".into(),
                });
            }
            continue;
        }
        if !line.trim().is_empty() {
            rows.push(RunRow::from_csv(line.trim(), i + 1)?);
        }
    }
    Ok(rows)
}

/// Aligned plain-text rendering of the main report columns.
pub fn format_table(rows: &[RunRow]) -> String {
    let header = [
        "dataset", "knowledge", "sweep", "method", "targets", "cost", "K", "FNR", "FPR",
        "FNR(RW)", "#mod", "#add", "#del", "cost", "CC before", "CC after",
    ];
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let sweep = if r.sweep_axis.is_empty() {
                "-".to_string()
            } else {
                format!("{}={}", r.sweep_axis, r.sweep_value)
            };
            vec![
                r.dataset.clone(),
                r.knowledge.clone(),
                sweep,
                r.method.clone(),
                format!("{}:{}", r.target_method, r.targets),
                r.cost.clone(),
                r.k.to_string(),
                format!("{:.2}", r.fnr),
                format!("{:.3}", r.fpr),
                format!("{:.2}", r.fnr_rw),
                r.edges_modified.to_string(),
                r.edges_added.to_string(),
                r.edges_deleted.to_string(),
                format!("{:.1}", r.total_cost),
                format!("{:.4}", r.cc_before),
                format!("{:.4}", r.cc_after),
            ]
        })
        .collect();
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.len());
        }
    }
    let line = |row: Vec<String>| -> String {
        row.iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:>w$}"))
            .collect::<Vec<_>>()
            .join("  ")
    };
    let mut out = line(header.iter().map(|s| s.to_string()).collect());
    out.push('\n');
    for row in cells {
        out.push_str(&line(row));
        out.push('\n');
    }
    out
}

/// `u,v,action,cost` rows.
pub fn write_flips_csv<W: Write>(mut w: W, flips: &[Flip]) -> std::io::Result<()> {
    writeln!(w, "u,v,action,cost")?;
    for f in flips {
        writeln!(w, "{},{},{},{}", f.u, f.v, f.kind, f.cost)?;
    }
    Ok(())
}

pub fn read_flips_csv<R: BufRead>(r: R) -> Result<Vec<Flip>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let bad = |message: String| Error::Parse { line: i + 1, message };
        let line = line.map_err(|e| bad(e.to_string()))?;
        let line = line.trim();
        if i == 0 || line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(bad(format!("expected 4 fields, found {}", f.len())));
        }
        let id = |s: &str| s.parse::<NodeId>().map_err(|_| bad(format!("bad node id {s:?}")));
        let kind = match f[2] {
            "insert" => FlipKind::Insert,
            "delete" => FlipKind::Delete,
            other => return Err(bad(format!("bad action {other:?}"))),
        };
        let cost = f[3].parse().map_err(|_| bad(format!("bad cost {:?}", f[3])))?;
        out.push(Flip {
            u: id(f[0])?,
            v: id(f[1])?,
            kind,
            cost,
        });
    }
    Ok(out)
}

pub fn flip_set_of(flips: &[Flip]) -> FlipSet {
    flips.iter().map(|f| (f.u, f.v)).collect()
}

/// Number of unordered pairs modified by both attacks.
pub fn report_overlap(a: &FlipSet, b: &FlipSet) -> usize {
    a.intersection_count(b)
}

/// `iteration,fnr`, iteration 0 being the unattacked graph.
pub fn write_fnr_history_csv<W: Write>(mut w: W, history: &[f64]) -> std::io::Result<()> {
    writeln!(w, "iteration,fnr")?;
    for (i, x) in history.iter().enumerate() {
        writeln!(w, "{i},{x}")?;
    }
    Ok(())
}

/// Wall time of one pipeline stage.
#[derive(Debug, Clone, PartialEq)]
pub struct Timing {
    pub sweep_value: String,
    pub method: String,
    pub stage: &'static str,
    pub seconds: f64,
}

pub fn write_timings_csv<W: Write>(mut w: W, timings: &[Timing]) -> std::io::Result<()> {
    writeln!(w, "sweep_value,method,stage,seconds")?;
    for t in timings {
        writeln!(w, "{},{},{},{:.6}", t.sweep_value, t.method, t.stage, t.seconds)?;
    }
    Ok(())
}
