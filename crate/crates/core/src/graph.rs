//! Undirected labeled graphs in compressed adjacency form, plus ingestion,
//! positive-node synthesis, training sampling and partial-view extraction.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::index;
use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::stage_rng;

pub type NodeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Positive,
    Negative,
    Unlabeled,
}

impl Label {
    pub fn as_char(self) -> char {
        match self {
            Label::Positive => 'P',
            Label::Negative => 'N',
            Label::Unlabeled => 'U',
        }
    }
}

/// Undirected simple graph. Neighbor lists are sorted, duplicate-free and
/// symmetric; there are no self-loops.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<NodeId>,
    labels: Vec<Label>,
}

impl Graph {
    /// Builds a graph from an arbitrary edge list. Edges are symmetrized and
    /// deduplicated; self-loops are dropped. All nodes start unlabeled.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        if node_count > NodeId::MAX as usize {
            return Err(Error::invalid(format!("{node_count} nodes exceed the u32 id range")));
        }
        let mut degree = vec![0usize; node_count];
        let mut pairs = Vec::new();
        for (u, v) in edges {
            if u as usize >= node_count || v as usize >= node_count {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) out of range for {node_count} nodes"
                )));
            }
            if u == v {
                continue;
            }
            degree[u as usize] += 1;
            degree[v as usize] += 1;
            pairs.push((u, v));
        }
        let mut offsets = Vec::with_capacity(node_count + 1);
        offsets.push(0);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut fill = offsets[..node_count].to_vec();
        let mut neighbors = vec![0; *offsets.last().unwrap()];
        for (u, v) in pairs {
            neighbors[fill[u as usize]] = v;
            fill[u as usize] += 1;
            neighbors[fill[v as usize]] = u;
            fill[v as usize] += 1;
        }
        // sort + dedup each row, then compact
        let mut compact = Vec::with_capacity(neighbors.len());
        let mut new_offsets = Vec::with_capacity(node_count + 1);
        new_offsets.push(0);
        for u in 0..node_count {
            let row = &mut neighbors[offsets[u]..offsets[u + 1]];
            row.sort_unstable();
            let mut last = None;
            for &v in row.iter() {
                if last != Some(v) {
                    compact.push(v);
                    last = Some(v);
                }
            }
            new_offsets.push(compact.len());
        }
        compact.shrink_to_fit();
        Ok(Graph {
            offsets: new_offsets,
            neighbors: compact,
            labels: vec![Label::Unlabeled; node_count],
        })
    }

    /// Builds directly from sorted neighbor lists. Callers guarantee the
    /// adjacency invariants.
    fn from_sorted_rows(rows: Vec<Vec<NodeId>>, labels: Vec<Label>) -> Self {
        let mut offsets = Vec::with_capacity(rows.len() + 1);
        offsets.push(0);
        let total = rows.iter().map(Vec::len).sum();
        let mut neighbors = Vec::with_capacity(total);
        for row in rows {
            neighbors.extend_from_slice(&row);
            offsets.push(neighbors.len());
        }
        Graph {
            offsets,
            neighbors,
            labels,
        }
    }

    pub fn with_labels(mut self, labels: Vec<Label>) -> Result<Self> {
        self.set_labels(labels)?;
        Ok(self)
    }

    pub fn set_labels(&mut self, labels: Vec<Label>) -> Result<()> {
        if labels.len() != self.node_count() {
            return Err(Error::invalid(format!(
                "{} labels for {} nodes",
                labels.len(),
                self.node_count()
            )));
        }
        self.labels = labels;
        Ok(())
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    /// Number of undirected edges.
    #[inline]
    pub fn edge_count(&self) -> usize {
        self.neighbors.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        let u = u as usize;
        &self.neighbors[self.offsets[u]..self.offsets[u + 1]]
    }

    #[inline]
    pub fn degree(&self, u: NodeId) -> usize {
        let u = u as usize;
        self.offsets[u + 1] - self.offsets[u]
    }

    #[inline]
    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    #[inline]
    pub fn label(&self, u: NodeId) -> Label {
        self.labels[u as usize]
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn nodes_with_label(&self, label: Label) -> Vec<NodeId> {
        (0..self.node_count() as NodeId)
            .filter(|&u| self.labels[u as usize] == label)
            .collect()
    }

    /// Undirected edges with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.node_count() as NodeId).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    /// Checks symmetry, sortedness, and absence of self-loops/duplicates.
    pub fn validate(&self) -> Result<()> {
        for u in 0..self.node_count() as NodeId {
            let row = self.neighbors(u);
            for w in row.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::invalid(format!("row {u} not strictly sorted")));
                }
            }
            for &v in row {
                if v == u {
                    return Err(Error::invalid(format!("self-loop at {u}")));
                }
                if !self.has_edge(v, u) {
                    return Err(Error::invalid(format!("edge {u}->{v} has no reverse")));
                }
            }
        }
        Ok(())
    }

    /// Subgraph induced by `nodes` (any order, no duplicates). New ids follow
    /// ascending original id. Returns the graph and the new→original map.
    pub fn induced_subgraph(&self, nodes: &[NodeId]) -> (Graph, Vec<NodeId>) {
        let mut keep: Vec<NodeId> = nodes.to_vec();
        keep.sort_unstable();
        keep.dedup();
        let mut new_id = HashMap::with_capacity(keep.len());
        for (i, &u) in keep.iter().enumerate() {
            new_id.insert(u, i as NodeId);
        }
        let rows = keep
            .iter()
            .map(|&u| {
                self.neighbors(u)
                    .iter()
                    .filter_map(|v| new_id.get(v).copied())
                    .collect::<Vec<_>>()
            })
            .collect();
        let labels = keep.iter().map(|&u| self.label(u)).collect();
        (Graph::from_sorted_rows(rows, labels), keep)
    }

    /// Materializes the graph with every pair in `flips` toggled.
    pub fn apply_flips(&self, flips: &FlipSet) -> Graph {
        let partners = flips.partners();
        let rows = (0..self.node_count() as NodeId)
            .map(|u| match partners.get(&u) {
                Some(f) => symmetric_difference(self.neighbors(u), f),
                None => self.neighbors(u).to_vec(),
            })
            .collect();
        Graph::from_sorted_rows(rows, self.labels.clone())
    }
}

/// Sorted symmetric difference of two sorted, duplicate-free slices.
pub(crate) fn symmetric_difference(a: &[NodeId], b: &[NodeId]) -> Vec<NodeId> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// A set of unordered node pairs whose connection state is toggled.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FlipSet {
    pairs: BTreeSet<(NodeId, NodeId)>,
}

impl FlipSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts the unordered pair; returns false for duplicates. Self-pairs
    /// are rejected.
    pub fn insert(&mut self, u: NodeId, v: NodeId) -> bool {
        assert_ne!(u, v, "self-pair flip");
        self.pairs.insert((u.min(v), u.max(v)))
    }

    pub fn contains(&self, u: NodeId, v: NodeId) -> bool {
        self.pairs.contains(&(u.min(v), u.max(v)))
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pairs as `(u, v)` with `u < v`, ascending.
    pub fn iter(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn intersection_count(&self, other: &FlipSet) -> usize {
        self.pairs.intersection(&other.pairs).count()
    }

    /// Per-node sorted list of flipped partners (both directions).
    pub fn partners(&self) -> HashMap<NodeId, Vec<NodeId>> {
        let mut map: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
        for &(u, v) in &self.pairs {
            map.entry(u).or_default().push(v);
            map.entry(v).or_default().push(u);
        }
        for row in map.values_mut() {
            row.sort_unstable();
        }
        map
    }

    /// Relabels every endpoint through `map` (e.g. partial-view → full ids).
    pub fn remap(&self, map: &[NodeId]) -> FlipSet {
        let mut out = FlipSet::new();
        for (u, v) in self.iter() {
            out.insert(map[u as usize], map[v as usize]);
        }
        out
    }
}

impl FromIterator<(NodeId, NodeId)> for FlipSet {
    fn from_iter<T: IntoIterator<Item = (NodeId, NodeId)>>(iter: T) -> Self {
        let mut s = FlipSet::new();
        for (u, v) in iter {
            s.insert(u, v);
        }
        s
    }
}

/// Compact id → original id from the input file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdMap {
    original: Vec<u64>,
}

impl IdMap {
    pub fn identity(n: usize) -> Self {
        IdMap {
            original: (0..n as u64).collect(),
        }
    }

    pub fn original(&self, compact: NodeId) -> u64 {
        self.original[compact as usize]
    }

    pub fn compact(&self, original: u64) -> Option<NodeId> {
        self.original
            .binary_search(&original)
            .ok()
            .map(|i| i as NodeId)
    }

    pub fn len(&self) -> usize {
        self.original.len()
    }

    pub fn is_empty(&self) -> bool {
        self.original.is_empty()
    }

    pub fn write<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (i, o) in self.original.iter().enumerate() {
            writeln!(w, "{i} {o}")?;
        }
        Ok(())
    }
}

fn data_lines<R: BufRead>(reader: R) -> impl Iterator<Item = (usize, std::io::Result<String>)> {
    reader.lines().enumerate().map(|(i, l)| (i + 1, l))
}

/// Parses a whitespace-separated edge list. Lines starting with `#` and
/// blank lines are skipped. Node ids are compacted to `0..n` in ascending
/// order of the original ids.
pub fn parse_edge_list<R: BufRead>(reader: R) -> Result<(Graph, IdMap)> {
    let mut raw = Vec::new();
    for (line_no, line) in data_lines(reader) {
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let mut fields = t.split_whitespace();
        let mut next = || -> Result<u64> {
            let f = fields.next().ok_or_else(|| Error::Parse {
                line: line_no,
                message: "expected two node ids".into(),
            })?;
            f.parse::<u64>().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid node id {f:?}"),
            })
        };
        let u = next()?;
        let v = next()?;
        raw.push((u, v));
    }
    if raw.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let mut ids: Vec<u64> = raw.iter().flat_map(|&(u, v)| [u, v]).collect();
    ids.sort_unstable();
    ids.dedup();
    let map = IdMap { original: ids };
    let edges = raw
        .iter()
        .map(|&(u, v)| (map.compact(u).unwrap(), map.compact(v).unwrap()));
    let g = Graph::from_edges(map.len(), edges)?;
    if g.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok((g, map))
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<(Graph, IdMap)> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(BufReader::new(f))
}

/// Writes `u v` per edge (`u < v`), translated through `ids` when given.
pub fn write_edge_list<W: Write>(g: &Graph, ids: Option<&IdMap>, w: W) -> std::io::Result<()> {
    let mut w = BufWriter::new(w);
    for (u, v) in g.edges() {
        match ids {
            Some(m) => writeln!(w, "{} {}", m.original(u), m.original(v))?,
            None => writeln!(w, "{u} {v}")?,
        }
    }
    w.flush()
}

/// Reads `node_id {P|N}` lines (original ids) and applies them. Nodes not
/// listed stay unlabeled.
pub fn parse_labels<R: BufRead>(reader: R, ids: &IdMap, g: &mut Graph) -> Result<()> {
    let mut labels = g.labels().to_vec();
    for (line_no, line) in data_lines(reader) {
        let line = line.map_err(|e| Error::Parse {
            line: line_no,
            message: e.to_string(),
        })?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let mut fields = t.split_whitespace();
        let (Some(id), Some(tag)) = (fields.next(), fields.next()) else {
            return Err(Error::Parse {
                line: line_no,
                message: "expected `node_id P|N`".into(),
            });
        };
        let id: u64 = id.parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("invalid node id {id:?}"),
        })?;
        let label = match tag {
            "P" | "p" => Label::Positive,
            "N" | "n" => Label::Negative,
            _ => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("unknown label {tag:?}"),
                })
            }
        };
        let Some(c) = ids.compact(id) else {
            return Err(Error::Parse {
                line: line_no,
                message: format!("node {id} not in graph"),
            });
        };
        labels[c as usize] = label;
    }
    g.set_labels(labels)
}

pub fn load_labels(path: impl AsRef<Path>, ids: &IdMap, g: &mut Graph) -> Result<()> {
    let path = path.as_ref();
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_labels(BufReader::new(f), ids, g)
}

/// Labeled training nodes. Both lists are sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TrainingSet {
    pub positive: Vec<NodeId>,
    pub negative: Vec<NodeId>,
}

impl TrainingSet {
    pub fn new(mut positive: Vec<NodeId>, mut negative: Vec<NodeId>) -> Self {
        positive.sort_unstable();
        negative.sort_unstable();
        TrainingSet { positive, negative }
    }

    pub fn len(&self) -> usize {
        self.positive.len() + self.negative.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains(&self, u: NodeId) -> bool {
        self.positive.binary_search(&u).is_ok() || self.negative.binary_search(&u).is_ok()
    }

    /// Disjointness, range, and label agreement against `g`.
    pub fn validate(&self, g: &Graph) -> Result<()> {
        let n = g.node_count() as NodeId;
        for (set, label) in [(&self.positive, Label::Positive), (&self.negative, Label::Negative)] {
            for &u in set.iter() {
                if u >= n {
                    return Err(Error::invalid(format!("training node {u} out of range")));
                }
                if g.label(u) != label {
                    return Err(Error::invalid(format!(
                        "training node {u} is labeled {:?} in the graph",
                        g.label(u)
                    )));
                }
            }
        }
        if self.positive.iter().any(|u| self.negative.binary_search(u).is_ok()) {
            return Err(Error::invalid("training classes overlap"));
        }
        Ok(())
    }

    /// Translates full-graph ids into view ids, dropping nodes the view
    /// does not contain.
    pub fn restrict(&self, to_view: &HashMap<NodeId, NodeId>) -> TrainingSet {
        let f = |s: &[NodeId]| s.iter().filter_map(|u| to_view.get(u).copied()).collect();
        TrainingSet::new(f(&self.positive), f(&self.negative))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SynthesisSpec {
    pub attack_edges: usize,
    pub seed: u64,
}

/// Replicates an all-negative graph as a positive copy on ids `n..2n` and
/// joins the halves with `attack_edges` distinct random positive–negative
/// edges.
pub fn synthesize_positives(g: &Graph, spec: SynthesisSpec) -> Result<Graph> {
    let n = g.node_count();
    if let Some(u) = (0..n).find(|&u| g.labels[u] != Label::Negative) {
        return Err(Error::invalid(format!(
            "synthesis expects an all-negative graph; node {u} is {:?}",
            g.labels[u]
        )));
    }
    let capacity = (n as u128) * (n as u128);
    if spec.attack_edges as u128 > capacity {
        return Err(Error::invalid(format!(
            "{} attack edges exceed the {capacity} available positive-negative pairs",
            spec.attack_edges
        )));
    }
    if 2 * n > NodeId::MAX as usize {
        return Err(Error::invalid("synthesized graph exceeds the u32 id range"));
    }
    let mut rng = stage_rng(spec.seed);
    let mut chosen: HashSet<(NodeId, NodeId)> = HashSet::with_capacity(spec.attack_edges);
    let mut attack = Vec::with_capacity(spec.attack_edges);
    if (spec.attack_edges as u128) * 2 <= capacity {
        while attack.len() < spec.attack_edges {
            let pos = rng.gen_range(0..n) as NodeId + n as NodeId;
            let neg = rng.gen_range(0..n) as NodeId;
            if chosen.insert((pos, neg)) {
                attack.push((pos, neg));
            }
        }
    } else {
        // dense regime: rejection would stall, sample pair indices directly
        for i in index::sample(&mut rng, n * n, spec.attack_edges).into_iter() {
            attack.push(((n + i / n) as NodeId, (i % n) as NodeId));
        }
    }
    let shift = n as NodeId;
    let edges = g
        .edges()
        .flat_map(|(u, v)| [(u, v), (u + shift, v + shift)])
        .chain(attack);
    let labels = (0..2 * n)
        .map(|i| if i < n { Label::Negative } else { Label::Positive })
        .collect();
    Graph::from_edges(2 * n, edges)?.with_labels(labels)
}

fn sample_sorted<R: Rng>(rng: &mut R, pool: &[NodeId], amount: usize) -> Vec<NodeId> {
    let mut out: Vec<NodeId> = index::sample(rng, pool.len(), amount)
        .into_iter()
        .map(|i| pool[i])
        .collect();
    out.sort_unstable();
    out
}

/// Uniform sample of `per_class` positives and `per_class` negatives.
pub fn sample_training(g: &Graph, per_class: usize, seed: u64) -> Result<TrainingSet> {
    let pos = g.nodes_with_label(Label::Positive);
    let neg = g.nodes_with_label(Label::Negative);
    for (what, pool) in [("positive nodes", &pos), ("negative nodes", &neg)] {
        if pool.len() < per_class {
            return Err(Error::Insufficient {
                what,
                needed: per_class,
                available: pool.len(),
            });
        }
    }
    let mut rng = stage_rng(seed);
    let positive = sample_sorted(&mut rng, &pos, per_class);
    let negative = sample_sorted(&mut rng, &neg, per_class);
    Ok(TrainingSet { positive, negative })
}

/// A subgraph plus the map from its ids back to the graph it came from.
#[derive(Debug, Clone)]
pub struct PartialGraph {
    pub graph: Graph,
    pub to_full: Vec<NodeId>,
}

impl PartialGraph {
    pub fn to_view(&self) -> HashMap<NodeId, NodeId> {
        self.to_full
            .iter()
            .enumerate()
            .map(|(i, &u)| (u, i as NodeId))
            .collect()
    }
}

/// Number of nodes making up `tau_percent` percent of `count`, rounded up.
pub fn percent_ceil(tau_percent: f64, count: usize) -> usize {
    let x = tau_percent * count as f64 / 100.0;
    ((x - 1e-9).ceil().max(0.0) as usize).min(count)
}

/// Attacker's partial view: a BFS-grown set of ⌈τ%⌉ of the negatives plus
/// all positives, with the edges among them.
pub fn extract_partial_graph(g: &Graph, tau_percent: f64, seed: u64) -> Result<PartialGraph> {
    if !(tau_percent > 0.0 && tau_percent <= 100.0) {
        return Err(Error::invalid(format!("tau {tau_percent} outside (0, 100]")));
    }
    let negatives = g.nodes_with_label(Label::Negative);
    if negatives.is_empty() {
        return Err(Error::Insufficient {
            what: "negative nodes",
            needed: 1,
            available: 0,
        });
    }
    let want = percent_ceil(tau_percent, negatives.len());
    let mut rng = stage_rng(seed);
    let mut visited = vec![false; g.node_count()];
    let mut collected = Vec::with_capacity(want);
    let mut queue = VecDeque::new();
    'outer: while collected.len() < want {
        // restart from a uniformly random unvisited negative
        let unvisited: Vec<NodeId> = negatives
            .iter()
            .copied()
            .filter(|&u| !visited[u as usize])
            .collect();
        let start = unvisited[rng.gen_range(0..unvisited.len())];
        visited[start as usize] = true;
        collected.push(start);
        queue.clear();
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &v in g.neighbors(u) {
                if collected.len() >= want {
                    break 'outer;
                }
                if !visited[v as usize] && g.label(v) == Label::Negative {
                    visited[v as usize] = true;
                    collected.push(v);
                    queue.push_back(v);
                }
            }
        }
    }
    let mut keep = collected;
    keep.extend(g.nodes_with_label(Label::Positive));
    let (graph, to_full) = g.induced_subgraph(&keep);
    Ok(PartialGraph { graph, to_full })
}

fn sorted_intersection_count(a: &[NodeId], b: &[NodeId]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

/// Local clustering coefficient; zero below degree 2.
pub fn local_clustering(g: &Graph, u: NodeId) -> f64 {
    let nbrs = g.neighbors(u);
    let d = nbrs.len();
    if d < 2 {
        return 0.0;
    }
    let twice_triangles: usize = nbrs
        .iter()
        .map(|&v| sorted_intersection_count(nbrs, g.neighbors(v)))
        .sum();
    let triangles = twice_triangles as f64 / 2.0;
    triangles / ((d * (d - 1)) as f64 / 2.0)
}

pub fn avg_clustering_coefficient(g: &Graph, nodes: &[NodeId]) -> Result<f64> {
    if nodes.is_empty() {
        return Err(Error::invalid("empty node set"));
    }
    let sum: f64 = nodes.iter().map(|&u| local_clustering(g, u)).sum();
    Ok(sum / nodes.len() as f64)
}
