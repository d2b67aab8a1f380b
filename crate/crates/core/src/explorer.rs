//! Breadth-first construction of the automaton reachable from `|e_1⟩⟨e_1|`.
//!
//! Reachable states are deduplicated in two tiers: an exact match on a
//! rounded [`CanonicalKey`], then a trace-distance merge within
//! `MERGE_FACTOR · grid` among nodes in neighbouring coarse cells. For
//! `n ≥ 2` the reachable set is infinite, so exploration is always truncated
//! at a maximum depth.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::{trace_distance, Alphabet, ChannelFamilyParam, DensityMatrix, Letter};
use crate::error::{Error, Result};
use crate::json::{MatrixJson, Sig17};
use crate::matlib::ComplexMat3;

pub const DEFAULT_GRID: f64 = 1e-9;
pub const MAX_EXPLORE_DEPTH: usize = 20;
pub const MIN_GRID: f64 = 1e-12;
pub const MAX_GRID: f64 = 1e-6;

/// Nodes closer than `MERGE_FACTOR · grid` in trace distance are one state.
pub const MERGE_FACTOR: f64 = 10.0;

/// Real and imaginary parts of the nine entries, rounded to the grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalKey(pub [i64; 18]);

pub fn canonical_key(rho: &DensityMatrix, grid: f64) -> CanonicalKey {
    let mut key = [0i64; 18];
    for (slot, z) in rho.mat().entries().iter().flatten().enumerate() {
        key[2 * slot] = (z.re / grid).round() as i64;
        key[2 * slot + 1] = (z.im / grid).round() as i64;
    }
    CanonicalKey(key)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub id: usize,
    pub state: DensityMatrix,
    pub key: CanonicalKey,
    pub depth: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub src: usize,
    pub letter: Letter,
    pub dst: usize,
}

/// A depth-truncated fragment of the reachable automaton.
#[derive(Clone, Debug, PartialEq)]
pub struct StateGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub param: ChannelFamilyParam,
    pub max_depth: usize,
    pub grid: f64,
}

type CellKey = [i64; 4];

/// Coarse spatial index over a few matrix coordinates. Two states within
/// trace distance `D` differ by at most `2D` in every entry, so a merge
/// partner always sits in an adjacent cell.
struct CellIndex {
    cell: f64,
    buckets: HashMap<CellKey, Vec<usize>>,
}

impl CellIndex {
    fn new(grid: f64) -> Self {
        Self { cell: 2.0 * MERGE_FACTOR * grid, buckets: HashMap::new() }
    }

    fn coords(m: &ComplexMat3) -> [f64; 4] {
        [m.get(0, 0).re, m.get(1, 1).re, m.get(2, 2).re, m.get(0, 1).re]
    }

    fn cell_of(&self, m: &ComplexMat3) -> CellKey {
        Self::coords(m).map(|x| (x / self.cell).floor() as i64)
    }

    fn insert(&mut self, m: &ComplexMat3, id: usize) {
        let key = self.cell_of(m);
        self.buckets.entry(key).or_default().push(id);
    }

    fn neighbours(&self, m: &ComplexMat3) -> Vec<usize> {
        let centre = self.cell_of(m);
        let mut out = Vec::new();
        for offset in 0..81usize {
            let mut key = centre;
            let mut rest = offset;
            for k in &mut key {
                *k += (rest % 3) as i64 - 1;
                rest /= 3;
            }
            if let Some(ids) = self.buckets.get(&key) {
                out.extend_from_slice(ids);
            }
        }
        out.sort_unstable();
        out
    }
}

/// Explores states reachable from `|e_1⟩⟨e_1|` by breadth-first search,
/// expanding letters in the order `A`, `B`, up to `max_depth` letters.
pub fn explore(param: ChannelFamilyParam, max_depth: usize, grid: f64) -> Result<StateGraph> {
    if max_depth > MAX_EXPLORE_DEPTH {
        return Err(Error::DepthTooLarge { depth: max_depth, limit: MAX_EXPLORE_DEPTH });
    }
    if !(MIN_GRID..=MAX_GRID).contains(&grid) {
        return Err(Error::InvalidArgument(format!(
            "grid {grid:e} must lie in [{MIN_GRID:e}, {MAX_GRID:e}]"
        )));
    }
    let alphabet = Alphabet::new(param);
    let merge_radius = MERGE_FACTOR * grid;

    let start = DensityMatrix::basis(0);
    let mut nodes = vec![Node { id: 0, state: start, key: canonical_key(&start, grid), depth: 0 }];
    let mut edges = Vec::new();
    let mut by_key = HashMap::from([(nodes[0].key, 0usize)]);
    let mut cells = CellIndex::new(grid);
    cells.insert(start.mat(), 0);

    let mut queue = VecDeque::from([0usize]);
    while let Some(src) = queue.pop_front() {
        if nodes[src].depth >= max_depth {
            continue;
        }
        for letter in Letter::ALL {
            let child = alphabet.step(letter, &nodes[src].state);
            let key = canonical_key(&child, grid);
            let existing = by_key.get(&key).copied().or_else(|| {
                cells.neighbours(child.mat()).into_iter().find(|&id| {
                    nodes[id].state.mat().max_abs_diff(child.mat()) <= 2.0 * merge_radius
                        && trace_distance(&nodes[id].state, &child) <= merge_radius
                })
            });
            let dst = existing.unwrap_or_else(|| {
                let id = nodes.len();
                nodes.push(Node { id, state: child, key, depth: nodes[src].depth + 1 });
                by_key.insert(key, id);
                cells.insert(child.mat(), id);
                queue.push_back(id);
                id
            });
            edges.push(Edge { src, letter, dst });
        }
    }
    Ok(StateGraph { nodes, edges, param, max_depth, grid })
}

impl StateGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Whether every node has both outgoing letters.
    pub fn is_closed(&self) -> bool {
        let mut seen = vec![[false; 2]; self.nodes.len()];
        for e in &self.edges {
            seen[e.src][e.letter as usize] = true;
        }
        seen.iter().all(|s| s[0] && s[1])
    }

    /// The node within `tol` (trace distance) of `rho`, if any.
    pub fn find(&self, rho: &DensityMatrix, tol: f64) -> Option<&Node> {
        self.nodes.iter().find(|node| trace_distance(&node.state, rho) <= tol)
    }

    /// Rebuilds a graph from [`export_json`] output.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GraphDocument =
            serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("graph JSON: {e}")))?;
        let param = ChannelFamilyParam::new(doc.n)?;
        let nodes = doc
            .nodes
            .into_iter()
            .map(|node| {
                let entries = node.matrix.map(|row| row.map(|[re, im]| Complex64::new(re, im)));
                let state = DensityMatrix::new(ComplexMat3::new(entries)?)?;
                Ok(Node { id: node.id, key: canonical_key(&state, doc.grid), state, depth: node.depth })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { nodes, edges: doc.edges, param, max_depth: doc.max_depth, grid: doc.grid })
    }
}

/// Rendering switches for [`export_dot`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DotOptions {
    /// Emit edges whose source and target coincide.
    pub self_loops: bool,
    /// Show near-rational matrices as the smallest integer multiple, with the
    /// scale factor in the label. Stored states are unaffected.
    pub integer_labels: bool,
}

impl Default for DotOptions {
    fn default() -> Self {
        Self { self_loops: true, integer_labels: false }
    }
}

/// Entries below this magnitude print as `0`.
const DISPLAY_ZERO: f64 = 1e-12;
const MAX_DISPLAY_DENOMINATOR: u32 = 256;

fn format_sig6(x: f64) -> String {
    if x.abs() < DISPLAY_ZERO {
        return "0".to_owned();
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&magnitude) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - magnitude).max(0) as usize;
    let text = format!("{x:.decimals$}");
    if text.contains('.') {
        text.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        text
    }
}

fn format_entry(z: Complex64) -> String {
    match (z.re.abs() < DISPLAY_ZERO, z.im.abs() < DISPLAY_ZERO) {
        (_, true) => format_sig6(z.re),
        (true, false) => format!("{}i", format_sig6(z.im)),
        (false, false) => {
            let sign = if z.im < 0.0 { '-' } else { '+' };
            format!("{}{}{}i", format_sig6(z.re), sign, format_sig6(z.im.abs()))
        }
    }
}

/// Smallest `k` such that `k·M` has integer entries (within rounding), if any.
fn integer_scale(m: &ComplexMat3) -> Option<u32> {
    (1..=MAX_DISPLAY_DENOMINATOR).find(|&k| {
        let k = f64::from(k);
        m.entries()
            .iter()
            .flatten()
            .all(|z| [z.re, z.im].iter().all(|x| (k * x - (k * x).round()).abs() <= 1e-9 * k))
    })
}

fn node_label(node: &Node, options: &DotOptions) -> String {
    let m = node.state.mat();
    let scale = options.integer_labels.then(|| integer_scale(m)).flatten();
    let mut label = format!("#{} (depth {})", node.id, node.depth);
    if let Some(k) = scale {
        if k > 1 {
            let _ = write!(label, " /{k}");
        }
    }
    for row in m.entries() {
        let cells: Vec<String> = row
            .iter()
            .map(|&z| match scale {
                Some(k) => format_entry(Complex64::new(
                    (z.re * f64::from(k)).round(),
                    (z.im * f64::from(k)).round(),
                )),
                None => format_entry(z),
            })
            .collect();
        let _ = write!(label, "\\n{}", cells.join(" "));
    }
    label
}

/// Graphviz rendering of the graph; byte-identical for identical graphs.
pub fn export_dot(graph: &StateGraph, options: &DotOptions) -> Result<String> {
    if graph.nodes.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let mut out = String::new();
    let _ = writeln!(out, "digraph reachable_n{} {{", graph.param.n());
    let _ = writeln!(out, "  node [shape=box, fontname=\"monospace\"];");
    for node in &graph.nodes {
        let _ = writeln!(out, "  s{} [label=\"{}\"];", node.id, node_label(node, options));
    }
    for edge in &graph.edges {
        if edge.src == edge.dst && !options.self_loops {
            continue;
        }
        let _ = writeln!(out, "  s{} -> s{} [label=\"{}\"];", edge.src, edge.dst, edge.letter);
    }
    out.push_str("}\n");
    Ok(out)
}

#[derive(Serialize)]
struct NodeOut<'a> {
    id: usize,
    depth: usize,
    matrix: MatrixJson<'a>,
}

#[derive(Serialize)]
struct GraphOut<'a> {
    n: u32,
    max_depth: usize,
    grid: Sig17,
    nodes: Vec<NodeOut<'a>>,
    edges: &'a [Edge],
}

#[derive(Deserialize)]
struct NodeDocument {
    id: usize,
    depth: usize,
    matrix: [[[f64; 2]; 3]; 3],
}

#[derive(Deserialize)]
struct GraphDocument {
    n: u32,
    max_depth: usize,
    grid: f64,
    nodes: Vec<NodeDocument>,
    edges: Vec<Edge>,
}

/// JSON rendering: `{"n", "max_depth", "grid", "nodes": [{"id", "depth",
/// "matrix"}], "edges": [{"src", "letter", "dst"}]}` with matrices as
/// `[[[re, im]; 3]; 3]`.
pub fn export_json(graph: &StateGraph) -> String {
    let doc = GraphOut {
        n: graph.param.n(),
        max_depth: graph.max_depth,
        grid: Sig17(graph.grid),
        nodes: graph
            .nodes
            .iter()
            .map(|node| NodeOut { id: node.id, depth: node.depth, matrix: MatrixJson(node.state.mat()) })
            .collect(),
        edges: &graph.edges,
    };
    serde_json::to_string(&doc).expect("graph serializes")
}
