//! Direct interaction coefficients and the per-sample weighted digraph.
//!
//! Edge `A -> B` with weight `r_AB` means species A depends on species B:
//!
//! ```text
//! r_AB = | sum_i nu_{A,i} * omega_i * [B takes part in i] | / max(P_A, C_A)
//! ```
//!
//! Weights are clamped to 1 (clamps are counted) and a species with zero
//! production and consumption has no outgoing edges.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exact::{quotient, Expansion};
use crate::kinetics::{species_flux, RateSample, SpeciesFlux};
use crate::mechanism::Mechanism;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("self interaction requested for species {0}")]
    SelfInteraction(usize),
    #[error("node {node} out of range for a graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },
    #[error("edge {from} -> {to} has weight {weight}, expected a value in (0, 1]")]
    BadWeight { from: usize, to: usize, weight: f64 },
    #[error("self edge on node {0}")]
    SelfEdge(usize),
    #[error("duplicate edge {from} -> {to}")]
    DuplicateEdge { from: usize, to: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("cannot place {edges} distinct edges on {nodes} nodes")]
    TooManyEdges { nodes: usize, edges: usize },
}

pub type Result<T> = std::result::Result<T, GraphError>;

/// Weighted digraph in compressed adjacency form.
///
/// Every stored weight is in (0, 1], there are no self edges, and each
/// adjacency list is sorted by target index.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionGraph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
    clamp_count: usize,
}

impl InteractionGraph {
    /// Builds a graph from an arbitrary edge list, validating the
    /// invariants above.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut sorted = edges.to_vec();
        sorted.sort_by_key(|e| (e.0, e.1));
        for w in sorted.windows(2) {
            if (w[0].0, w[0].1) == (w[1].0, w[1].1) {
                return Err(GraphError::DuplicateEdge {
                    from: w[0].0,
                    to: w[0].1,
                });
            }
        }
        let mut offsets = vec![0; n + 1];
        for &(from, to, weight) in &sorted {
            for node in [from, to] {
                if node >= n {
                    return Err(GraphError::NodeOutOfRange { node, n });
                }
            }
            if from == to {
                return Err(GraphError::SelfEdge(from));
            }
            if !(weight > 0.0 && weight <= 1.0) {
                return Err(GraphError::BadWeight { from, to, weight });
            }
            offsets[from + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        Ok(Self {
            offsets,
            targets: sorted.iter().map(|e| e.1).collect(),
            weights: sorted.iter().map(|e| e.2).collect(),
            clamp_count: 0,
        })
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    /// Number of coefficients that exceeded 1 and were clamped.
    pub fn clamp_count(&self) -> usize {
        self.clamp_count
    }

    pub fn neighbors(&self, node: usize) -> impl DoubleEndedIterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[node]..self.offsets[node + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    pub fn out_degree(&self, node: usize) -> usize {
        self.offsets[node + 1] - self.offsets[node]
    }

    pub fn weight(&self, from: usize, to: usize) -> Option<f64> {
        let range = self.offsets[from]..self.offsets[from + 1];
        self.targets[range.clone()]
            .binary_search(&to)
            .ok()
            .map(|i| self.weights[range.start + i])
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.node_count()).flat_map(move |u| self.neighbors(u).map(move |(v, w)| (u, v, w)))
    }

    /// Relabels nodes: old node `i` becomes `map[i]`.
    pub fn relabel(&self, map: &[usize]) -> Self {
        let edges: Vec<_> = self.edges().map(|(u, v, w)| (map[u], map[v], w)).collect();
        let mut g = Self::from_edges(self.node_count(), &edges).expect("relabelling keeps invariants");
        g.clamp_count = self.clamp_count;
        g
    }

    pub fn to_dense(&self) -> DenseGraph {
        DenseGraph::from_graph(self)
    }
}

/// Row-major weight matrix; 0 marks a missing edge.
#[derive(Debug, Clone)]
pub struct DenseGraph {
    n: usize,
    weights: Vec<f64>,
}

impl DenseGraph {
    pub fn from_graph(g: &InteractionGraph) -> Self {
        let n = g.node_count();
        let mut weights = vec![0.0; n * n];
        for (u, v, w) in g.edges() {
            weights[u * n + v] = w;
        }
        Self { n, weights }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn row(&self, node: usize) -> &[f64] {
        &self.weights[node * self.n..(node + 1) * self.n]
    }
}

/// Direct interaction coefficient of `a` on `b` by a full scan over all
/// reactions.
pub fn compute_dic(
    mech: &Mechanism,
    sample: &RateSample,
    flux: &SpeciesFlux,
    a: usize,
    b: usize,
) -> Result<f64> {
    if a == b {
        return Err(GraphError::SelfInteraction(a));
    }
    let n = mech.species_count();
    for node in [a, b] {
        if node >= n {
            return Err(GraphError::NodeOutOfRange { node, n });
        }
    }
    let denom = flux.exact_scale(a);
    if denom.is_zero() {
        return Ok(0.0);
    }
    let mut numer = Expansion::new();
    for (r, &w) in mech.reactions.iter().zip(&sample.omega) {
        if r.involves(b) {
            numer.add_product(r.net(a), w);
        }
    }
    Ok(quotient(&numer.abs(), denom).min(1.0))
}

/// Builds the interaction graph of one sample by walking reactions, so the
/// cost is proportional to the sum of squared reaction sizes rather than to
/// all species pairs.
pub fn build_graph(mech: &Mechanism, sample: &RateSample) -> InteractionGraph {
    let flux = species_flux(mech, sample);
    build_graph_with_flux(mech, sample, &flux)
}

pub fn build_graph_with_flux(
    mech: &Mechanism,
    sample: &RateSample,
    flux: &SpeciesFlux,
) -> InteractionGraph {
    let n = mech.species_count();
    // species -> reactions it takes part in, in reaction order
    let mut incidence: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for (i, r) in mech.reactions.iter().enumerate() {
        for s in &r.stoichiometry {
            incidence[s.species].push((i, s.net));
        }
    }

    let mut acc = vec![Expansion::new(); n];
    let mut seen = vec![false; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut offsets = Vec::with_capacity(n + 1);
    offsets.push(0);
    let mut targets = Vec::new();
    let mut weights = Vec::new();
    let mut clamp_count = 0;

    for (a, incident) in incidence.iter().enumerate() {
        let denom = flux.exact_scale(a);
        if !denom.is_zero() {
            for &(ri, nu) in incident {
                let w = sample.omega[ri];
                for b in mech.reactions[ri].participants() {
                    if b == a {
                        continue;
                    }
                    if !seen[b] {
                        seen[b] = true;
                        touched.push(b);
                    }
                    acc[b].add_product(nu, w);
                }
            }
            touched.sort_unstable();
            for &b in &touched {
                let r = quotient(&acc[b].abs(), denom);
                if r > 1.0 {
                    clamp_count += 1;
                }
                let r = r.min(1.0);
                if r > 0.0 {
                    targets.push(b);
                    weights.push(r);
                }
            }
        }
        for &b in &touched {
            acc[b].clear();
            seen[b] = false;
        }
        touched.clear();
        offsets.push(targets.len());
    }

    InteractionGraph {
        offsets,
        targets,
        weights,
        clamp_count,
    }
}

/// One line per edge: `FROM TO WEIGHT`, preceded by a `NODES` line that
/// fixes node order.
pub fn write_edge_list(g: &InteractionGraph, names: &[String]) -> String {
    assert_eq!(names.len(), g.node_count());
    let mut out = String::from("NODES");
    for name in names {
        out.push(' ');
        out.push_str(name);
    }
    out.push('\n');
    for (u, v, w) in g.edges() {
        let _ = writeln!(out, "{} {} {:e}", names[u], names[v], w);
    }
    out
}

/// Reads the edge-list format. Without a `NODES` line, nodes are numbered
/// in order of first appearance.
pub fn parse_edge_list(text: &str) -> Result<(InteractionGraph, Vec<String>)> {
    let mut names: Vec<String> = Vec::new();
    let mut index: BTreeMap<String, usize> = BTreeMap::new();
    let mut edges = Vec::new();
    let mut declared = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens[0] == "NODES" {
            if declared || !names.is_empty() {
                return Err(GraphError::Parse {
                    line: line_no,
                    message: "NODES must be the first entry and appear once".into(),
                });
            }
            declared = true;
            for name in &tokens[1..] {
                if index.insert(name.to_string(), names.len()).is_some() {
                    return Err(GraphError::Parse {
                        line: line_no,
                        message: format!("node `{name}` listed twice"),
                    });
                }
                names.push(name.to_string());
            }
            continue;
        }
        let [from, to, weight] = tokens.as_slice() else {
            return Err(GraphError::Parse {
                line: line_no,
                message: "expected `FROM TO WEIGHT`".into(),
            });
        };
        let weight: f64 = weight.parse().map_err(|_| GraphError::Parse {
            line: line_no,
            message: format!("bad weight `{weight}`"),
        })?;
        let mut id = |name: &str| -> Result<usize> {
            if let Some(&i) = index.get(name) {
                return Ok(i);
            }
            if declared {
                return Err(GraphError::Parse {
                    line: line_no,
                    message: format!("node `{name}` not listed in NODES"),
                });
            }
            index.insert(name.to_string(), names.len());
            names.push(name.to_string());
            Ok(names.len() - 1)
        };
        let (u, v) = (id(from)?, id(to)?);
        edges.push((u, v, weight));
    }
    Ok((InteractionGraph::from_edges(names.len(), &edges)?, names))
}

/// Seeded random digraph with exactly `edges` distinct edges and weights
/// log-uniform on [1e-6, 1].
pub fn random_graph(seed: u64, nodes: usize, edges: usize) -> Result<InteractionGraph> {
    let capacity = nodes.saturating_mul(nodes.saturating_sub(1));
    if edges > capacity {
        return Err(GraphError::TooManyEdges { nodes, edges });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::with_capacity(edges);
    let mut list = Vec::with_capacity(edges);
    while list.len() < edges {
        let u = rng.gen_range(0..nodes);
        let v = rng.gen_range(0..nodes);
        if u != v && seen.insert((u, v)) {
            let w: f64 = 10f64.powf(-rng.gen_range(0.0..6.0));
            list.push((u, v, w));
        }
    }
    InteractionGraph::from_edges(nodes, &list)
}
