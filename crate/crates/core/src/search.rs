//! Overall interaction coefficients: the best path product from a target
//! species to every other species.
//!
//! Dijkstra's algorithm solves this exactly (a max-product shortest path
//! problem, valid because every weight is at most 1). The DFS and BFS
//! baselines assign a value on first discovery and never revise it, so
//! their results depend on node order. RBFS is label correcting but
//! discards path products below its threshold.
//!
//! Neighbors are always visited in ascending node order.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{DenseGraph, InteractionGraph};
use crate::heaps::{BinaryHeap, FibonacciHeap, MaxPriorityQueue, NaiveQueue, QueueKind};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("target {target} out of range for a graph with {n} nodes")]
    TargetOutOfRange { target: usize, n: usize },
    #[error("no target species given")]
    NoTargets,
    #[error("threshold {0} outside (0, 1]")]
    BadThreshold(f64),
    #[error("brute-force enumeration limited to {limit} nodes, graph has {n}")]
    TooLarge { n: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, SearchError>;

/// The five search families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmKind {
    Dfs,
    ModifiedDfs,
    Bfs,
    Rbfs,
    Dijkstra,
}

impl AlgorithmKind {
    pub const ALL: [AlgorithmKind; 5] = [
        AlgorithmKind::Dfs,
        AlgorithmKind::ModifiedDfs,
        AlgorithmKind::Bfs,
        AlgorithmKind::Rbfs,
        AlgorithmKind::Dijkstra,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::Dfs => "dfs",
            AlgorithmKind::ModifiedDfs => "modified-dfs",
            AlgorithmKind::Bfs => "bfs",
            AlgorithmKind::Rbfs => "rbfs",
            AlgorithmKind::Dijkstra => "dijkstra",
        }
    }

    /// Whether results are exact or threshold-exact and therefore
    /// independent of species order.
    pub fn is_order_independent(self) -> bool {
        matches!(self, AlgorithmKind::Rbfs | AlgorithmKind::Dijkstra)
    }
}

impl std::str::FromStr for AlgorithmKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        AlgorithmKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown algorithm `{s}` (expected dfs, modified-dfs, bfs, rbfs or dijkstra)"))
    }
}

/// A fully configured search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "kebab-case")]
pub enum Algorithm {
    Dfs,
    ModifiedDfs,
    Bfs,
    Rbfs {
        epsilon: f64,
    },
    Dijkstra {
        queue: QueueKind,
        adjacency: bool,
    },
    /// Dijkstra that skips relaxations below `epsilon` and stops once the
    /// best remaining value is below it.
    PrunedDijkstra {
        queue: QueueKind,
        adjacency: bool,
        epsilon: f64,
    },
}

impl Algorithm {
    pub fn kind(&self) -> AlgorithmKind {
        match self {
            Algorithm::Dfs => AlgorithmKind::Dfs,
            Algorithm::ModifiedDfs => AlgorithmKind::ModifiedDfs,
            Algorithm::Bfs => AlgorithmKind::Bfs,
            Algorithm::Rbfs { .. } => AlgorithmKind::Rbfs,
            Algorithm::Dijkstra { .. } | Algorithm::PrunedDijkstra { .. } => AlgorithmKind::Dijkstra,
        }
    }

    /// Stable label used in reports and benchmark tables.
    pub fn label(&self) -> String {
        fn dijkstra_label(queue: QueueKind, adjacency: bool) -> String {
            match (queue, adjacency) {
                (QueueKind::Naive, false) => "dijkstra-naive".into(),
                (QueueKind::Naive, true) => "dijkstra-adj".into(),
                (q, true) => format!("dijkstra-{}", q.name()),
                (q, false) => format!("dijkstra-{}-dense", q.name()),
            }
        }
        match *self {
            Algorithm::Dijkstra { queue, adjacency } => dijkstra_label(queue, adjacency),
            Algorithm::PrunedDijkstra {
                queue, adjacency, ..
            } => format!("pruned-{}", dijkstra_label(queue, adjacency)),
            other => other.kind().name().into(),
        }
    }

    pub fn epsilon(&self) -> Option<f64> {
        match *self {
            Algorithm::Rbfs { epsilon } | Algorithm::PrunedDijkstra { epsilon, .. } => Some(epsilon),
            _ => None,
        }
    }
}

/// Overall interaction coefficients from one search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OicVector {
    /// Root targets; more than one only for modified DFS.
    pub targets: Vec<usize>,
    pub values: Vec<f64>,
    pub algorithm: String,
    pub threshold: Option<f64>,
}

impl OicVector {
    fn new(targets: Vec<usize>, values: Vec<f64>, algorithm: &Algorithm) -> Self {
        Self {
            targets,
            values,
            algorithm: algorithm.label(),
            threshold: algorithm.epsilon(),
        }
    }

    pub fn target(&self) -> usize {
        self.targets[0]
    }
}

fn check_target(g: &InteractionGraph, target: usize) -> Result<()> {
    if target >= g.node_count() {
        return Err(SearchError::TargetOutOfRange {
            target,
            n: g.node_count(),
        });
    }
    Ok(())
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon <= 1.0 {
        Ok(())
    } else {
        Err(SearchError::BadThreshold(epsilon))
    }
}

/// Depth-first traversal from `root`, writing first-discovery values into
/// `values`. Nodes flagged in `reset` keep value 1 when reached.
fn dfs_from(
    g: &InteractionGraph,
    root: usize,
    values: &mut [f64],
    visited: &mut [bool],
    reset: Option<&[bool]>,
    stack: &mut Vec<(usize, f64)>,
) {
    stack.push((root, 1.0));
    while let Some((u, value)) = stack.pop() {
        if visited[u] {
            continue;
        }
        visited[u] = true;
        values[u] = if reset.is_some_and(|r| r[u]) { 1.0 } else { value };
        let ru = values[u];
        for (v, w) in g.neighbors(u).rev() {
            if !visited[v] {
                stack.push((v, ru * w));
            }
        }
    }
}

pub fn search_dfs(g: &InteractionGraph, target: usize) -> Result<OicVector> {
    check_target(g, target)?;
    let n = g.node_count();
    let mut values = vec![0.0; n];
    let mut visited = vec![false; n];
    dfs_from(g, target, &mut values, &mut visited, None, &mut Vec::new());
    Ok(OicVector::new(vec![target], values, &Algorithm::Dfs))
}

/// DFS with every target pinned at 1, started from the lowest target and
/// restarted only from targets the earlier passes did not reach. Returns one
/// combined vector.
pub fn search_modified_dfs(g: &InteractionGraph, targets: &[usize]) -> Result<OicVector> {
    if targets.is_empty() {
        return Err(SearchError::NoTargets);
    }
    let n = g.node_count();
    let mut sorted = targets.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut is_target = vec![false; n];
    for &t in &sorted {
        check_target(g, t)?;
        is_target[t] = true;
    }
    let mut values = vec![0.0; n];
    for &t in &sorted {
        values[t] = 1.0;
    }
    let mut visited = vec![false; n];
    let mut stack = Vec::new();
    for &t in &sorted {
        if !visited[t] {
            dfs_from(g, t, &mut values, &mut visited, Some(&is_target), &mut stack);
        }
    }
    Ok(OicVector::new(sorted, values, &Algorithm::ModifiedDfs))
}

pub fn search_bfs(g: &InteractionGraph, target: usize) -> Result<OicVector> {
    check_target(g, target)?;
    let n = g.node_count();
    let mut values = vec![0.0; n];
    let mut discovered = vec![false; n];
    let mut queue = VecDeque::new();
    values[target] = 1.0;
    discovered[target] = true;
    queue.push_back(target);
    while let Some(u) = queue.pop_front() {
        let ru = values[u];
        for (v, w) in g.neighbors(u) {
            if !discovered[v] {
                discovered[v] = true;
                values[v] = ru * w;
                queue.push_back(v);
            }
        }
    }
    Ok(OicVector::new(vec![target], values, &Algorithm::Bfs))
}

/// Label-correcting BFS: a node is improved and requeued whenever a path
/// product beats its current value, but products below `epsilon` are
/// never followed.
pub fn search_rbfs(g: &InteractionGraph, target: usize, epsilon: f64) -> Result<OicVector> {
    check_target(g, target)?;
    check_epsilon(epsilon)?;
    let n = g.node_count();
    let mut values = vec![0.0; n];
    let mut queued = vec![false; n];
    let mut queue = VecDeque::new();
    values[target] = 1.0;
    queued[target] = true;
    queue.push_back(target);
    while let Some(u) = queue.pop_front() {
        queued[u] = false;
        let ru = values[u];
        for (v, w) in g.neighbors(u) {
            let candidate = ru * w;
            if candidate >= epsilon && candidate > values[v] {
                values[v] = candidate;
                if !queued[v] {
                    queued[v] = true;
                    queue.push_back(v);
                }
            }
        }
    }
    Ok(OicVector::new(vec![target], values, &Algorithm::Rbfs { epsilon }))
}

/// Neighbor access for Dijkstra: adjacency lists or a dense row scan.
pub trait Neighbors {
    fn node_count(&self) -> usize;
    fn for_each_neighbor(&self, node: usize, f: impl FnMut(usize, f64));
}

impl Neighbors for InteractionGraph {
    fn node_count(&self) -> usize {
        InteractionGraph::node_count(self)
    }

    #[inline]
    fn for_each_neighbor(&self, node: usize, mut f: impl FnMut(usize, f64)) {
        for (v, w) in self.neighbors(node) {
            f(v, w);
        }
    }
}

impl Neighbors for DenseGraph {
    fn node_count(&self) -> usize {
        DenseGraph::node_count(self)
    }

    #[inline]
    fn for_each_neighbor(&self, node: usize, mut f: impl FnMut(usize, f64)) {
        for (v, &w) in self.row(node).iter().enumerate() {
            if w > 0.0 {
                f(v, w);
            }
        }
    }
}

/// Dijkstra's algorithm for max-product paths over any queue and neighbor
/// source. With `epsilon`, relaxations below it are skipped and the loop
/// stops once the best queued value falls below it.
pub fn dijkstra_with<Q: MaxPriorityQueue, G: Neighbors>(
    g: &G,
    target: usize,
    epsilon: Option<f64>,
) -> Vec<f64> {
    let n = g.node_count();
    let mut values = vec![0.0; n];
    values[target] = 1.0;
    let mut queue = Q::from_keys(&values);
    let floor = epsilon.unwrap_or(0.0);
    while let Ok((u, ru)) = queue.extract_max() {
        if epsilon.is_some() && ru < floor {
            break;
        }
        g.for_each_neighbor(u, |v, w| {
            let candidate = ru * w;
            if candidate > values[v] && candidate >= floor && queue.contains(v) {
                values[v] = candidate;
                queue
                    .increase_key(v, candidate)
                    .expect("queued node with a larger key");
            }
        });
    }
    values
}

fn dispatch_dijkstra<G: Neighbors>(g: &G, target: usize, queue: QueueKind, epsilon: Option<f64>) -> Vec<f64> {
    match queue {
        QueueKind::Naive => dijkstra_with::<NaiveQueue, _>(g, target, epsilon),
        QueueKind::BinaryHeap => dijkstra_with::<BinaryHeap, _>(g, target, epsilon),
        QueueKind::FibonacciHeap => dijkstra_with::<FibonacciHeap, _>(g, target, epsilon),
    }
}

/// Exact overall interaction coefficients. With `adjacency == false` the
/// graph is expanded to a dense matrix and every row is scanned in full.
pub fn search_dijkstra(
    g: &InteractionGraph,
    target: usize,
    queue: QueueKind,
    adjacency: bool,
) -> Result<OicVector> {
    check_target(g, target)?;
    let values = if adjacency {
        dispatch_dijkstra(g, target, queue, None)
    } else {
        dispatch_dijkstra(&g.to_dense(), target, queue, None)
    };
    Ok(OicVector::new(
        vec![target],
        values,
        &Algorithm::Dijkstra { queue, adjacency },
    ))
}

pub fn search_pruned_dijkstra(
    g: &InteractionGraph,
    target: usize,
    queue: QueueKind,
    adjacency: bool,
    epsilon: f64,
) -> Result<OicVector> {
    check_target(g, target)?;
    check_epsilon(epsilon)?;
    let values = if adjacency {
        dispatch_dijkstra(g, target, queue, Some(epsilon))
    } else {
        dispatch_dijkstra(&g.to_dense(), target, queue, Some(epsilon))
    };
    Ok(OicVector::new(
        vec![target],
        values,
        &Algorithm::PrunedDijkstra {
            queue,
            adjacency,
            epsilon,
        },
    ))
}

pub const BRUTE_FORCE_LIMIT: usize = 12;

/// Maximum path product over every simple path from `target`, by
/// exhaustive enumeration. Only for small graphs.
pub fn brute_force_oic(g: &InteractionGraph, target: usize, limit: usize) -> Result<Vec<f64>> {
    check_target(g, target)?;
    let n = g.node_count();
    if n > limit {
        return Err(SearchError::TooLarge { n, limit });
    }
    fn extend(g: &InteractionGraph, u: usize, product: f64, on_path: &mut [bool], best: &mut [f64]) {
        for (v, w) in g.neighbors(u) {
            if on_path[v] {
                continue;
            }
            let p = product * w;
            if p > best[v] {
                best[v] = p;
            }
            on_path[v] = true;
            extend(g, v, p, on_path, best);
            on_path[v] = false;
        }
    }
    let mut best = vec![0.0; n];
    best[target] = 1.0;
    let mut on_path = vec![false; n];
    on_path[target] = true;
    extend(g, target, 1.0, &mut on_path, &mut best);
    Ok(best)
}

/// Runs `algorithm` for each target. Modified DFS yields one combined
/// vector; every other algorithm yields one vector per target, in order.
pub fn run_search(g: &InteractionGraph, targets: &[usize], algorithm: &Algorithm) -> Result<Vec<OicVector>> {
    run_search_prepared(g, None, targets, algorithm)
}

fn needs_dense(algorithm: &Algorithm) -> bool {
    matches!(
        algorithm,
        Algorithm::Dijkstra { adjacency: false, .. } | Algorithm::PrunedDijkstra { adjacency: false, .. }
    )
}

/// As [`run_search`], reusing a dense copy of `g` when one is supplied.
pub fn run_search_prepared(
    g: &InteractionGraph,
    dense: Option<&DenseGraph>,
    targets: &[usize],
    algorithm: &Algorithm,
) -> Result<Vec<OicVector>> {
    if targets.is_empty() {
        return Err(SearchError::NoTargets);
    }
    if let Algorithm::ModifiedDfs = algorithm {
        return Ok(vec![search_modified_dfs(g, targets)?]);
    }
    let owned;
    let dense = match (needs_dense(algorithm), dense) {
        (true, Some(d)) => Some(d),
        (true, None) => {
            owned = g.to_dense();
            Some(&owned)
        }
        (false, _) => None,
    };
    targets
        .iter()
        .map(|&t| {
            check_target(g, t)?;
            Ok(match *algorithm {
                Algorithm::Dfs => search_dfs(g, t)?,
                Algorithm::Bfs => search_bfs(g, t)?,
                Algorithm::Rbfs { epsilon } => search_rbfs(g, t, epsilon)?,
                Algorithm::Dijkstra { queue, .. } => {
                    let values = match dense {
                        Some(d) => dispatch_dijkstra(d, t, queue, None),
                        None => dispatch_dijkstra(g, t, queue, None),
                    };
                    OicVector::new(vec![t], values, algorithm)
                }
                Algorithm::PrunedDijkstra { queue, epsilon, .. } => {
                    check_epsilon(epsilon)?;
                    let values = match dense {
                        Some(d) => dispatch_dijkstra(d, t, queue, Some(epsilon)),
                        None => dispatch_dijkstra(g, t, queue, Some(epsilon)),
                    };
                    OicVector::new(vec![t], values, algorithm)
                }
                Algorithm::ModifiedDfs => unreachable!(),
            })
        })
        .collect()
}

/// The four Dijkstra configurations compared in the efficiency study.
pub fn dijkstra_variants() -> [Algorithm; 4] {
    [
        Algorithm::Dijkstra {
            queue: QueueKind::Naive,
            adjacency: false,
        },
        Algorithm::Dijkstra {
            queue: QueueKind::Naive,
            adjacency: true,
        },
        Algorithm::Dijkstra {
            queue: QueueKind::BinaryHeap,
            adjacency: true,
        },
        Algorithm::Dijkstra {
            queue: QueueKind::FibonacciHeap,
            adjacency: true,
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn graph(n: usize, edges: &[(usize, usize, f64)]) -> InteractionGraph {
        InteractionGraph::from_edges(n, edges).unwrap()
    }

    fn all_dijkstra(g: &InteractionGraph, t: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        for q in QueueKind::ALL {
            for adj in [false, true] {
                out.push(search_dijkstra(g, t, q, adj).unwrap().values);
            }
        }
        out
    }

    // T=0, Y=1, X=2: T->Y 0.1, T->X 0.9, X->Y 0.9
    fn triangle(y_first: bool) -> (InteractionGraph, usize, usize) {
        let (y, x) = if y_first { (1, 2) } else { (2, 1) };
        (graph(3, &[(0, y, 0.1), (0, x, 0.9), (x, y, 0.9)]), y, x)
    }

    #[test]
    fn dfs_first_discovery_depends_on_order() {
        let (g, y, _) = triangle(true);
        assert_eq!(search_dfs(&g, 0).unwrap().values[y], 0.1);
        let (g, y, _) = triangle(false);
        assert!((search_dfs(&g, 0).unwrap().values[y] - 0.81).abs() < 1e-15);
    }

    #[test]
    fn isolated_target() {
        let g = graph(4, &[]);
        let expect = vec![0.0, 0.0, 1.0, 0.0];
        assert_eq!(search_dfs(&g, 2).unwrap().values, expect);
        assert_eq!(search_bfs(&g, 2).unwrap().values, expect);
        assert_eq!(search_rbfs(&g, 2, 0.1).unwrap().values, expect);
        for v in all_dijkstra(&g, 2) {
            assert_eq!(v, expect);
        }
    }

    #[test]
    fn chain_is_exact_everywhere() {
        let g = graph(3, &[(0, 1, 0.5), (1, 2, 0.5)]);
        assert_eq!(search_dfs(&g, 0).unwrap().values[2], 0.25);
        assert_eq!(search_bfs(&g, 0).unwrap().values[2], 0.25);
        assert_eq!(search_dijkstra(&g, 0, QueueKind::BinaryHeap, true).unwrap().values[2], 0.25);
    }

    #[test]
    fn modified_dfs() {
        let g = graph(3, &[(0, 1, 0.1), (0, 2, 0.9), (2, 1, 0.9)]);
        assert_eq!(
            search_modified_dfs(&g, &[0]).unwrap().values,
            search_dfs(&g, 0).unwrap().values
        );

        // two components
        let g = graph(4, &[(0, 1, 0.5), (2, 3, 0.25)]);
        let v = search_modified_dfs(&g, &[2, 0]).unwrap();
        assert_eq!(v.values, vec![1.0, 0.5, 1.0, 0.25]);
        assert_eq!(v.targets, vec![0, 2]);

        // chain T1 -> A -> T2 -> B: T2 restarts the product
        let g = graph(4, &[(0, 1, 0.5), (1, 2, 0.5), (2, 3, 0.5)]);
        assert_eq!(search_dfs(&g, 0).unwrap().values, vec![1.0, 0.5, 0.25, 0.125]);
        assert_eq!(
            search_modified_dfs(&g, &[0, 2]).unwrap().values,
            vec![1.0, 0.5, 1.0, 0.5]
        );
        assert_eq!(search_modified_dfs(&g, &[]), Err(SearchError::NoTargets));
    }

    #[test]
    fn bfs_prefers_fewest_hops() {
        for y_first in [true, false] {
            let (g, y, _) = triangle(y_first);
            assert_eq!(search_bfs(&g, 0).unwrap().values[y], 0.1);
            let d = search_dijkstra(&g, 0, QueueKind::BinaryHeap, true).unwrap();
            assert!((d.values[y] - 0.81).abs() < 1e-15);
            let r = search_rbfs(&g, 0, 0.5).unwrap();
            assert_eq!(r.values[y], d.values[y]);
        }
    }

    #[test]
    fn rbfs_threshold_one() {
        let g = graph(4, &[(0, 1, 1.0), (1, 2, 1.0), (0, 3, 0.99)]);
        assert_eq!(search_rbfs(&g, 0, 1.0).unwrap().values, vec![1.0, 1.0, 1.0, 0.0]);
        assert_eq!(search_rbfs(&g, 0, 0.0), Err(SearchError::BadThreshold(0.0)));
        assert!(search_rbfs(&g, 0, 1.5).is_err());
    }

    #[test]
    fn diamond() {
        let g = graph(4, &[(0, 1, 0.9), (0, 2, 0.5), (1, 3, 0.9), (2, 3, 0.9)]);
        for v in all_dijkstra(&g, 0) {
            assert!((v[3] - 0.81).abs() < 1e-15);
        }
        let b = brute_force_oic(&g, 0, BRUTE_FORCE_LIMIT).unwrap();
        assert!((b[3] - 0.81).abs() < 1e-15);
    }

    #[test]
    fn cycle_terminates() {
        let g = graph(3, &[(0, 1, 0.5), (1, 2, 0.8), (2, 1, 0.9)]);
        for v in all_dijkstra(&g, 0) {
            assert_eq!(v, vec![1.0, 0.5, 0.4]);
        }
        assert_eq!(search_rbfs(&g, 0, 1e-9).unwrap().values, vec![1.0, 0.5, 0.4]);
    }

    #[test]
    fn brute_force_basics() {
        let g = graph(3, &[(0, 1, 0.7)]);
        assert_eq!(brute_force_oic(&g, 0, 12).unwrap(), vec![1.0, 0.7, 0.0]);
        let big = graph(13, &[]);
        assert_eq!(
            brute_force_oic(&big, 0, 12),
            Err(SearchError::TooLarge { n: 13, limit: 12 })
        );
    }

    #[test]
    fn out_of_range_target() {
        let g = graph(2, &[]);
        assert!(matches!(search_dfs(&g, 5), Err(SearchError::TargetOutOfRange { .. })));
        assert!(matches!(
            search_dijkstra(&g, 2, QueueKind::Naive, true),
            Err(SearchError::TargetOutOfRange { .. })
        ));
    }

    #[test]
    fn labels() {
        let labels: Vec<String> = dijkstra_variants().iter().map(Algorithm::label).collect();
        assert_eq!(
            labels,
            vec!["dijkstra-naive", "dijkstra-adj", "dijkstra-binary-heap", "dijkstra-fibonacci-heap"]
        );
        for k in AlgorithmKind::ALL {
            assert_eq!(k.name().parse::<AlgorithmKind>().unwrap(), k);
        }
    }

    fn arb_graph() -> impl Strategy<Value = InteractionGraph> {
        (1usize..=10).prop_flat_map(|n| {
            proptest::collection::vec((0..n, 0..n, 0.01f64..=1.0), 0..(n * n))
                .prop_map(move |edges| {
                    let mut seen = std::collections::HashSet::new();
                    let edges: Vec<_> = edges
                        .into_iter()
                        .filter(|&(u, v, _)| u != v && seen.insert((u, v)))
                        .collect();
                    InteractionGraph::from_edges(n, &edges).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn dijkstra_matches_brute_force(g in arb_graph()) {
            let oracle = brute_force_oic(&g, 0, BRUTE_FORCE_LIMIT).unwrap();
            for v in all_dijkstra(&g, 0) {
                for (a, b) in v.iter().zip(&oracle) {
                    prop_assert!((a - b).abs() <= 1e-12);
                }
            }
        }

        #[test]
        fn baselines_never_exceed_dijkstra(g in arb_graph(), eps in 0.001f64..=1.0) {
            let d = search_dijkstra(&g, 0, QueueKind::BinaryHeap, true).unwrap().values;
            let dfs = search_dfs(&g, 0).unwrap().values;
            let bfs = search_bfs(&g, 0).unwrap().values;
            let rbfs = search_rbfs(&g, 0, eps).unwrap().values;
            for i in 0..g.node_count() {
                prop_assert!(dfs[i] <= d[i]);
                prop_assert!(bfs[i] <= d[i]);
                let expected = if d[i] >= eps { d[i] } else { 0.0 };
                prop_assert_eq!(rbfs[i], expected);
                prop_assert!((0.0..=1.0).contains(&d[i]));
                // reachability: positive only where DFS reached
                prop_assert_eq!(d[i] > 0.0, dfs[i] > 0.0);
            }
            let pruned = search_pruned_dijkstra(&g, 0, QueueKind::BinaryHeap, true, eps).unwrap().values;
            prop_assert_eq!(pruned, rbfs);
        }
    }
}
