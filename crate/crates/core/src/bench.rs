//! Wall-clock comparison of search algorithms on fixed graphs.
//!
//! Every configuration gets one discarded warm-up pass and at least three
//! timed repetitions. Costs are normalized by naive Dijkstra over a dense
//! matrix, which is always measured. Before anything is timed the Dijkstra
//! variants must agree exactly, otherwise the run is rejected.

use std::fmt::Write as _;
use std::time::Instant;

use serde::Serialize;
use thiserror::Error;

use crate::graph::{DenseGraph, InteractionGraph};
use crate::heaps::QueueKind;
use crate::search::{run_search_prepared, Algorithm, SearchError};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("at least 3 repetitions are required, got {0}")]
    TooFewRepetitions(usize),
    #[error("{algorithm} disagrees with {reference} on target {target}")]
    Disagreement {
        algorithm: String,
        reference: String,
        target: usize,
    },
    #[error("no thresholds given")]
    NoThresholds,
    #[error(transparent)]
    Search(#[from] SearchError),
}

pub type Result<T> = std::result::Result<T, BenchError>;

pub const MIN_REPETITIONS: usize = 3;

pub const ANCHOR: Algorithm = Algorithm::Dijkstra {
    queue: QueueKind::Naive,
    adjacency: false,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchResult {
    pub algorithm: String,
    pub nodes: usize,
    pub edges: usize,
    pub repetitions: usize,
    pub mean_seconds: f64,
    pub stddev_seconds: f64,
    pub normalized_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub epsilon: f64,
    pub algorithm: String,
    pub nodes: usize,
    pub edges: usize,
    pub repetitions: usize,
    pub mean_seconds: f64,
    pub stddev_seconds: f64,
    /// Above-threshold (search, species) pairs.
    pub retained: usize,
}

fn mean_stddev(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Graphs with their dense copies, built once outside any timing.
struct Prepared<'a> {
    graphs: Vec<(&'a InteractionGraph, DenseGraph)>,
}

impl<'a> Prepared<'a> {
    fn new(graphs: &'a [InteractionGraph]) -> Self {
        Prepared {
            graphs: graphs.iter().map(|g| (g, g.to_dense())).collect(),
        }
    }

    fn nodes(&self) -> usize {
        mean_count(self.graphs.iter().map(|(g, _)| g.node_count()))
    }

    fn edges(&self) -> usize {
        mean_count(self.graphs.iter().map(|(g, _)| g.edge_count()))
    }
}

fn mean_count(xs: impl ExactSizeIterator<Item = usize>) -> usize {
    let n = xs.len().max(1);
    (xs.sum::<usize>() + n / 2) / n
}

/// One pass: the algorithm over every target of every graph, values
/// concatenated graph by graph.
fn one_pass(p: &Prepared, targets: &[usize], algorithm: &Algorithm) -> Result<Vec<Vec<f64>>> {
    let mut out = Vec::new();
    for (g, dense) in &p.graphs {
        out.extend(
            run_search_prepared(g, Some(dense), targets, algorithm)?
                .into_iter()
                .map(|o| o.values),
        );
    }
    Ok(out)
}

fn time_passes(p: &Prepared, targets: &[usize], algorithm: &Algorithm, repetitions: usize) -> Result<Vec<f64>> {
    one_pass(p, targets, algorithm)?;
    let mut times = Vec::with_capacity(repetitions);
    for _ in 0..repetitions {
        let start = Instant::now();
        let out = one_pass(p, targets, algorithm)?;
        times.push(start.elapsed().as_secs_f64());
        std::hint::black_box(out);
    }
    Ok(times)
}

fn check_agreement(p: &Prepared, targets: &[usize], algorithms: &[Algorithm]) -> Result<()> {
    let reference = one_pass(p, targets, &ANCHOR)?;
    for alg in algorithms {
        if !matches!(alg, Algorithm::Dijkstra { .. }) {
            continue;
        }
        let got = one_pass(p, targets, alg)?;
        for (i, (a, b)) in got.iter().zip(&reference).enumerate() {
            if a.iter().zip(b).any(|(x, y)| x.to_bits() != y.to_bits()) {
                return Err(BenchError::Disagreement {
                    algorithm: alg.label(),
                    reference: ANCHOR.label(),
                    target: targets[i % targets.len()],
                });
            }
        }
    }
    Ok(())
}

/// Times each algorithm over all `targets` of every graph. The naive dense
/// anchor comes first in the output whether or not it was requested. `V`
/// and `E` are the mean node and edge counts of `graphs`.
pub fn run_benchmark(
    graphs: &[InteractionGraph],
    targets: &[usize],
    algorithms: &[Algorithm],
    repetitions: usize,
) -> Result<Vec<BenchResult>> {
    if repetitions < MIN_REPETITIONS {
        return Err(BenchError::TooFewRepetitions(repetitions));
    }
    let p = Prepared::new(graphs);
    check_agreement(&p, targets, algorithms)?;

    let mut order = vec![ANCHOR];
    order.extend(algorithms.iter().copied().filter(|a| *a != ANCHOR));
    let mut results: Vec<BenchResult> = Vec::with_capacity(order.len());
    for alg in &order {
        let times = time_passes(&p, targets, alg, repetitions)?;
        let (mean, stddev) = mean_stddev(&times);
        results.push(BenchResult {
            algorithm: alg.label(),
            nodes: p.nodes(),
            edges: p.edges(),
            repetitions,
            mean_seconds: mean,
            stddev_seconds: stddev,
            normalized_cost: 0.0,
        });
    }
    let anchor = results[0].mean_seconds;
    for r in &mut results {
        r.normalized_cost = if anchor > 0.0 { r.mean_seconds / anchor } else { 0.0 };
    }
    Ok(results)
}

/// The pruned searches compared across thresholds.
pub fn sweep_algorithms(epsilon: f64) -> Vec<Algorithm> {
    let mut out = vec![Algorithm::Rbfs { epsilon }];
    for (queue, adjacency) in [
        (QueueKind::Naive, false),
        (QueueKind::Naive, true),
        (QueueKind::BinaryHeap, true),
        (QueueKind::FibonacciHeap, true),
    ] {
        out.push(Algorithm::PrunedDijkstra {
            queue,
            adjacency,
            epsilon,
        });
    }
    out
}

/// Above-threshold flags, one row per (graph, target) search.
fn retained(values: &[Vec<f64>], epsilon: f64) -> Vec<Vec<bool>> {
    values
        .iter()
        .map(|v| v.iter().map(|&x| x >= epsilon).collect())
        .collect()
}

/// Times threshold-pruned searches at each `epsilon`. All of them must
/// retain the same species, namely those whose exact value reaches
/// `epsilon` for some target.
pub fn threshold_sweep(
    graphs: &[InteractionGraph],
    targets: &[usize],
    epsilons: &[f64],
    repetitions: usize,
) -> Result<Vec<SweepResult>> {
    if repetitions < MIN_REPETITIONS {
        return Err(BenchError::TooFewRepetitions(repetitions));
    }
    if epsilons.is_empty() {
        return Err(BenchError::NoThresholds);
    }
    let p = Prepared::new(graphs);
    let exact = one_pass(&p, targets, &ANCHOR)?;
    let mut out = Vec::new();
    for &eps in epsilons {
        let expected = retained(&exact, eps);
        for alg in sweep_algorithms(eps) {
            let got = retained(&one_pass(&p, targets, &alg)?, eps);
            if let Some(i) = (0..got.len()).find(|&i| got[i] != expected[i]) {
                return Err(BenchError::Disagreement {
                    algorithm: alg.label(),
                    reference: ANCHOR.label(),
                    target: targets[i % targets.len()],
                });
            }
            let times = time_passes(&p, targets, &alg, repetitions)?;
            let (mean, stddev) = mean_stddev(&times);
            out.push(SweepResult {
                epsilon: eps,
                algorithm: alg.label(),
                nodes: p.nodes(),
                edges: p.edges(),
                repetitions,
                mean_seconds: mean,
                stddev_seconds: stddev,
                retained: expected.iter().flatten().filter(|&&r| r).count(),
            });
        }
    }
    Ok(out)
}

pub const BENCH_HEADER: &str = "algorithm,V,E,repetitions,mean_seconds,stddev_seconds,normalized_cost";
pub const SWEEP_HEADER: &str = "epsilon,algorithm,V,E,repetitions,mean_seconds,stddev_seconds,retained";

pub fn bench_csv(results: &[BenchResult]) -> String {
    let mut out = format!("{BENCH_HEADER}\n");
    for r in results {
        let _ = writeln!(
            out,
            "{},{},{},{},{:e},{:e},{:e}",
            r.algorithm, r.nodes, r.edges, r.repetitions, r.mean_seconds, r.stddev_seconds, r.normalized_cost
        );
    }
    out
}

pub fn sweep_csv(results: &[SweepResult]) -> String {
    let mut out = format!("{SWEEP_HEADER}\n");
    for r in results {
        let _ = writeln!(
            out,
            "{:e},{},{},{},{},{:e},{:e},{}",
            r.epsilon, r.algorithm, r.nodes, r.edges, r.repetitions, r.mean_seconds, r.stddev_seconds, r.retained
        );
    }
    out
}

/// Columns of a benchmark table that do not depend on the clock.
pub fn stable_columns(csv: &str) -> Vec<Vec<String>> {
    let mut lines = csv.lines();
    let Some(header) = lines.next() else {
        return Vec::new();
    };
    let names: Vec<&str> = header.split(',').collect();
    let keep: Vec<usize> = names
        .iter()
        .enumerate()
        .filter(|(_, n)| !matches!(**n, "mean_seconds" | "stddev_seconds" | "normalized_cost"))
        .map(|(i, _)| i)
        .collect();
    std::iter::once(header)
        .chain(lines)
        .map(|l| {
            let cells: Vec<&str> = l.split(',').collect();
            keep.iter().map(|&i| cells.get(i).unwrap_or(&"").to_string()).collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::random_graph;
    use crate::search::dijkstra_variants;

    #[test]
    fn anchor_first_and_normalized() {
        let g = random_graph(3, 40, 200).unwrap();
        let res = run_benchmark(std::slice::from_ref(&g), &[0, 1], &dijkstra_variants(), 3).unwrap();
        assert_eq!(res[0].algorithm, "dijkstra-naive");
        assert_eq!(res[0].normalized_cost, 1.0);
        assert_eq!(res.len(), 4);
        assert!(res.iter().all(|r| r.nodes == 40 && r.edges == 200 && r.repetitions == 3));
    }

    #[test]
    fn all_algorithms_run() {
        let g = random_graph(4, 30, 90).unwrap();
        let algs = [
            Algorithm::Dfs,
            Algorithm::ModifiedDfs,
            Algorithm::Bfs,
            Algorithm::Rbfs { epsilon: 0.01 },
        ];
        let res = run_benchmark(std::slice::from_ref(&g), &[0, 5], &algs, 3).unwrap();
        let labels: Vec<&str> = res.iter().map(|r| r.algorithm.as_str()).collect();
        assert_eq!(labels, ["dijkstra-naive", "dfs", "modified-dfs", "bfs", "rbfs"]);
    }

    #[test]
    fn too_few_repetitions() {
        let g = random_graph(1, 5, 5).unwrap();
        assert!(matches!(
            run_benchmark(std::slice::from_ref(&g), &[0], &[], 2),
            Err(BenchError::TooFewRepetitions(2))
        ));
    }

    #[test]
    fn sweep_rows_and_counts() {
        let g = random_graph(8, 50, 300).unwrap();
        let res = threshold_sweep(std::slice::from_ref(&g), &[0], &[1e-3, 0.5], 3).unwrap();
        assert_eq!(res.len(), 10);
        assert!(res[0].retained >= res[5].retained);
        assert!(matches!(threshold_sweep(std::slice::from_ref(&g), &[0], &[], 3), Err(BenchError::NoThresholds)));
    }

    #[test]
    fn csv_layout() {
        let g = random_graph(2, 10, 20).unwrap();
        let res = run_benchmark(std::slice::from_ref(&g), &[0], &[], 3).unwrap();
        let csv = bench_csv(&res);
        assert!(csv.starts_with(BENCH_HEADER));
        let stable = stable_columns(&csv);
        assert_eq!(stable[0], ["algorithm", "V", "E", "repetitions"]);
        assert_eq!(stable[1], ["dijkstra-naive", "10", "20", "3"]);
    }
}
