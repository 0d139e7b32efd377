//! From per-sample interaction coefficients to a skeletal mechanism.
//!
//! Each target's coefficients are weighted by a time-dependent scaling
//! factor built from element pseudo-production rates, maximized over
//! targets and samples, and compared against a cutoff threshold. Targets
//! are always retained.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::build_graph_with_flux;
use crate::heaps::QueueKind;
use crate::exact::{quotient, Expansion};
use crate::kinetics::{exact_pseudo_production, species_flux, RateSampleSet, SpeciesFlux};
use crate::mechanism::{emit_skeletal_mechanism, Mechanism, MechanismError, Permutation};
use crate::search::{run_search, Algorithm, AlgorithmKind, SearchError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReductionError {
    #[error("unknown target species `{0}`")]
    UnknownTarget(String),
    #[error("no target species given")]
    NoTargets,
    #[error("modified DFS combines all targets and cannot be used with coefficient scaling")]
    ScalingWithModifiedDfs,
    #[error("threshold {0} outside (0, 1]")]
    ThresholdOutOfRange(f64),
    #[error("{0} needs an explicit threshold")]
    MissingThreshold(&'static str),
    #[error("error limit {0} must be positive")]
    BadErrorLimit(f64),
    #[error("RBFS depends on the threshold and cannot be used for oracle-driven threshold selection")]
    RbfsSelection,
    #[error("at least one shuffle seed is required")]
    NoSeeds,
    #[error("error oracle failed at threshold {threshold}: {message}")]
    Oracle { threshold: f64, message: String },
    #[error("no threshold meets the {limit}% error limit; best was {best_threshold} with {best_error}% error")]
    NoCandidate {
        limit: f64,
        best_threshold: f64,
        best_error: f64,
    },
    #[error(transparent)]
    Search(#[from] SearchError),
    #[error(transparent)]
    Mechanism(#[from] MechanismError),
}

pub type Result<T> = std::result::Result<T, ReductionError>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionConfig {
    /// Target species names.
    pub targets: Vec<String>,
    pub threshold: Option<f64>,
    /// Maximum acceptable error, in percent, for oracle-driven selection.
    pub error_limit: Option<f64>,
    pub scaling: bool,
    pub algorithm: AlgorithmKind,
    pub queue: QueueKind,
    /// Adjacency lists (true) or a dense weight matrix (false) for Dijkstra.
    pub adjacency: bool,
}

impl ReductionConfig {
    pub fn new(targets: &[&str], algorithm: AlgorithmKind) -> Self {
        Self {
            targets: targets.iter().map(|s| s.to_string()).collect(),
            threshold: None,
            error_limit: None,
            scaling: false,
            algorithm,
            queue: QueueKind::BinaryHeap,
            adjacency: true,
        }
    }

    pub fn with_threshold(mut self, epsilon: f64) -> Self {
        self.threshold = Some(epsilon);
        self
    }

    pub fn with_scaling(mut self, scaling: bool) -> Self {
        self.scaling = scaling;
        self
    }

    pub fn with_queue(mut self, queue: QueueKind, adjacency: bool) -> Self {
        self.queue = queue;
        self.adjacency = adjacency;
        self
    }

    /// Resolves target names to species indices (in the given order) and
    /// checks the combination of options.
    pub fn resolve_targets(&self, mech: &Mechanism) -> Result<Vec<usize>> {
        if self.targets.is_empty() {
            return Err(ReductionError::NoTargets);
        }
        if self.scaling && self.algorithm == AlgorithmKind::ModifiedDfs {
            return Err(ReductionError::ScalingWithModifiedDfs);
        }
        if let Some(eps) = self.threshold {
            check_threshold(eps)?;
        }
        let mut out = Vec::new();
        for name in &self.targets {
            let i = mech
                .species_index(name)
                .ok_or_else(|| ReductionError::UnknownTarget(name.clone()))?;
            if !out.contains(&i) {
                out.push(i);
            }
        }
        Ok(out)
    }

    pub fn search_algorithm(&self) -> Result<Algorithm> {
        Ok(match self.algorithm {
            AlgorithmKind::Dfs => Algorithm::Dfs,
            AlgorithmKind::ModifiedDfs => Algorithm::ModifiedDfs,
            AlgorithmKind::Bfs => Algorithm::Bfs,
            AlgorithmKind::Rbfs => Algorithm::Rbfs {
                epsilon: self.threshold.ok_or(ReductionError::MissingThreshold("RBFS"))?,
            },
            AlgorithmKind::Dijkstra => Algorithm::Dijkstra {
                queue: self.queue,
                adjacency: self.adjacency,
            },
        })
    }
}

fn check_threshold(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(ReductionError::ThresholdOutOfRange(eps))
    }
}

/// Per-sample target scaling coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingSeries {
    pub targets: Vec<usize>,
    pub elements: Vec<String>,
    /// `[sample][target][element]`, unnormalized.
    pub alpha_element: Vec<Vec<Vec<f64>>>,
    /// `[sample][target]`, in [0, 1].
    pub alpha_target: Vec<Vec<f64>>,
}

fn scaling_from_fluxes(mech: &Mechanism, fluxes: &[SpeciesFlux], targets: &[usize]) -> ScalingSeries {
    let elements = mech.elements.clone();
    let mut alpha_element = Vec::with_capacity(fluxes.len());
    let mut time_max = vec![vec![0.0f64; elements.len()]; targets.len()];
    for flux in fluxes {
        let pseudo: Vec<Expansion> = elements
            .iter()
            .map(|el| exact_pseudo_production(mech, flux, el))
            .collect();
        let per_target: Vec<Vec<f64>> = targets
            .iter()
            .enumerate()
            .map(|(ti, &t)| {
                let net = flux.exact_net(t).abs();
                elements
                    .iter()
                    .enumerate()
                    .map(|(ei, el)| {
                        let alpha = if !pseudo[ei].is_zero() {
                            let mut numer = Expansion::new();
                            numer.add_scaled(&net, f64::from(mech.species[t].atoms(el)));
                            quotient(&numer, &pseudo[ei])
                        } else {
                            0.0
                        };
                        time_max[ti][ei] = time_max[ti][ei].max(alpha);
                        alpha
                    })
                    .collect()
            })
            .collect();
        alpha_element.push(per_target);
    }
    let alpha_target = alpha_element
        .iter()
        .map(|per_target| {
            per_target
                .iter()
                .enumerate()
                .map(|(ti, per_element)| {
                    per_element
                        .iter()
                        .zip(&time_max[ti])
                        .filter(|(_, &m)| m > 0.0)
                        .map(|(&a, &m)| a / m)
                        .fold(0.0, f64::max)
                })
                .collect()
        })
        .collect();
    ScalingSeries {
        targets: targets.to_vec(),
        elements,
        alpha_element,
        alpha_target,
    }
}

/// Scaling coefficients for every (sample, target). The time maximum used
/// for normalization runs over all samples of all datasets.
pub fn scaling_coefficients(mech: &Mechanism, samples: &RateSampleSet, targets: &[usize]) -> ScalingSeries {
    let fluxes: Vec<SpeciesFlux> = samples.samples().iter().map(|s| species_flux(mech, s)).collect();
    scaling_from_fluxes(mech, &fluxes, targets)
}

/// Where a species' overall importance was attained.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub dataset: String,
    pub sample: usize,
    pub time: f64,
    /// `None` for modified DFS, whose vector combines all targets.
    pub target: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceVector {
    pub values: Vec<f64>,
    pub provenance: Vec<Option<Provenance>>,
    /// DIC values above 1 that were clamped while building graphs.
    pub clamp_count: usize,
    pub timings: Timings,
}

/// Wall time per phase, in seconds.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Timings(pub Vec<(String, f64)>);

impl Timings {
    fn record(&mut self, phase: &str, start: Instant) {
        self.0.push((phase.to_string(), start.elapsed().as_secs_f64()));
    }
}

/// Overall importance of every species, optionally spreading the
/// per-sample work over `jobs` threads (results do not depend on it).
pub fn overall_importance(
    mech: &Mechanism,
    samples: &RateSampleSet,
    config: &ReductionConfig,
    jobs: usize,
) -> Result<ImportanceVector> {
    let targets = config.resolve_targets(mech)?;
    let algorithm = config.search_algorithm()?;
    let mut timings = Timings::default();

    let start = Instant::now();
    let fluxes: Vec<SpeciesFlux> = samples.samples().iter().map(|s| species_flux(mech, s)).collect();
    let scaling = config
        .scaling
        .then(|| scaling_from_fluxes(mech, &fluxes, &targets));
    timings.record("flux-and-scaling", start);

    let start = Instant::now();
    let per_sample = |i: usize| -> Result<(Vec<f64>, Vec<Option<usize>>, usize)> {
        let g = build_graph_with_flux(mech, &samples.samples()[i], &fluxes[i]);
        let oics = run_search(&g, &targets, &algorithm)?;
        let n = mech.species_count();
        let mut best = vec![0.0; n];
        let mut from: Vec<Option<usize>> = vec![None; n];
        for (ti, oic) in oics.iter().enumerate() {
            let (alpha, target) = match (&scaling, algorithm) {
                (_, Algorithm::ModifiedDfs) => (1.0, None),
                (Some(s), _) => (s.alpha_target[i][ti], Some(targets[ti])),
                (None, _) => (1.0, Some(targets[ti])),
            };
            for (s, &r) in oic.values.iter().enumerate() {
                let v = alpha * r;
                if v > best[s] {
                    best[s] = v;
                    from[s] = target;
                }
            }
        }
        Ok((best, from, g.clamp_count()))
    };
    let indices: Vec<usize> = (0..samples.len()).collect();
    let results: Vec<Result<_>> = if jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .expect("thread pool");
        pool.install(|| indices.par_iter().map(|&i| per_sample(i)).collect())
    } else {
        indices.iter().map(|&i| per_sample(i)).collect()
    };
    timings.record("graph-and-search", start);

    let n = mech.species_count();
    let mut values = vec![0.0; n];
    let mut provenance: Vec<Option<Provenance>> = vec![None; n];
    let mut clamp_count = 0;
    for (i, result) in results.into_iter().enumerate() {
        let (best, from, clamps) = result?;
        clamp_count += clamps;
        let sample = &samples.samples()[i];
        for s in 0..n {
            if best[s] > values[s] {
                values[s] = best[s];
                provenance[s] = Some(Provenance {
                    dataset: sample.dataset_id.clone(),
                    sample: i,
                    time: sample.time,
                    target: from[s],
                });
            }
        }
    }
    Ok(ImportanceVector {
        values,
        provenance,
        clamp_count,
        timings,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleCall {
    pub threshold: f64,
    pub species: usize,
    pub error_percent: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionReport {
    pub threshold: f64,
    /// Retained species indices, ascending.
    pub retained: Vec<usize>,
    pub retained_species: Vec<String>,
    pub retained_reaction_count: usize,
    pub species_names: Vec<String>,
    pub importance: ImportanceVector,
    pub clamp_count: usize,
    pub timings: Timings,
    pub oracle_calls: Vec<OracleCall>,
}

/// Serialized form of a report. Wall times are kept out so that reruns
/// produce identical bytes.
#[derive(Serialize)]
struct ReportJson<'a> {
    threshold: f64,
    retained_species: &'a [String],
    retained_reaction_count: usize,
    importance: BTreeMap<&'a str, f64>,
    clamp_count: usize,
    #[serde(skip_serializing_if = "<[OracleCall]>::is_empty")]
    oracle_calls: &'a [OracleCall],
}

impl ReductionReport {
    pub fn retained_set(&self) -> BTreeSet<usize> {
        self.retained.iter().copied().collect()
    }

    pub fn to_json(&self) -> String {
        let json = ReportJson {
            threshold: self.threshold,
            retained_species: &self.retained_species,
            retained_reaction_count: self.retained_reaction_count,
            importance: self
                .species_names
                .iter()
                .map(String::as_str)
                .zip(self.importance.values.iter().copied())
                .collect(),
            clamp_count: self.clamp_count,
            oracle_calls: &self.oracle_calls,
        };
        let mut s = serde_json::to_string_pretty(&json).expect("report serializes");
        s.push('\n');
        s
    }

    /// `species,importance,retained` in mechanism order.
    pub fn to_csv(&self) -> String {
        let retained = self.retained_set();
        let mut out = String::from("species,importance,retained\n");
        for (i, (name, v)) in self.species_names.iter().zip(&self.importance.values).enumerate() {
            out.push_str(&format!("{name},{v:e},{}\n", retained.contains(&i)));
        }
        out
    }

    pub fn timings_json(&self) -> String {
        let map: BTreeMap<&str, f64> = self.timings.0.iter().map(|(k, v)| (k.as_str(), *v)).collect();
        serde_json::to_string_pretty(&map).expect("timings serialize") + "\n"
    }
}

/// Applies the cutoff: species with importance at or above `epsilon`, plus
/// the targets, are retained, and reactions survive only if every
/// participant does.
pub fn reduce_at_threshold(
    mech: &Mechanism,
    importance: &ImportanceVector,
    epsilon: f64,
    targets: &[usize],
) -> Result<ReductionReport> {
    check_threshold(epsilon)?;
    let mut mask: Vec<bool> = importance.values.iter().map(|&v| v >= epsilon).collect();
    for &t in targets {
        mask[t] = true;
    }
    let retained: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
    Ok(ReductionReport {
        threshold: epsilon,
        retained_species: retained.iter().map(|&i| mech.species[i].name.clone()).collect(),
        retained,
        retained_reaction_count: mech.surviving_reactions(&mask).len(),
        species_names: mech.species_names(),
        importance: importance.clone(),
        clamp_count: importance.clamp_count,
        timings: importance.timings.clone(),
        oracle_calls: Vec::new(),
    })
}

/// Importance and reduction at the configured threshold in one call.
pub fn reduce(
    mech: &Mechanism,
    samples: &RateSampleSet,
    config: &ReductionConfig,
    jobs: usize,
) -> Result<ReductionReport> {
    let epsilon = config
        .threshold
        .ok_or(ReductionError::MissingThreshold("a fixed-threshold reduction"))?;
    let targets = config.resolve_targets(mech)?;
    let importance = overall_importance(mech, samples, config, jobs)?;
    let start = Instant::now();
    let mut report = reduce_at_threshold(mech, &importance, epsilon, &targets)?;
    report.timings.record("threshold", start);
    Ok(report)
}

/// Evaluates a skeletal mechanism and reports its maximum error, percent.
pub trait ErrorOracle {
    fn evaluate(&mut self, skeletal_mechanism: &str) -> std::result::Result<f64, String>;
}

impl<F: FnMut(&str) -> std::result::Result<f64, String>> ErrorOracle for F {
    fn evaluate(&mut self, skeletal_mechanism: &str) -> std::result::Result<f64, String> {
        self(skeletal_mechanism)
    }
}

/// Runs `<program> <skeletal-file> <detailed-file>` and reads one decimal
/// number from its standard output.
#[derive(Debug, Clone)]
pub struct ExternalOracle {
    pub program: PathBuf,
    pub detailed: PathBuf,
    /// Where candidate skeletal mechanisms are written.
    pub skeletal_path: PathBuf,
}

impl ErrorOracle for ExternalOracle {
    fn evaluate(&mut self, skeletal_mechanism: &str) -> std::result::Result<f64, String> {
        std::fs::write(&self.skeletal_path, skeletal_mechanism)
            .map_err(|e| format!("cannot write {}: {e}", self.skeletal_path.display()))?;
        let output = Command::new(&self.program)
            .arg(&self.skeletal_path)
            .arg(&self.detailed)
            .output()
            .map_err(|e| format!("cannot run {}: {e}", self.program.display()))?;
        if !output.status.success() {
            return Err(format!(
                "{} exited with {}: {}",
                self.program.display(),
                output.status,
                String::from_utf8_lossy(&output.stderr).trim()
            ));
        }
        let stdout = String::from_utf8_lossy(&output.stdout);
        parse_oracle_output(&stdout)
    }
}

fn parse_oracle_output(stdout: &str) -> std::result::Result<f64, String> {
    let text = stdout.trim();
    match text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(format!("expected a single number on stdout, got `{text}`")),
    }
}

/// Candidate thresholds: the distinct positive importance values.
pub fn candidate_thresholds(importance: &ImportanceVector) -> Vec<f64> {
    let mut c: Vec<f64> = importance.values.iter().copied().filter(|&v| v > 0.0).collect();
    c.sort_by(f64::total_cmp);
    c.dedup();
    c
}

/// Picks the largest candidate threshold whose skeletal mechanism the
/// oracle accepts. Candidates are tried from the largest down, so the
/// first accepted one is the answer; the smallest candidate keeps every
/// reachable species.
pub fn select_threshold(
    mech: &Mechanism,
    samples: &RateSampleSet,
    config: &ReductionConfig,
    oracle: &mut dyn ErrorOracle,
    error_limit: f64,
    jobs: usize,
) -> Result<ReductionReport> {
    if error_limit.is_nan() || error_limit <= 0.0 {
        return Err(ReductionError::BadErrorLimit(error_limit));
    }
    if config.algorithm == AlgorithmKind::Rbfs {
        return Err(ReductionError::RbfsSelection);
    }
    let targets = config.resolve_targets(mech)?;
    let importance = overall_importance(mech, samples, config, jobs)?;
    let mut calls = Vec::new();
    let start = Instant::now();
    for &epsilon in candidate_thresholds(&importance).iter().rev() {
        let mut report = reduce_at_threshold(mech, &importance, epsilon, &targets)?;
        let text = emit_skeletal_mechanism(mech, &report.retained_set())?;
        let error = oracle
            .evaluate(&text)
            .map_err(|message| ReductionError::Oracle {
                threshold: epsilon,
                message,
            })?;
        calls.push(OracleCall {
            threshold: epsilon,
            species: report.retained.len(),
            error_percent: error,
        });
        if error <= error_limit {
            report.oracle_calls = calls;
            report.timings.record("threshold-selection", start);
            return Ok(report);
        }
    }
    let best = calls
        .iter()
        .min_by(|a, b| a.error_percent.total_cmp(&b.error_percent));
    Err(ReductionError::NoCandidate {
        limit: error_limit,
        best_threshold: best.map_or(f64::NAN, |c| c.threshold),
        best_error: best.map_or(f64::NAN, |c| c.error_percent),
    })
}

#[allow(clippy::too_many_arguments)]
pub fn select_threshold_external(
    mech: &Mechanism,
    samples: &RateSampleSet,
    config: &ReductionConfig,
    oracle: &Path,
    detailed: &Path,
    skeletal_path: &Path,
    error_limit: f64,
    jobs: usize,
) -> Result<ReductionReport> {
    let mut oracle = ExternalOracle {
        program: oracle.to_path_buf(),
        detailed: detailed.to_path_buf(),
        skeletal_path: skeletal_path.to_path_buf(),
    };
    select_threshold(mech, samples, config, &mut oracle, error_limit, jobs)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShuffleRun {
    pub seed: u64,
    pub retained_species: Vec<String>,
    pub same_retained: bool,
    /// Exact agreement of every importance value after undoing the shuffle.
    pub same_values: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderIndependenceReport {
    pub algorithm: String,
    pub threshold: f64,
    pub baseline_retained: Vec<String>,
    pub runs: Vec<ShuffleRun>,
    /// Retained sets agree for every seed, and for Dijkstra and RBFS the
    /// importance values agree as well.
    pub independent: bool,
}

impl OrderIndependenceReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}

/// Reruns the reduction on species-shuffled copies of the mechanism and
/// compares retained species (by name) and importance values.
pub fn check_order_independence(
    mech: &Mechanism,
    samples: &RateSampleSet,
    config: &ReductionConfig,
    seeds: &[u64],
    jobs: usize,
) -> Result<OrderIndependenceReport> {
    if seeds.is_empty() {
        return Err(ReductionError::NoSeeds);
    }
    let baseline = reduce(mech, samples, config, jobs)?;
    let baseline_names: BTreeSet<&str> = baseline.retained_species.iter().map(String::as_str).collect();
    let mut runs = Vec::new();
    let mut independent = true;
    for &seed in seeds {
        let perm = Permutation::random(mech.species_count(), seed);
        let shuffled = mech.permute_species(&perm);
        // Species order does not touch reaction order, so samples carry over.
        let report = reduce(&shuffled, samples, config, jobs)?;
        let names: BTreeSet<&str> = report.retained_species.iter().map(String::as_str).collect();
        let same_retained = names == baseline_names;
        let same_values = (0..mech.species_count()).all(|i| {
            report.importance.values[perm.forward(i)].to_bits() == baseline.importance.values[i].to_bits()
        });
        independent &= same_retained;
        if config.algorithm.is_order_independent() {
            independent &= same_values;
        }
        let mut retained_species: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        retained_species.sort();
        runs.push(ShuffleRun {
            seed,
            retained_species,
            same_retained,
            same_values,
        });
    }
    Ok(OrderIndependenceReport {
        algorithm: config.search_algorithm()?.label(),
        threshold: baseline.threshold,
        baseline_retained: baseline_names.iter().map(|s| s.to_string()).collect(),
        runs,
        independent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinetics::{load_rate_samples, RateSample};
    use crate::mechanism::parse_mechanism;

    fn chain() -> Mechanism {
        parse_mechanism(
            "ELEMENTS\nX\nEND\nSPECIES\nA X:1\nB X:1\nC X:1\nEND\nREACTIONS\nA => B\nB => C\nEND\n",
        )
        .unwrap()
    }

    fn rates(mech: &Mechanism, rows: &str) -> RateSampleSet {
        load_rate_samples(rows, mech, "d").unwrap()
    }

    fn dijkstra(targets: &[&str]) -> ReductionConfig {
        ReductionConfig::new(targets, AlgorithmKind::Dijkstra)
    }

    #[test]
    fn chain_importance() {
        let m = chain();
        let s = rates(&m, "0,2,1\n");
        let imp = overall_importance(&m, &s, &dijkstra(&["A"]), 1).unwrap();
        assert_eq!(imp.values, vec![1.0, 1.0, 0.5]);
        let p = imp.provenance[2].as_ref().unwrap();
        assert_eq!((p.sample, p.target), (0, Some(0)));
    }

    #[test]
    fn chain_thresholds() {
        let m = chain();
        let s = rates(&m, "0,2,1\n");
        let imp = overall_importance(&m, &s, &dijkstra(&["A"]), 1).unwrap();
        let r = reduce_at_threshold(&m, &imp, 0.6, &[0]).unwrap();
        assert_eq!(r.retained_species, vec!["A", "B"]);
        assert_eq!(r.retained_reaction_count, 1);
        let r = reduce_at_threshold(&m, &imp, 0.4, &[0]).unwrap();
        assert_eq!(r.retained_species, vec!["A", "B", "C"]);
        assert_eq!(r.retained_reaction_count, 2);
        assert_eq!(
            reduce_at_threshold(&m, &imp, 1.5, &[0]).unwrap_err(),
            ReductionError::ThresholdOutOfRange(1.5)
        );
        // smallest positive value keeps every reachable species
        let r = reduce_at_threshold(&m, &imp, 0.5, &[0]).unwrap();
        assert_eq!(r.retained.len(), 3);
    }

    #[test]
    fn max_over_samples() {
        let m = chain();
        // B->C weight: |w2| / max(w1, w2); 0.2 then 0.6
        let s = rates(&m, "0,5,1\n1,5,3\n");
        let imp = overall_importance(&m, &s, &dijkstra(&["B"]), 1).unwrap();
        assert!((imp.values[2] - 0.6).abs() < 1e-15);
        assert_eq!(imp.provenance[2].as_ref().unwrap().sample, 1);
    }

    #[test]
    fn targets_retained_unconditionally() {
        let m = chain();
        let s = rates(&m, "0,0,0\n");
        let cfg = dijkstra(&["C"]).with_scaling(true);
        let imp = overall_importance(&m, &s, &cfg, 1).unwrap();
        assert_eq!(imp.values, vec![0.0; 3]);
        let r = reduce_at_threshold(&m, &imp, 1.0, &[2]).unwrap();
        assert_eq!(r.retained_species, vec!["C"]);
        assert_eq!(r.retained_reaction_count, 0);
    }

    #[test]
    fn config_validation() {
        let m = chain();
        let cfg = ReductionConfig::new(&["A"], AlgorithmKind::ModifiedDfs).with_scaling(true);
        assert_eq!(cfg.resolve_targets(&m), Err(ReductionError::ScalingWithModifiedDfs));
        let cfg = dijkstra(&["NOSUCH"]);
        assert_eq!(
            cfg.resolve_targets(&m),
            Err(ReductionError::UnknownTarget("NOSUCH".into()))
        );
        assert_eq!(dijkstra(&[]).resolve_targets(&m), Err(ReductionError::NoTargets));
        let cfg = ReductionConfig::new(&["A"], AlgorithmKind::Rbfs);
        assert_eq!(cfg.search_algorithm(), Err(ReductionError::MissingThreshold("RBFS")));
        assert_eq!(dijkstra(&["a", "A"]).resolve_targets(&m).unwrap(), vec![0]);
    }

    #[test]
    fn single_sample_scaling_is_one() {
        let m = chain();
        let s = rates(&m, "0,2,1\n");
        let series = scaling_coefficients(&m, &s, &[0, 1, 2]);
        // B has net production 1, A and C net |2| and |1|.
        assert_eq!(series.alpha_target, vec![vec![1.0, 1.0, 1.0]]);
    }

    #[test]
    fn balanced_target_scales_to_zero() {
        let m = chain();
        let s = rates(&m, "0,1,1\n1,3,3\n");
        let series = scaling_coefficients(&m, &s, &[1]);
        assert_eq!(series.alpha_target, vec![vec![0.0], vec![0.0]]);
    }

    #[test]
    fn two_to_one_flux_ratio() {
        // Target T is consumed at rate 2 then 1; pseudo-production of X is
        // carried by P alone and stays at 4.
        let m = parse_mechanism(
            "ELEMENTS\nX\nEND\nSPECIES\nT X:1\nP X:1\nQ X:1\nEND\nREACTIONS\nT => Q\nQ => P\nEND\n",
        )
        .unwrap();
        let s = RateSampleSet::new(
            vec![
                RateSample {
                    dataset_id: "d".into(),
                    time: 0.0,
                    omega: vec![2.0, 4.0],
                },
                RateSample {
                    dataset_id: "d".into(),
                    time: 1.0,
                    omega: vec![1.0, 4.0],
                },
            ],
            2,
        )
        .unwrap();
        let series = scaling_coefficients(&m, &s, &[0]);
        // P_X = 4 in both samples: Q is net consumed.
        assert_eq!(series.alpha_element[0][0], vec![0.5]);
        assert_eq!(series.alpha_element[1][0], vec![0.25]);
        assert_eq!(series.alpha_target, vec![vec![1.0], vec![0.5]]);
    }

    #[test]
    fn modified_dfs_combines_targets() {
        let m = chain();
        let s = rates(&m, "0,2,1\n");
        let cfg = ReductionConfig::new(&["C", "A"], AlgorithmKind::ModifiedDfs);
        let imp = overall_importance(&m, &s, &cfg, 1).unwrap();
        assert_eq!(imp.values, vec![1.0, 1.0, 1.0]);
        assert_eq!(imp.provenance[1].as_ref().unwrap().target, None);
    }

    #[test]
    fn jobs_do_not_change_results() {
        let m = crate::mechanism::synthetic_mechanism(4, 40, 120);
        let s = crate::kinetics::generate_synthetic_samples(&m, 4, 12);
        let cfg = dijkstra(&["S0", "S1"]).with_scaling(true).with_threshold(0.01);
        let a = reduce(&m, &s, &cfg, 1).unwrap();
        let b = reduce(&m, &s, &cfg, 4).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert_eq!(a.importance.provenance, b.importance.provenance);
    }

    #[test]
    fn oracle_selection() {
        let m = crate::mechanism::synthetic_mechanism(8, 30, 90);
        let s = crate::kinetics::generate_synthetic_samples(&m, 8, 4);
        let cfg = dijkstra(&["S0"]).with_scaling(true);
        let imp = overall_importance(&m, &s, &cfg, 1).unwrap();
        let candidates = candidate_thresholds(&imp);

        let mut zero = |_: &str| Ok(0.0);
        let r = select_threshold(&m, &s, &cfg, &mut zero, 30.0, 1).unwrap();
        assert_eq!(r.threshold, *candidates.last().unwrap());
        assert_eq!(r.oracle_calls.len(), 1);

        let total = m.species_count() as f64;
        let mut fraction = |text: &str| {
            let kept = parse_mechanism(text).unwrap().species_count() as f64;
            Ok(100.0 * (1.0 - kept / total))
        };
        let r = select_threshold(&m, &s, &cfg, &mut fraction, 30.0, 1).unwrap();
        // Closed form: the largest candidate whose dropped fraction is within 30%.
        let within = |kept: usize| 100.0 * (1.0 - kept as f64 / total) <= 30.0;
        let expected = candidates
            .iter()
            .rev()
            .find(|&&e| within(reduce_at_threshold(&m, &imp, e, &[0]).unwrap().retained.len()))
            .copied()
            .unwrap();
        assert_eq!(r.threshold, expected);
        assert!(within(r.retained.len()));

        let mut bad = |_: &str| Ok(99.0);
        assert!(matches!(
            select_threshold(&m, &s, &cfg, &mut bad, 30.0, 1),
            Err(ReductionError::NoCandidate { best_error, .. }) if best_error == 99.0
        ));
        let mut failing = |_: &str| Err("boom".to_string());
        assert!(matches!(
            select_threshold(&m, &s, &cfg, &mut failing, 30.0, 1),
            Err(ReductionError::Oracle { .. })
        ));
        assert_eq!(
            select_threshold(&m, &s, &cfg, &mut zero, 0.0, 1).unwrap_err(),
            ReductionError::BadErrorLimit(0.0)
        );
    }

    #[test]
    fn oracle_output_parsing() {
        assert_eq!(parse_oracle_output(" 12.5\n"), Ok(12.5));
        assert!(parse_oracle_output("12 13").is_err());
        assert!(parse_oracle_output("").is_err());
    }

    #[test]
    fn edgeless_is_trivially_independent() {
        let m = chain();
        let s = rates(&m, "0,0,0\n");
        for kind in AlgorithmKind::ALL {
            let cfg = ReductionConfig::new(&["A"], kind).with_threshold(0.5);
            let r = check_order_independence(&m, &s, &cfg, &[1, 2, 3], 1).unwrap();
            assert!(r.independent, "{kind:?}");
            assert_eq!(r.baseline_retained, vec!["A"]);
        }
    }

    #[test]
    fn report_serialization() {
        let m = chain();
        let s = rates(&m, "0,2,1\n");
        let r = reduce(&m, &s, &dijkstra(&["A"]).with_threshold(0.6), 1).unwrap();
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        assert_eq!(json["threshold"], 0.6);
        assert_eq!(json["retained_species"], serde_json::json!(["A", "B"]));
        assert_eq!(json["retained_reaction_count"], 1);
        assert_eq!(json["importance"]["C"], 0.5);
        assert_eq!(json["clamp_count"], 0);
        assert_eq!(
            r.to_csv(),
            "species,importance,retained\nA,1e0,true\nB,1e0,true\nC,5e-1,false\n"
        );
        assert!(r.timings_json().contains("graph-and-search"));
    }
}
