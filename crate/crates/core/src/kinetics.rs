//! Sampled net reaction rates and the species/element fluxes derived from
//! them.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exact::Expansion;
use crate::mechanism::Mechanism;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum KineticsError {
    #[error("row {row}: expected {expected} columns (time + {reactions} rates), found {found}")]
    ColumnCount {
        row: usize,
        expected: usize,
        reactions: usize,
        found: usize,
    },
    #[error("row {row}: cannot read `{cell}` as a number")]
    NonNumeric { row: usize, cell: String },
    #[error("row {row}: value `{cell}` is not finite")]
    NonFinite { row: usize, cell: String },
    #[error("row {row}: time {time} does not increase (previous {previous})")]
    NonIncreasingTime { row: usize, time: f64, previous: f64 },
    #[error("row {row}: time {time} is negative")]
    NegativeTime { row: usize, time: f64 },
    #[error("rate data contains no samples")]
    NoSamples,
    #[error("dataset `{0}` appears more than once")]
    DuplicateDataset(String),
    #[error("sample has {found} rates but the mechanism has {expected} reactions")]
    LengthMismatch { expected: usize, found: usize },
    #[error("element `{0}` is not part of the mechanism")]
    UnknownElement(String),
}

pub type Result<T> = std::result::Result<T, KineticsError>;

/// Net reaction rates at one instant of one kinetics dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSample {
    pub dataset_id: String,
    pub time: f64,
    /// Net rate per reaction, in mechanism order.
    pub omega: Vec<f64>,
}

/// Samples grouped by dataset, strictly increasing time within each.
#[derive(Debug, Clone, PartialEq)]
pub struct RateSampleSet {
    samples: Vec<RateSample>,
}

impl RateSampleSet {
    /// Validates grouping, time order, finiteness and rate-vector length.
    pub fn new(samples: Vec<RateSample>, reactions: usize) -> Result<Self> {
        if samples.is_empty() {
            return Err(KineticsError::NoSamples);
        }
        let mut closed: Vec<&str> = Vec::new();
        for (i, s) in samples.iter().enumerate() {
            if s.omega.len() != reactions {
                return Err(KineticsError::LengthMismatch {
                    expected: reactions,
                    found: s.omega.len(),
                });
            }
            if let Some(bad) = s.omega.iter().find(|w| !w.is_finite()) {
                return Err(KineticsError::NonFinite {
                    row: i + 1,
                    cell: bad.to_string(),
                });
            }
            let continues = i > 0 && samples[i - 1].dataset_id == s.dataset_id;
            if continues {
                let prev = samples[i - 1].time;
                if s.time <= prev {
                    return Err(KineticsError::NonIncreasingTime {
                        row: i + 1,
                        time: s.time,
                        previous: prev,
                    });
                }
            } else {
                if closed.contains(&s.dataset_id.as_str()) {
                    return Err(KineticsError::DuplicateDataset(s.dataset_id.clone()));
                }
                closed.push(&s.dataset_id);
            }
        }
        Ok(Self { samples })
    }

    /// Concatenates sets; dataset ids must stay unique.
    pub fn merge(sets: Vec<RateSampleSet>, reactions: usize) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for set in &sets {
            for id in set.dataset_ids() {
                if !seen.insert(id) {
                    return Err(KineticsError::DuplicateDataset(id.to_string()));
                }
            }
        }
        Self::new(sets.into_iter().flat_map(|s| s.samples).collect(), reactions)
    }

    pub fn samples(&self) -> &[RateSample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dataset_ids(&self) -> Vec<&str> {
        let mut ids: Vec<&str> = Vec::new();
        for s in &self.samples {
            if ids.last() != Some(&s.dataset_id.as_str()) {
                ids.push(&s.dataset_id);
            }
        }
        ids
    }

    /// Same samples with every rate multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            samples: self
                .samples
                .iter()
                .map(|s| RateSample {
                    omega: s.omega.iter().map(|w| w * factor).collect(),
                    ..s.clone()
                })
                .collect(),
        }
    }
}

/// Reads one rates file. An optional `dataset=<id>` line names the dataset
/// (otherwise `default_id` is used), and a first row whose time cell is not
/// numeric is taken as a column header. Cells are separated by commas
/// and/or whitespace. Row numbers in errors count physical lines.
pub fn load_rate_samples(text: &str, mech: &Mechanism, default_id: &str) -> Result<RateSampleSet> {
    let n_r = mech.reaction_count();
    let expected = n_r + 1;
    let mut dataset_id = default_id.to_string();
    let mut samples: Vec<RateSample> = Vec::new();
    let mut header_allowed = true;

    for (lineno, raw) in text.lines().enumerate() {
        let row = lineno + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(id) = line.strip_prefix("dataset=") {
            if header_allowed {
                dataset_id = id.trim().to_string();
                continue;
            }
        }
        let cells: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|c| !c.is_empty())
            .collect();
        if header_allowed && cells.first().is_some_and(|c| c.parse::<f64>().is_err()) {
            header_allowed = false;
            if cells.len() != expected {
                return Err(KineticsError::ColumnCount {
                    row,
                    expected,
                    reactions: n_r,
                    found: cells.len(),
                });
            }
            continue;
        }
        header_allowed = false;
        if cells.len() != expected {
            return Err(KineticsError::ColumnCount {
                row,
                expected,
                reactions: n_r,
                found: cells.len(),
            });
        }
        let mut values = Vec::with_capacity(expected);
        for cell in &cells {
            let v: f64 = cell.parse().map_err(|_| KineticsError::NonNumeric {
                row,
                cell: cell.to_string(),
            })?;
            if !v.is_finite() {
                return Err(KineticsError::NonFinite {
                    row,
                    cell: cell.to_string(),
                });
            }
            values.push(v);
        }
        let time = values[0];
        if time < 0.0 {
            return Err(KineticsError::NegativeTime { row, time });
        }
        if let Some(prev) = samples.last() {
            if time <= prev.time {
                return Err(KineticsError::NonIncreasingTime {
                    row,
                    time,
                    previous: prev.time,
                });
            }
        }
        samples.push(RateSample {
            dataset_id: String::new(),
            time,
            omega: values.split_off(1),
        });
    }
    for s in &mut samples {
        s.dataset_id.clone_from(&dataset_id);
    }
    RateSampleSet::new(samples, n_r)
}

/// Writes samples in the rates-file format, one file's worth per dataset.
pub fn write_rate_samples(set: &RateSampleSet, dataset_id: &str) -> String {
    let mut out = format!("dataset={dataset_id}\n");
    for s in set.samples().iter().filter(|s| s.dataset_id == dataset_id) {
        let _ = write!(out, "{:e}", s.time);
        for w in &s.omega {
            let _ = write!(out, ",{w:e}");
        }
        out.push('\n');
    }
    out
}

/// Production and consumption rate of every species at one sample.
///
/// The rounded rates are public; exact sums are kept alongside so that
/// ratios built from them are rounded only once.
#[derive(Debug, Clone)]
pub struct SpeciesFlux {
    pub production: Vec<f64>,
    pub consumption: Vec<f64>,
    exact_production: Vec<Expansion>,
    exact_consumption: Vec<Expansion>,
}

impl PartialEq for SpeciesFlux {
    fn eq(&self, other: &Self) -> bool {
        self.production == other.production && self.consumption == other.consumption
    }
}

impl SpeciesFlux {
    /// Flux from already rounded rates.
    pub fn from_rates(production: Vec<f64>, consumption: Vec<f64>) -> Self {
        assert_eq!(production.len(), consumption.len());
        let exact_production = production.iter().map(|&p| Expansion::from_f64(p)).collect();
        let exact_consumption = consumption.iter().map(|&c| Expansion::from_f64(c)).collect();
        SpeciesFlux {
            production,
            consumption,
            exact_production,
            exact_consumption,
        }
    }

    fn from_exact(exact_production: Vec<Expansion>, exact_consumption: Vec<Expansion>) -> Self {
        SpeciesFlux {
            production: exact_production.iter().map(Expansion::to_f64).collect(),
            consumption: exact_consumption.iter().map(Expansion::to_f64).collect(),
            exact_production,
            exact_consumption,
        }
    }

    pub fn net(&self, species: usize) -> f64 {
        self.production[species] - self.consumption[species]
    }

    /// Denominator of the direct interaction coefficient.
    pub fn scale(&self, species: usize) -> f64 {
        self.production[species].max(self.consumption[species])
    }

    pub(crate) fn exact_net(&self, species: usize) -> Expansion {
        let mut e = self.exact_production[species].clone();
        e.sub_expansion(&self.exact_consumption[species]);
        e
    }

    pub(crate) fn exact_scale(&self, species: usize) -> &Expansion {
        self.exact_production[species].max(&self.exact_consumption[species])
    }
}

pub fn species_flux(mech: &Mechanism, sample: &RateSample) -> SpeciesFlux {
    debug_assert_eq!(sample.omega.len(), mech.reaction_count());
    let n = mech.species_count();
    let mut production = vec![Expansion::new(); n];
    let mut consumption = vec![Expansion::new(); n];
    for (r, &w) in mech.reactions.iter().zip(&sample.omega) {
        for s in &r.stoichiometry {
            let v = s.net * w;
            if v > 0.0 {
                production[s.species].add_product(s.net, w);
            } else if v < 0.0 {
                consumption[s.species].add_product(-s.net, w);
            }
        }
    }
    SpeciesFlux::from_exact(production, consumption)
}

pub(crate) fn exact_pseudo_production(mech: &Mechanism, flux: &SpeciesFlux, element: &str) -> Expansion {
    let mut total = Expansion::new();
    for (i, s) in mech.species.iter().enumerate() {
        let atoms = s.atoms(element);
        if atoms == 0 {
            continue;
        }
        let net = flux.exact_net(i);
        if net.signum() == std::cmp::Ordering::Greater {
            total.add_scaled(&net, f64::from(atoms));
        }
    }
    total
}

/// Pseudo-production rate of one element: atoms of the element carried by
/// every net-produced species.
pub fn element_pseudo_production(mech: &Mechanism, flux: &SpeciesFlux, element: &str) -> Result<f64> {
    let element = crate::mechanism::canonical(element);
    if !mech.elements.contains(&element) {
        return Err(KineticsError::UnknownElement(element));
    }
    Ok(exact_pseudo_production(mech, flux, &element).to_f64())
}

/// Seeded synthetic rates, one dataset `synthetic-<seed>` with times
/// `0..count`. Magnitudes are log-uniform on [1e-6, 1e2]; reversible
/// reactions get a random sign, irreversible ones stay positive.
///
/// Values are truncated to 32 significant bits, so multiplying them by any
/// factor of up to 21 significant bits (1000, say) is exact.
fn truncate_mantissa(x: f64) -> f64 {
    f64::from_bits(x.to_bits() & !((1u64 << 21) - 1))
}

pub fn generate_synthetic_samples(mech: &Mechanism, seed: u64, count: usize) -> RateSampleSet {
    assert!(count >= 1, "sample count must be at least 1");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dataset_id = format!("synthetic-{seed}");
    let samples = (0..count)
        .map(|t| RateSample {
            dataset_id: dataset_id.clone(),
            time: t as f64,
            omega: mech
                .reactions
                .iter()
                .map(|r| {
                    let magnitude = truncate_mantissa(10f64.powf(rng.gen_range(-6.0..=2.0)));
                    if r.reversible && rng.gen_bool(0.5) {
                        -magnitude
                    } else {
                        magnitude
                    }
                })
                .collect(),
        })
        .collect();
    RateSampleSet::new(samples, mech.reaction_count()).expect("generated samples are valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanism::{parse_mechanism, shuffle_species, synthetic_mechanism};
    use proptest::prelude::*;

    fn chain() -> Mechanism {
        parse_mechanism(
            "ELEMENTS\nX\nEND\nSPECIES\nA X:1\nB X:1\nC X:1\nEND\nREACTIONS\nA => B\nB => C\nEND\n",
        )
        .unwrap()
    }

    fn sample(omega: Vec<f64>) -> RateSample {
        RateSample {
            dataset_id: "d".into(),
            time: 0.0,
            omega,
        }
    }

    #[test]
    fn chain_flux() {
        let f = species_flux(&chain(), &sample(vec![2.0, 1.0]));
        assert_eq!(f.production, vec![0.0, 2.0, 1.0]);
        assert_eq!(f.consumption, vec![2.0, 1.0, 0.0]);
    }

    #[test]
    fn reverse_direction_flux() {
        let f = species_flux(&chain(), &sample(vec![-2.0, 0.0]));
        assert_eq!(f.production[0], 2.0);
        assert_eq!(f.consumption[0], 0.0);
    }

    #[test]
    fn zero_rates_zero_flux() {
        let f = species_flux(&chain(), &sample(vec![0.0, 0.0]));
        assert!(f.production.iter().chain(&f.consumption).all(|&v| v == 0.0));
    }

    #[test]
    fn chain_element_pseudo_production() {
        let m = chain();
        let f = species_flux(&m, &sample(vec![2.0, 1.0]));
        assert_eq!(element_pseudo_production(&m, &f, "X").unwrap(), 2.0);
        let f2 = species_flux(&m, &sample(vec![4.0, 2.0]));
        assert_eq!(element_pseudo_production(&m, &f2, "x").unwrap(), 4.0);
        assert_eq!(
            element_pseudo_production(&m, &f, "Q"),
            Err(KineticsError::UnknownElement("Q".into()))
        );
    }

    #[test]
    fn balanced_flux_has_no_pseudo_production() {
        let m = chain();
        let f = species_flux(&m, &sample(vec![1.0, 1.0]));
        // B is balanced but A and C are not; force a balanced flux directly.
        let balanced = SpeciesFlux::from_rates(f.production.clone(), f.production);
        assert_eq!(element_pseudo_production(&m, &balanced, "X").unwrap(), 0.0);
    }

    #[test]
    fn load_with_header() {
        let set = load_rate_samples("t, w1, w2\n0.0, 2.0, 1.0\n", &chain(), "file").unwrap();
        assert_eq!(set.len(), 1);
        assert_eq!(set.samples()[0].omega, vec![2.0, 1.0]);
        assert_eq!(set.samples()[0].dataset_id, "file");
    }

    #[test]
    fn load_dataset_line_and_whitespace() {
        let set = load_rate_samples("dataset=phi1\n0 1 2\n1e-3 3 4\n", &chain(), "file").unwrap();
        assert_eq!(set.dataset_ids(), vec!["phi1"]);
        assert_eq!(set.samples()[1].time, 1e-3);
    }

    #[test]
    fn load_errors() {
        let m = chain();
        assert_eq!(
            load_rate_samples("0.0, 2.0\n", &m, "f"),
            Err(KineticsError::ColumnCount {
                row: 1,
                expected: 3,
                reactions: 2,
                found: 2
            })
        );
        assert_eq!(
            load_rate_samples("0,1,1\n1,abc,1\n", &m, "f"),
            Err(KineticsError::NonNumeric {
                row: 2,
                cell: "abc".into()
            })
        );
        assert!(matches!(
            load_rate_samples("1,1,1\n1,1,1\n", &m, "f"),
            Err(KineticsError::NonIncreasingTime { row: 2, .. })
        ));
        assert!(matches!(
            load_rate_samples("0,nan,1\n", &m, "f"),
            Err(KineticsError::NonFinite { row: 1, .. })
        ));
        assert_eq!(load_rate_samples("", &m, "f"), Err(KineticsError::NoSamples));
    }

    #[test]
    fn two_files_two_datasets() {
        let m = chain();
        let a = load_rate_samples("0,1,1\n", &m, "a").unwrap();
        let b = load_rate_samples("0,2,2\n1,3,3\n", &m, "b").unwrap();
        let set = RateSampleSet::merge(vec![a.clone(), b], 2).unwrap();
        assert_eq!(set.dataset_ids(), vec!["a", "b"]);
        assert_eq!(
            RateSampleSet::merge(vec![a.clone(), a], 2),
            Err(KineticsError::DuplicateDataset("a".into()))
        );
    }

    #[test]
    fn write_then_load() {
        let m = synthetic_mechanism(5, 8, 12);
        let set = generate_synthetic_samples(&m, 9, 4);
        let text = write_rate_samples(&set, "synthetic-9");
        assert_eq!(load_rate_samples(&text, &m, "other").unwrap(), set);
    }

    #[test]
    fn synthetic_samples() {
        let m = synthetic_mechanism(2, 10, 40);
        assert_eq!(generate_synthetic_samples(&m, 7, 5), generate_synthetic_samples(&m, 7, 5));
        assert_eq!(generate_synthetic_samples(&m, 7, 1).len(), 1);
        let set = generate_synthetic_samples(&m, 7, 20);
        for s in set.samples() {
            for (r, &w) in m.reactions.iter().zip(&s.omega) {
                assert!(w.abs() >= 1e-6 * (1.0 - 1e-12) && w.abs() <= 1e2 * (1.0 + 1e-12));
                if !r.reversible {
                    assert!(w >= 0.0);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn net_rate_identity(seed in 0u64..500, alpha in 0.0f64..1e3) {
            let m = synthetic_mechanism(seed, 9, 25);
            let set = generate_synthetic_samples(&m, seed, 1);
            let s = &set.samples()[0];
            let f = species_flux(&m, s);
            for a in 0..m.species_count() {
                let direct: f64 = m.reactions.iter().zip(&s.omega).map(|(r, w)| r.net(a) * w).sum();
                let tol = 1e-12 * f.scale(a).max(f64::MIN_POSITIVE);
                prop_assert!((f.net(a) - direct).abs() <= tol);
                prop_assert!(f.production[a] >= 0.0 && f.consumption[a] >= 0.0);
            }
            // Homogeneity of degree one.
            let scaled = species_flux(&m, &set.scaled(alpha).samples()[0]);
            for a in 0..m.species_count() {
                prop_assert!((scaled.production[a] - alpha * f.production[a]).abs() <= 1e-12 * alpha * f.production[a].max(1e-300));
                prop_assert!((scaled.consumption[a] - alpha * f.consumption[a]).abs() <= 1e-12 * alpha * f.consumption[a].max(1e-300));
            }
        }

        #[test]
        fn pseudo_production_ignores_species_order(seed in 0u64..200, shuffle in 0u64..1000) {
            let m = synthetic_mechanism(seed, 10, 30);
            let (sh, _) = shuffle_species(&m, shuffle);
            let set = generate_synthetic_samples(&m, seed, 1);
            let s = &set.samples()[0];
            let f = species_flux(&m, s);
            let fs = species_flux(&sh, s);
            for el in &m.elements {
                let a = element_pseudo_production(&m, &f, el).unwrap();
                let b = element_pseudo_production(&sh, &fs, el).unwrap();
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
            }
        }
    }
}
