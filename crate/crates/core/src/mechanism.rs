//! Reaction mechanisms: parsing, restriction to a retained species set,
//! emission back to text, and seeded species-order shuffling.
//!
//! The text grammar is line oriented. `#` starts a comment and blank lines
//! are ignored:
//!
//! ```text
//! ELEMENTS
//! C H O
//! END
//! SPECIES
//! CH4  C:1 H:4
//! O2   O:2
//! END
//! REACTIONS
//! CH4 + 2 O2 => CO2 + 2 H2O
//! END
//! ```
//!
//! Species and element names are upper-cased on parse. A missing
//! coefficient means 1; decimal coefficients are accepted.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MechanismError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: reaction references undeclared species `{name}`")]
    UnknownSpecies { line: usize, name: String },
    #[error("line {line}: species `{name}` declared twice")]
    DuplicateSpecies { line: usize, name: String },
    #[error("line {line}: element `{element}` is not declared in the ELEMENTS block")]
    UnknownElement { line: usize, element: String },
    #[error("line {line}: malformed coefficient `{text}`")]
    BadCoefficient { line: usize, text: String },
    #[error("line {line}: SPECIES block is empty")]
    EmptySpecies { line: usize },
    #[error("mechanism has no SPECIES block")]
    MissingSpecies,
    #[error("a mechanism must retain at least one species")]
    EmptyRetainedSet,
    #[error("species index {0} out of range")]
    IndexOutOfRange(usize),
}

pub type Result<T> = std::result::Result<T, MechanismError>;

#[derive(Debug, Clone, PartialEq)]
pub struct Species {
    pub name: String,
    /// Element symbol to atom count.
    pub composition: BTreeMap<String, u32>,
}

impl Species {
    pub fn atoms(&self, element: &str) -> u32 {
        self.composition.get(element).copied().unwrap_or(0)
    }
}

/// Net stoichiometric coefficient of one participating species.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stoich {
    pub species: usize,
    /// Products positive, reactants negative. Zero when a species appears
    /// with equal coefficients on both sides.
    pub net: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reaction {
    /// One entry per participating species, sorted by species index.
    pub stoichiometry: Vec<Stoich>,
    pub reversible: bool,
    /// The equation as written in the source file (comment stripped).
    pub source_text: String,
}

impl Reaction {
    pub fn participants(&self) -> impl Iterator<Item = usize> + '_ {
        self.stoichiometry.iter().map(|s| s.species)
    }

    pub fn involves(&self, species: usize) -> bool {
        self.stoichiometry
            .binary_search_by_key(&species, |s| s.species)
            .is_ok()
    }

    pub fn net(&self, species: usize) -> f64 {
        self.stoichiometry
            .binary_search_by_key(&species, |s| s.species)
            .map(|i| self.stoichiometry[i].net)
            .unwrap_or(0.0)
    }
}

/// Static chemistry: elements, species with composition, and reactions.
///
/// Equality compares the chemistry only; `name` is a free-text label.
#[derive(Debug, Clone)]
pub struct Mechanism {
    pub name: String,
    pub elements: Vec<String>,
    pub species: Vec<Species>,
    pub reactions: Vec<Reaction>,
    index: HashMap<String, usize>,
}

impl PartialEq for Mechanism {
    fn eq(&self, other: &Self) -> bool {
        self.elements == other.elements
            && self.species == other.species
            && self.reactions == other.reactions
    }
}

impl Mechanism {
    fn from_parts(
        name: String,
        elements: Vec<String>,
        species: Vec<Species>,
        reactions: Vec<Reaction>,
    ) -> Self {
        let index = species
            .iter()
            .enumerate()
            .map(|(i, s)| (s.name.clone(), i))
            .collect();
        Self {
            name,
            elements,
            species,
            reactions,
            index,
        }
    }

    pub fn species_count(&self) -> usize {
        self.species.len()
    }

    pub fn reaction_count(&self) -> usize {
        self.reactions.len()
    }

    /// Looks up a species by name (case-insensitive).
    pub fn species_index(&self, name: &str) -> Option<usize> {
        self.index.get(&canonical(name)).copied()
    }

    pub fn species_names(&self) -> Vec<String> {
        self.species.iter().map(|s| s.name.clone()).collect()
    }

    /// Reactions whose participants are all retained.
    pub fn surviving_reactions(&self, retained: &[bool]) -> Vec<usize> {
        self.reactions
            .iter()
            .enumerate()
            .filter(|(_, r)| r.participants().all(|s| retained[s]))
            .map(|(i, _)| i)
            .collect()
    }

    /// The sub-mechanism containing only `retained` species (original
    /// relative order) and the reactions that survive elimination.
    pub fn restrict(&self, retained: &BTreeSet<usize>) -> Result<Mechanism> {
        if retained.is_empty() {
            return Err(MechanismError::EmptyRetainedSet);
        }
        if let Some(&bad) = retained.iter().find(|&&i| i >= self.species.len()) {
            return Err(MechanismError::IndexOutOfRange(bad));
        }
        let mut mask = vec![false; self.species.len()];
        let mut remap = vec![usize::MAX; self.species.len()];
        for (new, &old) in retained.iter().enumerate() {
            mask[old] = true;
            remap[old] = new;
        }
        let species = retained.iter().map(|&i| self.species[i].clone()).collect();
        let reactions = self
            .surviving_reactions(&mask)
            .into_iter()
            .map(|i| {
                let r = &self.reactions[i];
                Reaction {
                    stoichiometry: r
                        .stoichiometry
                        .iter()
                        .map(|s| Stoich {
                            species: remap[s.species],
                            net: s.net,
                        })
                        .collect(),
                    reversible: r.reversible,
                    source_text: r.source_text.clone(),
                }
            })
            .collect();
        Ok(Mechanism::from_parts(
            self.name.clone(),
            self.elements.clone(),
            species,
            reactions,
        ))
    }

    /// Relabels species so that old index `i` moves to `perm.forward(i)`.
    /// Reaction order is unchanged.
    pub fn permute_species(&self, perm: &Permutation) -> Mechanism {
        assert_eq!(perm.len(), self.species.len(), "permutation size mismatch");
        let mut species = vec![None; self.species.len()];
        for (old, s) in self.species.iter().enumerate() {
            species[perm.forward(old)] = Some(s.clone());
        }
        let species = species.into_iter().map(Option::unwrap).collect();
        let reactions = self
            .reactions
            .iter()
            .map(|r| {
                let mut stoichiometry: Vec<Stoich> = r
                    .stoichiometry
                    .iter()
                    .map(|s| Stoich {
                        species: perm.forward(s.species),
                        net: s.net,
                    })
                    .collect();
                stoichiometry.sort_by_key(|s| s.species);
                Reaction {
                    stoichiometry,
                    reversible: r.reversible,
                    source_text: r.source_text.clone(),
                }
            })
            .collect();
        Mechanism::from_parts(self.name.clone(), self.elements.clone(), species, reactions)
    }
}

/// A bijection on species indices, stored as old index -> new index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    /// Seeded uniform random permutation.
    pub fn random(n: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut map: Vec<usize> = (0..n).collect();
        map.shuffle(&mut rng);
        Self(map)
    }

    pub fn from_forward(map: Vec<usize>) -> Option<Self> {
        let mut seen = vec![false; map.len()];
        for &j in &map {
            if j >= map.len() || std::mem::replace(&mut seen[j], true) {
                return None;
            }
        }
        Some(Self(map))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn forward(&self, old: usize) -> usize {
        self.0[old]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (old, &new) in self.0.iter().enumerate() {
            inv[new] = old;
        }
        Self(inv)
    }

    /// Moves per-species values into the permuted order:
    /// `out[forward(i)] = values[i]`.
    pub fn apply<T: Clone>(&self, values: &[T]) -> Vec<T> {
        let inv = self.inverse();
        inv.0.iter().map(|&old| values[old].clone()).collect()
    }
}

/// Shuffles the species list with a seeded permutation. Returns the
/// shuffled mechanism and the old -> new index map.
pub fn shuffle_species(mech: &Mechanism, seed: u64) -> (Mechanism, Permutation) {
    let perm = Permutation::random(mech.species.len(), seed);
    (mech.permute_species(&perm), perm)
}

pub fn canonical(name: &str) -> String {
    name.trim().to_uppercase()
}

#[derive(Clone, Copy, PartialEq)]
enum Block {
    None,
    Elements,
    Species,
    Reactions,
}

/// Parses mechanism text. The returned mechanism has an empty name.
pub fn parse_mechanism(text: &str) -> Result<Mechanism> {
    let mut elements: Vec<String> = Vec::new();
    let mut species: Vec<Species> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut reactions = Vec::new();
    let mut block = Block::None;
    let mut block_start = 0;
    let mut saw_species = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line_no = lineno + 1;
        let line = strip_comment(raw).trim();
        if line.is_empty() {
            continue;
        }
        let keyword = line.to_uppercase();
        if block == Block::None {
            block = match keyword.as_str() {
                "ELEMENTS" => Block::Elements,
                "SPECIES" => {
                    saw_species = true;
                    Block::Species
                }
                "REACTIONS" => {
                    if !saw_species {
                        return Err(MechanismError::Parse {
                            line: line_no,
                            message: "REACTIONS block before SPECIES block".into(),
                        });
                    }
                    Block::Reactions
                }
                _ => {
                    return Err(MechanismError::Parse {
                        line: line_no,
                        message: format!("expected ELEMENTS, SPECIES or REACTIONS, found `{line}`"),
                    })
                }
            };
            block_start = line_no;
            continue;
        }
        if keyword == "END" {
            if block == Block::Species && species.is_empty() {
                return Err(MechanismError::EmptySpecies { line: block_start });
            }
            block = Block::None;
            continue;
        }
        match block {
            Block::Elements => {
                for sym in line.split_whitespace() {
                    let sym = canonical(sym);
                    if !elements.contains(&sym) {
                        elements.push(sym);
                    }
                }
            }
            Block::Species => {
                let sp = parse_species_line(line, line_no, &elements)?;
                if index.contains_key(&sp.name) {
                    return Err(MechanismError::DuplicateSpecies {
                        line: line_no,
                        name: sp.name,
                    });
                }
                index.insert(sp.name.clone(), species.len());
                species.push(sp);
            }
            Block::Reactions => {
                reactions.push(parse_reaction_line(line, line_no, &index)?);
            }
            Block::None => unreachable!(),
        }
    }
    if block != Block::None {
        return Err(MechanismError::Parse {
            line: block_start,
            message: "block is missing its END".into(),
        });
    }
    if !saw_species {
        return Err(MechanismError::MissingSpecies);
    }
    Ok(Mechanism::from_parts(String::new(), elements, species, reactions))
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn parse_species_line(line: &str, line_no: usize, elements: &[String]) -> Result<Species> {
    let mut tokens = line.split_whitespace();
    let name = canonical(tokens.next().expect("non-empty line"));
    let mut composition = BTreeMap::new();
    for tok in tokens {
        let (el, count) = tok.split_once(':').ok_or_else(|| MechanismError::Parse {
            line: line_no,
            message: format!("expected ELEMENT:COUNT, found `{tok}`"),
        })?;
        let el = canonical(el);
        if !elements.contains(&el) {
            return Err(MechanismError::UnknownElement {
                line: line_no,
                element: el,
            });
        }
        let count: u32 = count.parse().map_err(|_| MechanismError::Parse {
            line: line_no,
            message: format!("atom count `{count}` is not a non-negative integer"),
        })?;
        *composition.entry(el).or_insert(0) += count;
    }
    if composition.values().all(|&c| c == 0) {
        return Err(MechanismError::Parse {
            line: line_no,
            message: format!("species `{name}` has no atoms"),
        });
    }
    Ok(Species { name, composition })
}

fn parse_reaction_line(
    line: &str,
    line_no: usize,
    index: &HashMap<String, usize>,
) -> Result<Reaction> {
    let (lhs, rhs, reversible) = if let Some((l, r)) = line.split_once("<=>") {
        (l, r, true)
    } else if let Some((l, r)) = line.split_once("=>") {
        (l, r, false)
    } else {
        return Err(MechanismError::Parse {
            line: line_no,
            message: "reaction needs `=>` or `<=>`".into(),
        });
    };
    if rhs.contains("=>") {
        return Err(MechanismError::Parse {
            line: line_no,
            message: "reaction has more than one arrow".into(),
        });
    }
    let mut net: BTreeMap<usize, f64> = BTreeMap::new();
    for (side, sign) in [(lhs, -1.0), (rhs, 1.0)] {
        for (sp, coef) in parse_side(side, line_no, index)? {
            *net.entry(sp).or_insert(0.0) += sign * coef;
        }
    }
    Ok(Reaction {
        stoichiometry: net
            .into_iter()
            .map(|(species, net)| Stoich { species, net })
            .collect(),
        reversible,
        source_text: line.to_string(),
    })
}

fn parse_side(
    side: &str,
    line_no: usize,
    index: &HashMap<String, usize>,
) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::new();
    for term in side.split('+') {
        let tokens: Vec<&str> = term.split_whitespace().collect();
        let (coef, name) = match tokens.as_slice() {
            [] => {
                return Err(MechanismError::Parse {
                    line: line_no,
                    message: "empty term in reaction".into(),
                })
            }
            [name] => split_glued_coefficient(name, index),
            [coef, name] => (Some(*coef), *name),
            _ => {
                return Err(MechanismError::Parse {
                    line: line_no,
                    message: format!("cannot read reaction term `{}`", term.trim()),
                })
            }
        };
        let coef = match coef {
            None => 1.0,
            Some(text) => match text.parse::<f64>() {
                Ok(c) if c.is_finite() && c > 0.0 => c,
                _ => {
                    return Err(MechanismError::BadCoefficient {
                        line: line_no,
                        text: text.to_string(),
                    })
                }
            },
        };
        let name = canonical(name);
        let sp = *index
            .get(&name)
            .ok_or(MechanismError::UnknownSpecies { line: line_no, name })?;
        out.push((sp, coef));
    }
    Ok(out)
}

/// `2OH` -> (Some("2"), "OH") when `2OH` itself is not a declared species.
fn split_glued_coefficient<'a>(
    token: &'a str,
    index: &HashMap<String, usize>,
) -> (Option<&'a str>, &'a str) {
    if index.contains_key(&canonical(token)) {
        return (None, token);
    }
    let split = token
        .char_indices()
        .find(|(_, c)| !(c.is_ascii_digit() || *c == '.'))
        .map(|(i, _)| i)
        .unwrap_or(token.len());
    if split > 0 && split < token.len() {
        (Some(&token[..split]), &token[split..])
    } else {
        (None, token)
    }
}

/// Writes the skeletal mechanism containing `retained` species and the
/// reactions whose participants are all retained.
pub fn emit_skeletal_mechanism(mech: &Mechanism, retained: &BTreeSet<usize>) -> Result<String> {
    let skeletal = mech.restrict(retained)?;
    Ok(emit_mechanism(&skeletal))
}

pub fn emit_mechanism(mech: &Mechanism) -> String {
    let mut out = String::new();
    if !mech.name.is_empty() {
        let _ = writeln!(out, "# {}", mech.name.replace('\n', " "));
    }
    let _ = writeln!(
        out,
        "# {} species, {} reactions",
        mech.species.len(),
        mech.reactions.len()
    );
    out.push_str("ELEMENTS\n");
    if !mech.elements.is_empty() {
        out.push_str(&mech.elements.join(" "));
        out.push('\n');
    }
    out.push_str("END\nSPECIES\n");
    for s in &mech.species {
        out.push_str(&s.name);
        for el in &mech.elements {
            if let Some(n) = s.composition.get(el) {
                let _ = write!(out, " {el}:{n}");
            }
        }
        out.push('\n');
    }
    out.push_str("END\nREACTIONS\n");
    for r in &mech.reactions {
        out.push_str(&r.source_text);
        out.push('\n');
    }
    out.push_str("END\n");
    out
}

/// Seeded random mechanism for tests and experiments.
///
/// Species carry random C/H/O/N compositions; each reaction has one or two
/// reactants and one or two distinct products, about half reversible.
pub fn synthetic_mechanism(seed: u64, species: usize, reactions: usize) -> Mechanism {
    assert!(species >= 2, "synthetic mechanism needs at least two species");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let elements: Vec<String> = ["C", "H", "O", "N"].iter().map(|s| s.to_string()).collect();
    let mut text = String::new();
    let _ = writeln!(text, "ELEMENTS\n{}\nEND\nSPECIES", elements.join(" "));
    for i in 0..species {
        let _ = write!(text, "S{i}");
        let mut any = false;
        for el in &elements {
            let n: u32 = rng.gen_range(0..4);
            if n > 0 {
                any = true;
                let _ = write!(text, " {el}:{n}");
            }
        }
        if !any {
            text.push_str(" H:1");
        }
        text.push('\n');
    }
    text.push_str("END\nREACTIONS\n");
    for _ in 0..reactions {
        let n_lhs = rng.gen_range(1..=2usize);
        let n_rhs = rng.gen_range(1..=2usize);
        let picks = rand::seq::index::sample(&mut rng, species, (n_lhs + n_rhs).min(species));
        let picks = picks.into_vec();
        let (lhs, rhs) = picks.split_at(n_lhs.min(picks.len() - 1));
        let side = |ids: &[usize], rng: &mut ChaCha8Rng| {
            ids.iter()
                .map(|&i| {
                    if rng.gen_bool(0.2) {
                        format!("2 S{i}")
                    } else {
                        format!("S{i}")
                    }
                })
                .collect::<Vec<_>>()
                .join(" + ")
        };
        let l = side(lhs, &mut rng);
        let r = side(rhs, &mut rng);
        let arrow = if rng.gen_bool(0.5) { "<=>" } else { "=>" };
        let _ = writeln!(text, "{l} {arrow} {r}");
    }
    text.push_str("END\n");
    let mut mech = parse_mechanism(&text).expect("generated mechanism parses");
    mech.name = format!("synthetic-{seed}");
    mech
}
