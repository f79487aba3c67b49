//! Synthetic accessibility: fragment commonness minus topological
//! complexity, rescaled onto 1 (easy) to 10 (hard).

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::chem::{Element, MolGraph};
use crate::encode::fnv1a;

use super::DescriptorError;

const TABLE_HEADER: &str = "# sa-fragments v1";
const RADIUS: usize = 2;
const RAW_MIN: f64 = -4.0;
const RAW_MAX: f64 = 2.5;

/// Circular-fragment hash to log-frequency contribution.
#[derive(Debug, Clone, PartialEq)]
pub struct FragmentScoreTable {
    /// Contribution of a fragment absent from the table.
    pub unknown: f64,
    entries: HashMap<u64, f64>,
}

impl FragmentScoreTable {
    /// Each fragment scores `log10(count / c80)`, where `c80` is the count of
    /// the fragment at which the most common fragments reach 80% of all
    /// occurrences.
    pub fn from_corpus<'a, I>(graphs: I) -> FragmentScoreTable
    where
        I: IntoIterator<Item = &'a MolGraph>,
    {
        let mut counts: HashMap<u64, u64> = HashMap::new();
        for g in graphs {
            for f in fragments(g) {
                *counts.entry(f).or_default() += 1;
            }
        }
        let total: u64 = counts.values().sum();
        let mut sorted: Vec<(u64, u64)> = counts.iter().map(|(&k, &v)| (k, v)).collect();
        sorted.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        let mut acc = 0;
        let mut threshold = 1;
        for &(_, c) in &sorted {
            acc += c;
            threshold = c;
            if acc as f64 >= 0.8 * total as f64 {
                break;
            }
        }
        let entries = counts
            .into_iter()
            .map(|(k, c)| (k, (c as f64 / threshold as f64).log10()))
            .collect();
        FragmentScoreTable {
            unknown: RAW_MIN,
            entries,
        }
    }

    pub fn contribution(&self, fragment: u64) -> f64 {
        self.entries.get(&fragment).copied().unwrap_or(self.unknown)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{TABLE_HEADER}\nunknown\t{}\n", self.unknown);
        let sorted: BTreeMap<u64, f64> = self.entries.iter().map(|(&k, &v)| (k, v)).collect();
        for (k, v) in sorted {
            let _ = writeln!(out, "{k:016x}\t{v}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<FragmentScoreTable, DescriptorError> {
        let mut lines = text.lines();
        if lines.next() != Some(TABLE_HEADER) {
            return Err(DescriptorError::Table("missing fragment table header".into()));
        }
        let mut unknown = RAW_MIN;
        let mut entries = HashMap::new();
        for (no, line) in lines.enumerate() {
            let bad = || DescriptorError::Table(format!("fragment table line {}", no + 2));
            let Some((k, v)) = line.split_once('\t') else {
                return Err(bad());
            };
            let v: f64 = v.trim().parse().map_err(|_| bad())?;
            if k == "unknown" {
                unknown = v;
            } else {
                entries.insert(u64::from_str_radix(k, 16).map_err(|_| bad())?, v);
            }
        }
        Ok(FragmentScoreTable { unknown, entries })
    }

    pub fn load(path: &Path) -> Result<FragmentScoreTable, DescriptorError> {
        FragmentScoreTable::from_text(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: &Path) -> Result<(), DescriptorError> {
        fs::write(path, self.to_text())?;
        Ok(())
    }
}

/// Circular atom environments of radius 0 to 2, one hash per atom and
/// radius. Hydrogen nodes are ignored.
pub fn fragments(g: &MolGraph) -> Vec<u64> {
    let heavy: Vec<usize> = (0..g.atom_count())
        .filter(|&i| g.atom(i).element != Element::H)
        .collect();
    let mut ids: Vec<u64> = vec![0; g.atom_count()];
    for &i in &heavy {
        let a = g.atom(i);
        let inv = [
            a.element.atomic_number(),
            g.heavy_degree(i) as u8,
            g.hydrogen_count(i),
            a.formal_charge as u8,
            a.is_aromatic as u8,
            g.atom_in_ring(i) as u8,
        ];
        ids[i] = fnv1a(&inv);
    }
    let mut out: Vec<u64> = heavy.iter().map(|&i| ids[i]).collect();
    for radius in 1..=RADIUS {
        let mut next = ids.clone();
        for &i in &heavy {
            let mut env: Vec<(u8, u64)> = g
                .neighbors(i)
                .iter()
                .filter(|(n, _)| g.atom(*n).element != Element::H)
                .map(|&(n, b)| (g.bonds()[b].order.code(), ids[n]))
                .collect();
            env.sort_unstable();
            let mut bytes = Vec::with_capacity(9 + env.len() * 9);
            bytes.push(radius as u8);
            bytes.extend_from_slice(&ids[i].to_le_bytes());
            for (o, id) in env {
                bytes.push(o);
                bytes.extend_from_slice(&id.to_le_bytes());
            }
            next[i] = fnv1a(&bytes);
        }
        ids = next;
        out.extend(heavy.iter().map(|&i| ids[i]));
    }
    out
}

/// Parts of the score before rescaling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaComponents {
    pub fragment_score: f64,
    pub size_penalty: f64,
    pub spiro_penalty: f64,
    pub bridge_penalty: f64,
    pub macrocycle_penalty: f64,
    /// Correction for molecules whose fragments are largely repeats.
    pub symmetry_correction: f64,
}

impl SaComponents {
    pub fn complexity_penalty(&self) -> f64 {
        self.size_penalty + self.spiro_penalty + self.bridge_penalty + self.macrocycle_penalty
    }

    pub fn raw(&self) -> f64 {
        self.fragment_score - self.complexity_penalty() + self.symmetry_correction
    }

    pub fn score(&self) -> f64 {
        rescale(self.raw())
    }
}

pub fn rescale(raw: f64) -> f64 {
    let mut sa = 11.0 - (raw - RAW_MIN + 1.0) / (RAW_MAX - RAW_MIN) * 9.0;
    if sa > 8.0 {
        sa = 8.0 + (sa + 1.0 - 9.0).ln();
    }
    sa.clamp(1.0, 10.0)
}

pub fn sa_components(g: &MolGraph, table: &FragmentScoreTable) -> SaComponents {
    let frags = fragments(g);
    let n_heavy = (0..g.atom_count())
        .filter(|&i| g.atom(i).element != Element::H)
        .count();
    let fragment_score = if frags.is_empty() {
        table.unknown
    } else {
        frags.iter().map(|&f| table.contribution(f)).sum::<f64>() / frags.len() as f64
    };
    let (spiro, bridge) = spiro_and_bridgeheads(g);
    let n = n_heavy as f64;
    let distinct: std::collections::HashSet<u64> = frags.iter().copied().collect();
    let symmetry_correction = if n_heavy > distinct.len() && !distinct.is_empty() {
        (n / distinct.len() as f64).ln() * 0.5
    } else {
        0.0
    };
    SaComponents {
        fragment_score,
        size_penalty: n.powf(1.005) - n,
        spiro_penalty: ((spiro + 1) as f64).log10(),
        bridge_penalty: ((bridge + 1) as f64).log10(),
        macrocycle_penalty: if g.ring_systems().iter().any(|r| r.len() > 8) {
            2f64.log10()
        } else {
            0.0
        },
        symmetry_correction,
    }
}

/// Spiro atoms (the single atom shared by two rings) and bridgehead atoms
/// (ends of a multi-bond path shared by two rings).
pub fn spiro_and_bridgeheads(g: &MolGraph) -> (usize, usize) {
    let rings = g.ring_systems();
    let mut spiro = std::collections::BTreeSet::new();
    let mut bridge = std::collections::BTreeSet::new();
    for (i, a) in rings.iter().enumerate() {
        for b in &rings[i + 1..] {
            let shared: Vec<usize> = a.iter().filter(|x| b.contains(x)).copied().collect();
            if shared.len() == 1 {
                spiro.insert(shared[0]);
            } else if shared.len() >= 3 {
                for &s in &shared {
                    let outside = g
                        .neighbors(s)
                        .iter()
                        .any(|(n, _)| (a.contains(n) || b.contains(n)) && !shared.contains(n));
                    if outside {
                        bridge.insert(s);
                    }
                }
            }
        }
    }
    (spiro.len(), bridge.len())
}
