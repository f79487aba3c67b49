//! Canonical atom ranking.
//!
//! Ranks start from an atom invariant and are refined Morgan-style by the
//! sorted ranks of neighbors until the partition is stable. Remaining ties
//! are broken by individualizing each candidate atom of the first tied cell
//! in turn and refining again; every leaf of that search is written out and
//! the lexicographically smallest SMILES wins, so the choice never depends
//! on input atom order. Interchangeable twin atoms (same neighbors, same
//! bonds) are explored only once.

use log::warn;

use super::graph::MolGraph;
use crate::smiles::write_ranked;

/// Upper bound on explored leaves for pathological symmetric graphs.
const LEAF_LIMIT: usize = 20_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalForm {
    pub smiles: String,
    /// `ranks[atom]` is the atom's canonical position, a permutation of `0..n`.
    pub ranks: Vec<usize>,
}

pub fn canonical_ranks(g: &MolGraph) -> Vec<usize> {
    canonical_form(g).ranks
}

pub fn canonical_smiles(g: &MolGraph) -> String {
    canonical_form(g).smiles
}

pub fn canonical_form(g: &MolGraph) -> CanonicalForm {
    let n = g.atom_count();
    if n == 0 {
        return CanonicalForm {
            smiles: String::new(),
            ranks: Vec::new(),
        };
    }
    let initial = refine_ranks(g, &initial_classes(g));
    let mut search = Search {
        g,
        best: None,
        leaves: 0,
    };
    search.descend(initial);
    if search.leaves >= LEAF_LIMIT {
        warn!("canonical search truncated after {LEAF_LIMIT} leaves");
    }
    let (smiles, ranks) = search.best.expect("at least one leaf");
    CanonicalForm { smiles, ranks }
}

/// Class ids from the atom invariant (element, isotope, charge, degree,
/// hydrogens, aromaticity). A class id is the number of atoms in strictly
/// smaller classes, so ids also encode the cell order.
fn initial_classes(g: &MolGraph) -> Vec<usize> {
    let keys: Vec<_> = (0..g.atom_count())
        .map(|i| {
            let a = g.atom(i);
            (
                a.element.atomic_number(),
                a.isotope.unwrap_or(0),
                a.formal_charge,
                g.degree(i),
                g.hydrogen_count(i),
                a.is_aromatic,
            )
        })
        .collect();
    classes_from_keys(&keys)
}

fn classes_from_keys<K: Ord>(keys: &[K]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..keys.len()).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut classes = vec![0; keys.len()];
    for (pos, &atom) in order.iter().enumerate() {
        classes[atom] = if pos > 0 && keys[order[pos - 1]] == keys[atom] {
            classes[order[pos - 1]]
        } else {
            pos
        };
    }
    classes
}

fn distinct(classes: &[usize]) -> usize {
    let mut v = classes.to_vec();
    v.sort_unstable();
    v.dedup();
    v.len()
}

/// Iterate neighborhood refinement until the number of classes is stable.
pub fn refine_ranks(g: &MolGraph, classes: &[usize]) -> Vec<usize> {
    let mut classes = classes.to_vec();
    let mut count = distinct(&classes);
    loop {
        let keys: Vec<(usize, Vec<(usize, u8)>)> = (0..g.atom_count())
            .map(|a| {
                let mut env: Vec<(usize, u8)> = g
                    .neighbors(a)
                    .iter()
                    .map(|&(nb, bond)| (classes[nb], g.bonds()[bond].order.code()))
                    .collect();
                env.sort_unstable();
                (classes[a], env)
            })
            .collect();
        let next = classes_from_keys(&keys);
        let next_count = distinct(&next);
        classes = next;
        if next_count == count {
            return classes;
        }
        count = next_count;
    }
}

struct Search<'a> {
    g: &'a MolGraph,
    best: Option<(String, Vec<usize>)>,
    leaves: usize,
}

impl Search<'_> {
    fn descend(&mut self, classes: Vec<usize>) {
        let n = classes.len();
        if distinct(&classes) == n {
            self.leaves += 1;
            let smiles = write_ranked(self.g, &classes);
            let better = match &self.best {
                None => true,
                Some((s, _)) => smiles < *s,
            };
            if better {
                self.best = Some((smiles, classes));
            }
            return;
        }
        // First (lowest) cell with more than one member.
        let mut sizes = vec![0usize; n];
        for &c in &classes {
            sizes[c] += 1;
        }
        let cell = (0..n).find(|&c| sizes[c] > 1).expect("non-discrete partition");
        let members: Vec<usize> = (0..n).filter(|&a| classes[a] == cell).collect();

        let mut representatives: Vec<usize> = Vec::new();
        for &m in &members {
            if !representatives.iter().any(|&r| self.twins(r, m)) {
                representatives.push(m);
            }
        }
        for rep in representatives {
            if self.leaves >= LEAF_LIMIT && self.best.is_some() {
                return;
            }
            let mut next = classes.clone();
            for &m in &members {
                if m != rep {
                    next[m] = cell + 1;
                }
            }
            let refined = refine_ranks(self.g, &next);
            self.descend(refined);
        }
    }

    /// Swapping twins is an automorphism that fixes every other atom.
    fn twins(&self, a: usize, b: usize) -> bool {
        let env = |x: usize, skip: usize| {
            let mut v: Vec<(usize, u8)> = self
                .g
                .neighbors(x)
                .iter()
                .filter(|(nb, _)| *nb != skip)
                .map(|&(nb, bond)| (nb, self.g.bonds()[bond].order.code()))
                .collect();
            v.sort_unstable();
            v
        };
        self.g.atom(a) == self.g.atom(b)
            && self.g.hydrogen_count(a) == self.g.hydrogen_count(b)
            && env(a, b) == env(b, a)
    }
}
