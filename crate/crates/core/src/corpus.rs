//! Deterministic generator of ZINC-like molecules.
//!
//! Molecules are assembled from ring scaffolds, linkers and terminal groups,
//! given physiological protonation states (charged aliphatic amines,
//! carboxylates) and filtered into fragment-like or drug-like sets.

use std::collections::HashSet;
use std::sync::OnceLock;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::chem::{check_valence, Atom, Bond, BondOrder, Element, MolGraph};
use crate::descriptors::{hba, hbd, logp, molecular_weight, rotatable_bonds, tpsa};
use crate::smiles::{parse, write_canonical};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CorpusKind {
    /// MW <= 250, logP <= 3.5, rotatable bonds <= 5.
    Fragment,
    /// 150 <= MW <= 500, logP <= 5, rotatable bonds <= 7, TPSA < 150,
    /// HBD <= 5, HBA <= 10.
    DrugLike,
}

impl CorpusKind {
    pub fn accepts(self, g: &MolGraph) -> bool {
        let Ok(mw) = molecular_weight(g) else {
            return false;
        };
        let lp = logp(g);
        let rot = rotatable_bonds(g);
        match self {
            CorpusKind::Fragment => mw <= 250.0 && lp <= 3.5 && rot <= 5,
            CorpusKind::DrugLike => {
                (150.0..=500.0).contains(&mw)
                    && lp <= 5.0
                    && rot <= 7
                    && tpsa(g) < 150.0
                    && hbd(g) <= 5
                    && hba(g) <= 10
            }
        }
    }
}

const RINGS: &[(&str, u32)] = &[
    ("c1ccccc1", 40),
    ("c1ccncc1", 10),
    ("c1cncnc1", 4),
    ("c1ccsc1", 6),
    ("c1ccoc1", 4),
    ("c1cc[nH]c1", 2),
    ("c1cn[nH]c1", 4),
    ("c1c[nH]cn1", 3),
    ("c1cscn1", 4),
    ("c1cocn1", 2),
    ("c1ncon1", 2),
    ("c1nncs1", 1),
    ("C1CCCCC1", 6),
    ("C1CCCC1", 3),
    ("C1CC1", 3),
    ("C1CCNCC1", 8),
    ("C1CNCCN1", 6),
    ("C1COCCN1", 6),
    ("C1CCNC1", 6),
    ("C1CCOC1", 3),
    ("C1CCOCC1", 2),
    ("O=C1CCCN1", 2),
    ("O=C1CCCCN1", 1),
    ("O=C1NCCS1", 1),
    ("c1ccc2ccccc2c1", 3),
    ("c1ccc2[nH]ccc2c1", 3),
    ("c1ccc2ncccc2c1", 2),
    ("c1ccc2occc2c1", 1),
    ("c1ccc2[nH]cnc2c1", 2),
    ("c1ccc2c(c1)CCN2", 1),
    ("c1ccc2c(c1)CCNC2", 2),
    ("c1ccc2c(c1)OCO2", 2),
    ("c1ccc2c(c1)OCCO2", 1),
    ("c1ccc2sccc2c1", 1),
    ("C1CC2(C1)CCNCC2", 1),
    ("C1CC2CCC1N2", 1),
];

/// Joins two pieces: the first atom bonds to one side, the last to the other.
const LINKERS: &[(&str, u32)] = &[
    ("", 14),
    ("C", 10),
    ("CC", 3),
    ("C(=O)N", 10),
    ("NC(=O)", 6),
    ("O", 5),
    ("N", 4),
    ("S", 1),
    ("C(=O)", 4),
    ("CN", 5),
    ("NC", 3),
    ("OC", 3),
    ("S(=O)(=O)N", 3),
    ("NC(=O)N", 2),
    ("C(=O)NC", 3),
    ("CCN", 2),
    ("CC(=O)N", 2),
    ("C=C", 1),
];

/// Terminal groups, attached through their first atom.
const GROUPS: &[(&str, u32)] = &[
    ("C", 30),
    ("CC", 6),
    ("C(C)C", 3),
    ("F", 10),
    ("Cl", 8),
    ("Br", 3),
    ("O", 8),
    ("OC", 9),
    ("N", 5),
    ("C#N", 3),
    ("C(F)(F)F", 4),
    ("C(=O)O", 6),
    ("C(N)=O", 4),
    ("C(C)=O", 3),
    ("NC(C)=O", 3),
    ("S(N)(=O)=O", 2),
    ("S(C)(=O)=O", 2),
    ("OC(F)(F)F", 1),
    ("[N+](=O)[O-]", 2),
    ("CO", 3),
    ("CN", 3),
    ("N(C)C", 3),
    ("C(=O)OC", 2),
    ("SC", 1),
    ("CC(=O)O", 2),
    ("C(C)(C)C", 1),
    ("OCC", 2),
    ("CCO", 1),
    ("CCN", 1),
    ("NC", 2),
];

struct Library {
    rings: Vec<(MolGraph, u32)>,
    linkers: Vec<(Option<MolGraph>, u32)>,
    groups: Vec<(MolGraph, u32)>,
}

fn library() -> &'static Library {
    static L: OnceLock<Library> = OnceLock::new();
    L.get_or_init(|| {
        let p = |s: &str| parse(s).expect("library SMILES");
        Library {
            rings: RINGS.iter().map(|&(s, w)| (p(s), w)).collect(),
            linkers: LINKERS
                .iter()
                .map(|&(s, w)| ((!s.is_empty()).then(|| p(s)), w))
                .collect(),
            groups: GROUPS.iter().map(|&(s, w)| (p(s), w)).collect(),
        }
    })
}

fn pick<'a, T, R: Rng>(items: &'a [(T, u32)], rng: &mut R) -> &'a T {
    &items.choose_weighted(rng, |item| item.1).expect("non-empty weighted list").0
}

/// Atoms that may take a new substituent: unbracketed atoms with a hydrogen.
fn open_sites(g: &MolGraph) -> Vec<usize> {
    (0..g.atom_count())
        .filter(|&i| g.atom(i).implicit_h && g.hydrogen_count(i) > 0)
        .collect()
}

fn join(a: &MolGraph, at: usize, b: &MolGraph, bt: usize) -> MolGraph {
    let offset = a.atom_count();
    let (atoms, mut bonds) = a.union(b).into_parts();
    bonds.push(Bond::new(at, offset + bt, BondOrder::Single));
    MolGraph::new(atoms, bonds).expect("joining valid pieces")
}

/// Whether atom `i` of `g` may bond to a piece atom of element `other`.
/// Heteroatoms bond only to carbon, and an aliphatic carbon takes at most
/// one heteroatom neighbor.
fn compatible(g: &MolGraph, i: usize, other: Element) -> bool {
    let a = g.atom(i);
    let hetero = |e: Element| e != Element::C;
    if hetero(a.element) {
        return !hetero(other);
    }
    if !hetero(other) || a.is_aromatic {
        return true;
    }
    !g.neighbors(i).iter().any(|&(n, _)| hetero(g.atom(n).element))
}

fn attach<R: Rng>(mol: &MolGraph, piece: &MolGraph, piece_site: Option<usize>, rng: &mut R) -> Option<MolGraph> {
    let psite = match piece_site {
        Some(s) => s,
        None => *open_sites(piece).choose(rng)?,
    };
    let sites: Vec<usize> = open_sites(mol)
        .into_iter()
        .filter(|&i| {
            compatible(mol, i, piece.atom(psite).element)
                && compatible(piece, psite, mol.atom(i).element)
        })
        .collect();
    let site = *sites.choose(rng)?;
    Some(join(mol, site, piece, psite))
}

fn add_ring<R: Rng>(mol: &MolGraph, lib: &Library, rng: &mut R) -> Option<MolGraph> {
    let ring = pick(&lib.rings, rng);
    match pick(&lib.linkers, rng) {
        None => attach(mol, ring, None, rng),
        Some(linker) => {
            let last = linker.atom_count() - 1;
            // Ring onto the linker's tail first, then the linker's head onto the molecule.
            let ring_sites: Vec<usize> = open_sites(ring)
                .into_iter()
                .filter(|&i| {
                    compatible(ring, i, linker.atom(last).element)
                        && compatible(linker, last, ring.atom(i).element)
                })
                .collect();
            let ring_site = *ring_sites.choose(rng)?;
            let tail_piece = join(linker, last, ring, ring_site);
            attach(mol, &tail_piece, Some(0), rng)
        }
    }
}

/// Apply physiological protonation: one basic aliphatic amine may gain a
/// proton and one carboxylic acid may lose one.
fn protonate<R: Rng>(g: &MolGraph, rng: &mut R) -> MolGraph {
    let mut atoms: Vec<Atom> = g.atoms().to_vec();
    let amines: Vec<usize> = (0..g.atom_count())
        .filter(|&i| g.atom(i).element == Element::N && g.atom(i).formal_charge == 0)
        .filter(|&i| !g.atom(i).is_aromatic && is_basic_amine(g, i))
        .collect();
    let acids: Vec<usize> = (0..g.atom_count())
        .filter(|&i| g.atom(i).element == Element::O && g.hydrogen_count(i) == 1)
        .filter(|&i| is_acid_oxygen(g, i))
        .collect();
    let mut changed = false;
    if let Some(&n) = amines.choose(rng) {
        if rng.random::<f64>() < 0.6 {
            atoms[n] = Atom::bracket(Element::N, false, g.hydrogen_count(n) + 1, 1);
            changed = true;
        }
    }
    if let Some(&o) = acids.choose(rng) {
        if rng.random::<f64>() < 0.85 {
            atoms[o] = Atom::bracket(Element::O, false, 0, -1);
            changed = true;
        }
    }
    if !changed {
        return g.clone();
    }
    let bonds = g.bonds().iter().map(|b| Bond::new(b.begin, b.end, b.order)).collect();
    MolGraph::new(atoms, bonds).expect("protonated graph")
}

// sp3 nitrogen whose neighbors are all saturated, non-aromatic carbons.
fn is_basic_amine(g: &MolGraph, n: usize) -> bool {
    g.neighbors(n).iter().all(|&(c, b)| {
        let atom = g.atom(c);
        g.bonds()[b].order == BondOrder::Single
            && atom.element == Element::C
            && !atom.is_aromatic
            && g.neighbors(c)
                .iter()
                .all(|&(_, cb)| g.bonds()[cb].order == BondOrder::Single)
    }) && g.degree(n) > 0
}

fn is_acid_oxygen(g: &MolGraph, o: usize) -> bool {
    g.neighbors(o).iter().any(|&(c, _)| {
        g.atom(c).element == Element::C
            && g.neighbors(c).iter().any(|&(x, b)| {
                x != o && g.atom(x).element == Element::O && g.bonds()[b].order == BondOrder::Double
            })
    })
}

fn assemble<R: Rng>(kind: CorpusKind, rng: &mut R) -> Option<MolGraph> {
    let lib = library();
    let mut mol = pick(&lib.rings, rng).clone();
    let extra_rings = match kind {
        CorpusKind::Fragment => [0, 0, 1, 1, 1, 2].choose(rng).copied()?,
        CorpusKind::DrugLike => [1, 1, 2, 2, 2, 3].choose(rng).copied()?,
    };
    for _ in 0..extra_rings {
        mol = add_ring(&mol, lib, rng)?;
    }
    let groups = match kind {
        CorpusKind::Fragment => rng.random_range(0..=3),
        CorpusKind::DrugLike => rng.random_range(0..=4),
    };
    for _ in 0..groups {
        let group = pick(&lib.groups, rng);
        mol = attach(&mol, group, Some(0), rng)?;
    }
    let mol = protonate(&mol, rng);
    check_valence(&mol).is_empty().then_some(mol)
}

/// `n` distinct canonical SMILES of the given kind.
pub fn generate(kind: CorpusKind, n: usize, seed: u64) -> Vec<String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(n);
    let mut attempts = 0usize;
    while out.len() < n {
        attempts += 1;
        assert!(attempts < 200 * n + 10_000, "generator cannot reach {n} molecules");
        let Some(g) = assemble(kind, &mut rng) else {
            continue;
        };
        if !kind.accepts(&g) {
            continue;
        }
        let smiles = write_canonical(&g);
        if seen.insert(smiles.clone()) {
            out.push(smiles);
        }
    }
    out
}

/// Fixed mixed sample used to derive the default SA fragment table.
pub fn reference_graphs() -> Vec<MolGraph> {
    let mut smiles = generate(CorpusKind::Fragment, 4000, 0x5a5a);
    smiles.extend(generate(CorpusKind::DrugLike, 4000, 0xa5a5));
    smiles.iter().map(|s| parse(s).expect("generated SMILES parse")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic_and_unique() {
        let a = generate(CorpusKind::Fragment, 200, 1);
        let b = generate(CorpusKind::Fragment, 200, 1);
        assert_eq!(a, b);
        let set: HashSet<_> = a.iter().collect();
        assert_eq!(set.len(), a.len());
    }

    #[test]
    fn generated_molecules_pass_their_filter() {
        for (kind, seed) in [(CorpusKind::Fragment, 2), (CorpusKind::DrugLike, 3)] {
            for s in generate(kind, 100, seed) {
                let g = parse(&s).unwrap();
                assert!(kind.accepts(&g), "{s}");
            }
        }
    }

    #[test]
    fn charged_states_appear() {
        let corpus = generate(CorpusKind::DrugLike, 500, 4);
        assert!(corpus.iter().any(|s| s.contains("+]")));
        assert!(corpus.iter().any(|s| s.contains("[O-]")));
    }
}
