use std::collections::HashSet;

use super::element::Element;
use super::rings;
use super::ChemError;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    pub element: Element,
    pub formal_charge: i8,
    pub is_aromatic: bool,
    /// Hydrogens stated explicitly (bracket atoms) or fixed by an edit.
    pub explicit_h: u8,
    pub isotope: Option<u16>,
    /// When set, hydrogens are added on top of `explicit_h` up to the lowest
    /// legal valence, as for unbracketed SMILES atoms.
    pub implicit_h: bool,
}

impl Atom {
    /// An organic-subset atom whose hydrogens follow the valence table.
    pub fn organic(element: Element, aromatic: bool) -> Atom {
        Atom {
            element,
            formal_charge: 0,
            is_aromatic: aromatic,
            explicit_h: 0,
            isotope: None,
            implicit_h: true,
        }
    }

    /// An atom with a fixed hydrogen count, as written inside brackets.
    pub fn bracket(element: Element, aromatic: bool, hydrogens: u8, charge: i8) -> Atom {
        Atom {
            element,
            formal_charge: charge,
            is_aromatic: aromatic,
            explicit_h: hydrogens,
            isotope: None,
            implicit_h: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Contribution to the bond-valence sum; aromatic bonds count one and the
    /// delocalized electron is accounted for per atom.
    pub fn valence(self) -> u8 {
        match self {
            BondOrder::Single | BondOrder::Aromatic => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
        }
    }

    pub(crate) fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bond {
    pub begin: usize,
    pub end: usize,
    pub order: BondOrder,
    pub in_ring: bool,
}

impl Bond {
    pub fn new(begin: usize, end: usize, order: BondOrder) -> Bond {
        Bond {
            begin,
            end,
            order,
            in_ring: false,
        }
    }

    pub fn other(&self, atom: usize) -> usize {
        if self.begin == atom {
            self.end
        } else {
            self.begin
        }
    }
}

/// Molecular graph with perceived rings and resolved hydrogen counts.
///
/// Graphs are immutable once built; edits go through [`MolGraph::new`]
/// again so ring data and hydrogen counts never go stale.
#[derive(Debug, Clone)]
pub struct MolGraph {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    /// Smallest set of smallest rings, each as an ordered atom cycle.
    ring_systems: Vec<Vec<usize>>,
    adjacency: Vec<Vec<(usize, usize)>>,
    hydrogens: Vec<u8>,
}

impl MolGraph {
    pub fn new(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Result<MolGraph, ChemError> {
        let mut adjacency = vec![Vec::new(); atoms.len()];
        let mut seen = HashSet::new();
        for (index, atom) in atoms.iter().enumerate() {
            if !(-2..=2).contains(&atom.formal_charge) {
                return Err(ChemError::ChargeOutOfRange {
                    atom: index,
                    charge: atom.formal_charge,
                });
            }
        }
        for (index, bond) in bonds.iter().enumerate() {
            if bond.begin >= atoms.len() || bond.end >= atoms.len() {
                return Err(ChemError::BondOutOfRange(index));
            }
            if bond.begin == bond.end {
                return Err(ChemError::SelfBond(bond.begin));
            }
            let key = (bond.begin.min(bond.end), bond.begin.max(bond.end));
            if !seen.insert(key) {
                return Err(ChemError::DuplicateBond(key.0, key.1));
            }
            adjacency[bond.begin].push((bond.end, index));
            adjacency[bond.end].push((bond.begin, index));
        }
        let mut graph = MolGraph {
            atoms,
            bonds,
            ring_systems: Vec::new(),
            adjacency,
            hydrogens: Vec::new(),
        };
        graph.hydrogens = (0..graph.atoms.len())
            .map(|i| graph.compute_hydrogens(i))
            .collect();
        Ok(rings::perceive_rings(graph))
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, index: usize) -> &Atom {
        &self.atoms[index]
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn ring_systems(&self) -> &[Vec<usize>] {
        &self.ring_systems
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Neighbor atom and bond index pairs.
    pub fn neighbors(&self, atom: usize) -> &[(usize, usize)] {
        &self.adjacency[atom]
    }

    pub fn degree(&self, atom: usize) -> usize {
        self.adjacency[atom].len()
    }

    /// Number of neighbors that are not hydrogen.
    pub fn heavy_degree(&self, atom: usize) -> usize {
        self.adjacency[atom]
            .iter()
            .filter(|(n, _)| self.atoms[*n].element != Element::H)
            .count()
    }

    /// Total hydrogens carried by the atom (explicit plus implicit), not
    /// counting hydrogen atoms present as graph nodes.
    pub fn hydrogen_count(&self, atom: usize) -> u8 {
        self.hydrogens[atom]
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<&Bond> {
        self.adjacency[a]
            .iter()
            .find(|(n, _)| *n == b)
            .map(|(_, bond)| &self.bonds[*bond])
    }

    pub fn atom_in_ring(&self, atom: usize) -> bool {
        self.adjacency[atom]
            .iter()
            .any(|(_, b)| self.bonds[*b].in_ring)
    }

    /// Connected components as sorted atom lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut label = vec![usize::MAX; self.atoms.len()];
        let mut out = Vec::new();
        for start in 0..self.atoms.len() {
            if label[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            label[start] = id;
            let mut cursor = 0;
            while cursor < members.len() {
                let a = members[cursor];
                cursor += 1;
                for &(n, _) in &self.adjacency[a] {
                    if label[n] == usize::MAX {
                        label[n] = id;
                        members.push(n);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// Bond-order sum plus the delocalized-electron term for aromatic atoms.
    /// Hydrogens are not included.
    pub fn bond_valence(&self, atom: usize) -> u8 {
        self.bonded_valence(atom, self.atoms[atom].explicit_h)
    }

    /// Valence including all hydrogens.
    pub fn total_valence(&self, atom: usize) -> u8 {
        self.bond_valence(atom).saturating_add(self.hydrogens[atom])
    }

    /// Hydrogens an unbracketed atom with this bonding would carry: fill to
    /// the lowest legal valence at or above the bonded valence.
    pub fn default_implicit_hydrogens(&self, atom: usize) -> u8 {
        let a = &self.atoms[atom];
        let bonded = self.bonded_valence(atom, 0);
        a.element
            .valences(a.formal_charge)
            .iter()
            .find(|&&v| v >= bonded)
            .map_or(0, |&v| v - bonded)
    }

    // An aromatic carbon or boron always contributes one delocalized electron
    // unless it carries an exocyclic multiple bond; heteroatoms contribute
    // one only while they are below their lowest legal valence.
    fn bonded_valence(&self, atom: usize, explicit_h: u8) -> u8 {
        let a = &self.atoms[atom];
        let mut sum = 0u8;
        let mut multiple = false;
        let mut aromatic_bonds = 0;
        for &(_, b) in &self.adjacency[atom] {
            let order = self.bonds[b].order;
            sum = sum.saturating_add(order.valence());
            match order {
                BondOrder::Double | BondOrder::Triple => multiple = true,
                BondOrder::Aromatic => aromatic_bonds += 1,
                BondOrder::Single => {}
            }
        }
        if a.is_aromatic && aromatic_bonds > 0 && !multiple {
            let pi = match a.element {
                Element::C | Element::B => true,
                _ => a
                    .element
                    .valences(a.formal_charge)
                    .first()
                    .is_some_and(|&v| sum + explicit_h < v),
            };
            if pi {
                sum = sum.saturating_add(1);
            }
        }
        sum
    }

    fn compute_hydrogens(&self, atom: usize) -> u8 {
        let a = &self.atoms[atom];
        if !a.implicit_h {
            return a.explicit_h;
        }
        let bonded = self.bond_valence(atom);
        let implicit = a
            .element
            .valences(a.formal_charge)
            .iter()
            .find(|&&v| v >= bonded)
            .map_or(0, |&v| v - bonded);
        a.explicit_h + implicit
    }

    /// Rebuild with every atom's hydrogen count frozen at its current value.
    pub fn with_fixed_hydrogens(&self) -> MolGraph {
        let atoms = self
            .atoms
            .iter()
            .enumerate()
            .map(|(i, a)| Atom {
                explicit_h: self.hydrogens[i],
                implicit_h: false,
                ..a.clone()
            })
            .collect();
        MolGraph::new(atoms, self.bonds.clone()).expect("rebuilding a valid graph")
    }

    /// Atoms and bonds for building an edited copy.
    pub fn into_parts(self) -> (Vec<Atom>, Vec<Bond>) {
        (self.atoms, self.bonds)
    }

    /// Relabel atoms: atom `i` moves to position `order[i]`.
    pub fn permuted(&self, order: &[usize]) -> MolGraph {
        assert_eq!(order.len(), self.atoms.len());
        let mut atoms = vec![self.atoms[0].clone(); self.atoms.len()];
        for (i, a) in self.atoms.iter().enumerate() {
            atoms[order[i]] = a.clone();
        }
        let bonds = self
            .bonds
            .iter()
            .map(|b| Bond::new(order[b.begin], order[b.end], b.order))
            .collect();
        MolGraph::new(atoms, bonds).expect("permutation preserves validity")
    }

    /// Disjoint union of two graphs; atoms of `other` are appended.
    pub fn union(&self, other: &MolGraph) -> MolGraph {
        let offset = self.atoms.len();
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        let mut bonds: Vec<Bond> = self
            .bonds
            .iter()
            .map(|b| Bond::new(b.begin, b.end, b.order))
            .collect();
        bonds.extend(
            other
                .bonds
                .iter()
                .map(|b| Bond::new(b.begin + offset, b.end + offset, b.order)),
        );
        MolGraph::new(atoms, bonds).expect("union of valid graphs")
    }

    pub(crate) fn set_rings(&mut self, rings: Vec<Vec<usize>>, in_ring: Vec<bool>) {
        for (bond, flag) in self.bonds.iter_mut().zip(in_ring) {
            bond.in_ring = flag;
        }
        self.ring_systems = rings;
    }
}
