use super::graph::{BondOrder, MolGraph};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ViolationKind {
    /// Total valence (bonds, hydrogens, aromatic electron) above the element's maximum.
    ExceedsValence { valence: u8, max: u8 },
    /// The formal charge leaves the element with no legal valence.
    NoLegalValence { charge: i8 },
    /// An aromatic atom that is not part of an all-aromatic ring.
    AromaticOutsideRing,
    /// An aromatic bond touching a non-aromatic atom.
    AromaticBondMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub atom: usize,
    pub kind: ViolationKind,
}

impl Violation {
    pub fn is_valence(&self) -> bool {
        matches!(
            self.kind,
            ViolationKind::ExceedsValence { .. } | ViolationKind::NoLegalValence { .. }
        )
    }
}

/// Valence and aromaticity-consistency violations, one entry per offending
/// atom and kind. Empty means the graph is chemically sane.
pub fn check_valence(g: &MolGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    for atom in 0..g.atom_count() {
        let a = g.atom(atom);
        let allowed = a.element.valences(a.formal_charge);
        match allowed.last() {
            None => out.push(Violation {
                atom,
                kind: ViolationKind::NoLegalValence {
                    charge: a.formal_charge,
                },
            }),
            Some(&max) => {
                let valence = g.total_valence(atom);
                if valence > max {
                    out.push(Violation {
                        atom,
                        kind: ViolationKind::ExceedsValence { valence, max },
                    });
                }
            }
        }

        let mut aromatic_ring_bonds = 0;
        let mut mismatch = false;
        for &(other, bond) in g.neighbors(atom) {
            let b = &g.bonds()[bond];
            if b.order == BondOrder::Aromatic {
                if !a.is_aromatic || !g.atom(other).is_aromatic {
                    mismatch = true;
                } else if b.in_ring {
                    aromatic_ring_bonds += 1;
                }
            }
        }
        if mismatch {
            out.push(Violation {
                atom,
                kind: ViolationKind::AromaticBondMismatch,
            });
        }
        if a.is_aromatic && aromatic_ring_bonds < 2 {
            out.push(Violation {
                atom,
                kind: ViolationKind::AromaticOutsideRing,
            });
        }
    }
    out
}
