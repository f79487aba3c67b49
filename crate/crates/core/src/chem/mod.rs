//! Molecular graph model: atoms, bonds, rings, valence rules and canonical
//! atom ranking.

mod canon;
mod element;
mod graph;
mod rings;
mod valence;

pub use canon::{canonical_form, canonical_ranks, canonical_smiles, refine_ranks, CanonicalForm};
pub use element::Element;
pub use graph::{Atom, Bond, BondOrder, MolGraph};
pub use rings::perceive_rings;
pub use valence::{check_valence, Violation, ViolationKind};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChemError {
    #[error("unsupported element `{0}`")]
    UnsupportedElement(String),
    #[error("formal charge {charge} on atom {atom} is outside [-2, 2]")]
    ChargeOutOfRange { atom: usize, charge: i8 },
    #[error("bond {0} references a missing atom")]
    BondOutOfRange(usize),
    #[error("atom {0} is bonded to itself")]
    SelfBond(usize),
    #[error("more than one bond between atoms {0} and {1}")]
    DuplicateBond(usize, usize),
    #[error("empty molecule")]
    Empty,
}
