//! Molecular descriptors: weight, Wildman-Crippen logP, TPSA, hydrogen-bond
//! counts, rotatable bonds and the synthetic accessibility score.

mod crippen;
mod sascore;
mod table;
mod tpsa;

use std::borrow::Cow;
use std::sync::OnceLock;

pub use crippen::{atom_type as crippen_type, hydrogen_type as crippen_hydrogen_type};
pub use sascore::{fragments, rescale, sa_components, spiro_and_bridgeheads, FragmentScoreTable, SaComponents};
pub use table::ContributionTable;
pub use tpsa::environment as tpsa_environment;

use crate::chem::{check_valence, Atom, Bond, BondOrder, Element, MolGraph};

const CRIPPEN_TABLE: &str = include_str!("data/crippen.txt");
const TPSA_TABLE: &str = include_str!("data/tpsa.txt");

#[derive(Debug, thiserror::Error)]
pub enum DescriptorError {
    #[error("empty molecule")]
    Empty,
    #[error("contribution table: {0}")]
    Table(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DescriptorRecord {
    pub mw: f64,
    pub logp: f64,
    pub tpsa: f64,
    pub hba: usize,
    pub hbd: usize,
    pub rot_bonds: usize,
    pub sa_score: f64,
}

impl DescriptorRecord {
    pub const CSV_HEADER: &'static str = "mw,logp,tpsa,hba,hbd,rot_bonds,sa_score";

    pub fn to_csv(&self) -> String {
        format!(
            "{:.3},{:.4},{:.2},{},{},{},{:.4}",
            self.mw, self.logp, self.tpsa, self.hba, self.hbd, self.rot_bonds, self.sa_score
        )
    }

    /// Value of a property by its CSV column name.
    pub fn get(&self, property: &str) -> Option<f64> {
        Some(match property {
            "mw" => self.mw,
            "logp" => self.logp,
            "tpsa" => self.tpsa,
            "hba" => self.hba as f64,
            "hbd" => self.hbd as f64,
            "rot_bonds" => self.rot_bonds as f64,
            "sa_score" => self.sa_score,
            _ => return None,
        })
    }

    pub const PROPERTIES: [&'static str; 7] = ["mw", "logp", "tpsa", "hba", "hbd", "rot_bonds", "sa_score"];
}

pub fn crippen_table() -> &'static ContributionTable {
    static T: OnceLock<ContributionTable> = OnceLock::new();
    T.get_or_init(|| ContributionTable::from_text(CRIPPEN_TABLE).expect("bundled logP table"))
}

pub fn tpsa_table() -> &'static ContributionTable {
    static T: OnceLock<ContributionTable> = OnceLock::new();
    T.get_or_init(|| ContributionTable::from_text(TPSA_TABLE).expect("bundled TPSA table"))
}

/// Fragment table built from the bundled synthetic corpus on first use.
pub fn default_fragment_table() -> &'static FragmentScoreTable {
    static T: OnceLock<FragmentScoreTable> = OnceLock::new();
    T.get_or_init(|| {
        let graphs = crate::corpus::reference_graphs();
        FragmentScoreTable::from_corpus(graphs.iter())
    })
}

/// All descriptors, with the SA score computed on the neutralized form.
pub fn describe(g: &MolGraph, fragments: &FragmentScoreTable) -> Result<DescriptorRecord, DescriptorError> {
    let g = suppress_hydrogens(g);
    Ok(DescriptorRecord {
        mw: molecular_weight(&g)?,
        logp: logp(&g),
        tpsa: tpsa(&g),
        hba: hba(&g),
        hbd: hbd(&g),
        rot_bonds: rotatable_bonds(&g),
        sa_score: sa_score(&neutralize(&g), fragments)?,
    })
}

/// Fold hydrogen atoms present as graph nodes into their heavy neighbor's
/// hydrogen count.
pub fn suppress_hydrogens(g: &MolGraph) -> Cow<'_, MolGraph> {
    let removable = |i: usize| {
        let a = g.atom(i);
        a.element == Element::H
            && a.formal_charge == 0
            && a.isotope.is_none()
            && g.degree(i) == 1
            && g.atom(g.neighbors(i)[0].0).element != Element::H
    };
    if !(0..g.atom_count()).any(removable) {
        return Cow::Borrowed(g);
    }
    let mut map = vec![usize::MAX; g.atom_count()];
    let mut extra = vec![0u8; g.atom_count()];
    let mut atoms = Vec::new();
    for i in 0..g.atom_count() {
        if removable(i) {
            extra[g.neighbors(i)[0].0] += 1;
        } else {
            map[i] = atoms.len();
            atoms.push(i);
        }
    }
    let new_atoms = atoms
        .iter()
        .map(|&i| Atom {
            explicit_h: g.hydrogen_count(i) + extra[i],
            implicit_h: false,
            ..g.atom(i).clone()
        })
        .collect();
    let bonds = g
        .bonds()
        .iter()
        .filter(|b| map[b.begin] != usize::MAX && map[b.end] != usize::MAX)
        .map(|b| Bond::new(map[b.begin], map[b.end], b.order))
        .collect();
    Cow::Owned(MolGraph::new(new_atoms, bonds).expect("subgraph of a valid graph"))
}

/// Sum of standard atomic masses including all hydrogens.
pub fn molecular_weight(g: &MolGraph) -> Result<f64, DescriptorError> {
    if g.is_empty() {
        return Err(DescriptorError::Empty);
    }
    Ok((0..g.atom_count())
        .map(|i| g.atom(i).element.mass() + g.hydrogen_count(i) as f64 * Element::H.mass())
        .sum())
}

pub fn logp(g: &MolGraph) -> f64 {
    logp_with(g, crippen_table())
}

pub fn logp_with(g: &MolGraph, table: &ContributionTable) -> f64 {
    let g = suppress_hydrogens(g);
    let lookup = |key: &str| {
        table.get(key).unwrap_or_else(|| {
            log::warn!("no logP contribution for atom type {key}");
            0.0
        })
    };
    let mut sum = 0.0;
    for i in 0..g.atom_count() {
        sum += lookup(crippen::atom_type(&g, i));
        let h = g.hydrogen_count(i);
        if h > 0 {
            sum += h as f64 * lookup(crippen::hydrogen_type(&g, i));
        }
    }
    sum
}

pub fn tpsa(g: &MolGraph) -> f64 {
    tpsa_with(g, tpsa_table())
}

/// Polar environments missing from the table contribute nothing.
pub fn tpsa_with(g: &MolGraph, table: &ContributionTable) -> f64 {
    let g = suppress_hydrogens(g);
    (0..g.atom_count())
        .filter_map(|i| tpsa::environment(&g, i))
        .map(|key| table.get(&key).unwrap_or(0.0))
        .fold(0.0, |acc, v| acc + v)
}

/// Nitrogen plus oxygen count.
pub fn hba(g: &MolGraph) -> usize {
    g.atoms()
        .iter()
        .filter(|a| matches!(a.element, Element::N | Element::O))
        .count()
}

/// Hydrogens on nitrogen and oxygen, implicit or explicit.
pub fn hbd(g: &MolGraph) -> usize {
    let g = suppress_hydrogens(g);
    (0..g.atom_count())
        .filter(|&i| matches!(g.atom(i).element, Element::N | Element::O))
        .map(|i| g.hydrogen_count(i) as usize)
        .sum()
}

/// Acyclic single bonds between two non-terminal heavy atoms, not counting
/// amide C-N bonds.
pub fn rotatable_bonds(g: &MolGraph) -> usize {
    let g = suppress_hydrogens(g);
    g.bonds()
        .iter()
        .filter(|b| b.order == BondOrder::Single && !b.in_ring)
        .filter(|b| g.heavy_degree(b.begin) >= 2 && g.heavy_degree(b.end) >= 2)
        .filter(|b| !is_amide_bond(&g, b.begin, b.end) && !is_amide_bond(&g, b.end, b.begin))
        .count()
}

fn is_amide_bond(g: &MolGraph, c: usize, n: usize) -> bool {
    g.atom(c).element == Element::C
        && g.atom(n).element == Element::N
        && g.neighbors(c).iter().any(|&(o, b)| {
            g.atom(o).element == Element::O && g.bonds()[b].order == BondOrder::Double
        })
}

pub fn sa_score(g: &MolGraph, table: &FragmentScoreTable) -> Result<f64, DescriptorError> {
    if g.is_empty() {
        return Err(DescriptorError::Empty);
    }
    Ok(sa_components(&suppress_hydrogens(g), table).score())
}

/// Move charged atoms to a neutral protonation state where one exists:
/// cations with hydrogens lose one, anions gain one. Anions next to a
/// cation without hydrogens (nitro groups, N-oxides) are left alone.
pub fn neutralize(g: &MolGraph) -> MolGraph {
    let cationic_without_h =
        |i: usize| g.atom(i).formal_charge > 0 && g.hydrogen_count(i) == 0;
    let mut atoms: Vec<Atom> = g.atoms().to_vec();
    let mut changed = false;
    for (i, atom) in atoms.iter_mut().enumerate() {
        let h = g.hydrogen_count(i);
        let charge = atom.formal_charge;
        let new_h = if charge > 0 && h > 0 {
            h - 1
        } else if charge < 0 && !g.neighbors(i).iter().any(|&(n, _)| cationic_without_h(n)) {
            h + 1
        } else {
            if charge != 0 {
                log::debug!("charge on atom {i} left in place");
            }
            continue;
        };
        let candidate = Atom {
            formal_charge: charge - charge.signum(),
            explicit_h: new_h,
            implicit_h: false,
            ..atom.clone()
        };
        let bonded = g.total_valence(i) as i32 - h as i32 + new_h as i32;
        let legal = candidate
            .element
            .valences(candidate.formal_charge)
            .contains(&(bonded.max(0) as u8));
        if legal {
            *atom = candidate;
            changed = true;
        } else {
            log::warn!("atom {i} has no neutral valence-legal form");
        }
    }
    if !changed {
        return g.clone();
    }
    let bonds = g.bonds().iter().map(|b| Bond::new(b.begin, b.end, b.order)).collect();
    match MolGraph::new(atoms, bonds) {
        Ok(out) if check_valence(&out).is_empty() => out,
        _ => {
            log::warn!("neutralization produced an invalid graph; charges kept");
            g.clone()
        }
    }
}
