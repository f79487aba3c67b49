//! Wildman-Crippen atom typing for logP.

use crate::chem::{BondOrder, Element, MolGraph};

struct Nbr {
    el: Element,
    aromatic: bool,
    order: BondOrder,
    index: usize,
}

fn heavy_neighbors(g: &MolGraph, atom: usize) -> Vec<Nbr> {
    g.neighbors(atom)
        .iter()
        .filter(|(n, _)| g.atom(*n).element != Element::H)
        .map(|&(n, b)| Nbr {
            el: g.atom(n).element,
            aromatic: g.atom(n).is_aromatic,
            order: g.bonds()[b].order,
            index: n,
        })
        .collect()
}

// SMARTS `[N,O,P,S,F,Cl,Br,I]`: aliphatic heteroatom.
fn aliphatic_hetero(n: &Nbr) -> bool {
    !n.aromatic
        && matches!(
            n.el,
            Element::N | Element::O | Element::P | Element::S | Element::F | Element::Cl | Element::Br | Element::I
        )
}

fn aliphatic_carbon(n: &Nbr) -> bool {
    !n.aromatic && n.el == Element::C
}

/// Atom type of a heavy atom.
pub fn atom_type(g: &MolGraph, atom: usize) -> &'static str {
    let a = g.atom(atom);
    let nbrs = heavy_neighbors(g, atom);
    let h = g.hydrogen_count(atom);
    match a.element {
        Element::C if a.is_aromatic => aromatic_carbon(&nbrs, h),
        Element::C => aliphatic_carbon_type(&nbrs, h, a.formal_charge),
        Element::N => nitrogen(&nbrs, h, a.formal_charge, a.is_aromatic),
        Element::O => oxygen(g, &nbrs, h, a.formal_charge, a.is_aromatic),
        Element::S if a.is_aromatic => "S3",
        Element::S if a.formal_charge != 0 => "S2",
        Element::S => "S1",
        Element::P => "P",
        Element::F => "F",
        Element::Cl => "Cl",
        Element::Br => "Br",
        Element::I => "I",
        Element::B => "B",
        Element::H => "HS",
    }
}

fn aliphatic_carbon_type(nbrs: &[Nbr], h: u8, charge: i8) -> &'static str {
    if charge != 0 {
        return "CS";
    }
    let multiple = nbrs.iter().any(|n| n.order != BondOrder::Single);
    if !multiple {
        let heavy = nbrs.len();
        if h == 4 {
            return "C1";
        }
        if heavy + h as usize != 4 {
            return "CS";
        }
        let all_c = nbrs.iter().all(aliphatic_carbon);
        let hetero = nbrs.iter().any(aliphatic_hetero);
        let rest_aliphatic = |count_needed: usize| {
            // One aliphatic heteroatom plus `count_needed` further aliphatic atoms.
            hetero && nbrs.iter().filter(|n| !n.aromatic).count() > count_needed
        };
        let aromatic = nbrs.iter().any(|n| n.aromatic);
        let aromatic_c = nbrs.iter().any(|n| n.aromatic && n.el == Element::C);
        let typ = match heavy {
            1 if all_c => "C1",
            1 if hetero => "C3",
            1 if aromatic_c => "C8",
            1 if aromatic => "C9",
            2 if all_c => "C1",
            2 if rest_aliphatic(1) => "C3",
            2 if aromatic => "C10",
            3 if all_c => "C2",
            3 if rest_aliphatic(2) => "C4",
            3 if aromatic => "C11",
            4 if all_c => "C2",
            4 if rest_aliphatic(3) => "C4",
            4 if aromatic => "C12",
            _ => "",
        };
        if !typ.is_empty() {
            return typ;
        }
        if nbrs.iter().any(|n| !n.aromatic && n.el == Element::B) {
            return "C27";
        }
        return "CS";
    }
    if nbrs
        .iter()
        .any(|n| n.order == BondOrder::Double && !n.aromatic && n.el != Element::C)
    {
        return "C5";
    }
    if nbrs.iter().any(|n| n.order == BondOrder::Triple) {
        return "C7";
    }
    let doubles: Vec<&Nbr> = nbrs.iter().filter(|n| n.order == BondOrder::Double).collect();
    if doubles.len() == 2 {
        // Allene centre.
        return "C6";
    }
    if let Some(d) = doubles.first() {
        if d.aromatic {
            return "C26";
        }
        if h == 2 {
            return "C6";
        }
        let other_aromatic = nbrs
            .iter()
            .any(|n| n.order == BondOrder::Single && n.aromatic);
        return if other_aromatic { "C26" } else { "C6" };
    }
    "CS"
}

fn aromatic_carbon(nbrs: &[Nbr], h: u8) -> &'static str {
    if h > 0 {
        return "C18";
    }
    let ring = nbrs.iter().filter(|n| n.order == BondOrder::Aromatic).count();
    let exo: Vec<&Nbr> = nbrs.iter().filter(|n| n.order != BondOrder::Aromatic).collect();
    if let Some(x) = exo.iter().find(|n| n.order == BondOrder::Single) {
        match x.el {
            Element::F => return "C14",
            Element::Cl => return "C15",
            Element::Br => return "C16",
            Element::I => return "C17",
            Element::P | Element::B if !x.aromatic => return "C13",
            _ => {}
        }
    }
    if ring >= 3 {
        return "C19";
    }
    if ring == 2 {
        if let Some(x) = exo.first() {
            match (x.order, x.aromatic, x.el) {
                (BondOrder::Single, true, _) => return "C20",
                (BondOrder::Single, false, Element::C) => return "C21",
                (BondOrder::Single, false, Element::N) => return "C22",
                (BondOrder::Single, false, Element::O) => return "C23",
                (BondOrder::Single, false, Element::S) => return "C24",
                (BondOrder::Double, _, Element::C | Element::N | Element::O) => return "C25",
                _ => {}
            }
        }
    }
    "CS"
}

fn nitrogen(nbrs: &[Nbr], h: u8, charge: i8, aromatic: bool) -> &'static str {
    if aromatic {
        return if charge > 0 { "N12" } else { "N11" };
    }
    if charge < 0 {
        return "N14";
    }
    if charge > 0 {
        if h > 0 {
            return "N10";
        }
        if nbrs.iter().any(|n| n.order == BondOrder::Triple) {
            return "N14";
        }
        return "N13";
    }
    let single = nbrs.iter().all(|n| n.order == BondOrder::Single);
    let any_aromatic = nbrs.iter().any(|n| n.aromatic);
    match (h, nbrs.len()) {
        (2, 1) if single => {
            if any_aromatic {
                "N3"
            } else {
                "N1"
            }
        }
        (1, 2) if single => {
            if any_aromatic {
                "N4"
            } else {
                "N2"
            }
        }
        (1, 1) if nbrs[0].order == BondOrder::Double => "N5",
        (0, _) if nbrs.iter().any(|n| n.order == BondOrder::Triple) => "N9",
        (0, _) if nbrs.iter().any(|n| n.order == BondOrder::Double) => "N6",
        (0, 3) if single => {
            if any_aromatic {
                "N8"
            } else {
                "N7"
            }
        }
        _ => "NS",
    }
}

fn oxygen(g: &MolGraph, nbrs: &[Nbr], h: u8, charge: i8, aromatic: bool) -> &'static str {
    if aromatic {
        return "O1";
    }
    if charge == 0 && h > 0 {
        return "O2";
    }
    if charge == 0 && nbrs.len() == 2 && nbrs.iter().all(|n| n.order == BondOrder::Single) {
        return if nbrs.iter().any(|n| n.aromatic) {
            "O4"
        } else {
            "O3"
        };
    }
    if charge == 0 && nbrs.len() == 1 && nbrs[0].order == BondOrder::Double {
        let x = &nbrs[0];
        return match x.el {
            Element::N | Element::O => "O5",
            Element::C if x.aromatic => "O8",
            Element::C => carbonyl_oxygen(g, x.index),
            _ => "OS",
        };
    }
    if charge == -1 && nbrs.len() == 1 {
        let x = &nbrs[0];
        return match x.el {
            Element::N => "O5",
            Element::S => "O6",
            Element::C if has_double_oxygen(g, x.index) => "O12",
            _ => "O7",
        };
    }
    "OS"
}

fn has_double_oxygen(g: &MolGraph, carbon: usize) -> bool {
    g.neighbors(carbon).iter().any(|&(n, b)| {
        g.atom(n).element == Element::O && g.bonds()[b].order == BondOrder::Double
    })
}

// O=C(X)Y: aromatic substituent, two hetero substituents, or plain.
fn carbonyl_oxygen(g: &MolGraph, carbon: usize) -> &'static str {
    let subs: Vec<usize> = g
        .neighbors(carbon)
        .iter()
        .filter(|&&(n, b)| {
            g.atom(n).element != Element::H
                && !(g.atom(n).element == Element::O && g.bonds()[b].order == BondOrder::Double)
        })
        .map(|&(n, _)| n)
        .collect();
    if subs.iter().any(|&n| g.atom(n).is_aromatic) {
        return "O10";
    }
    if subs.len() == 2 && subs.iter().all(|&n| g.atom(n).element != Element::C) {
        return "O11";
    }
    "O9"
}

/// Type of the hydrogens carried by a heavy atom.
pub fn hydrogen_type(g: &MolGraph, atom: usize) -> &'static str {
    let a = g.atom(atom);
    match a.element {
        Element::C => "H1",
        Element::N => "H3",
        Element::O => {
            let nbrs = heavy_neighbors(g, atom);
            if nbrs.iter().any(|n| n.el == Element::N) {
                return "H3";
            }
            if nbrs.iter().any(|n| matches!(n.el, Element::O | Element::S)) {
                return "H4";
            }
            // Acid or enol: O attached to a carbon that carries a double bond
            // to C, N, O or S.
            let acid = nbrs.iter().any(|n| {
                n.el == Element::C
                    && !n.aromatic
                    && g.neighbors(n.index).iter().any(|&(m, b)| {
                        m != atom
                            && g.bonds()[b].order == BondOrder::Double
                            && matches!(g.atom(m).element, Element::C | Element::N | Element::O | Element::S)
                    })
            });
            if acid {
                "H4"
            } else {
                "H2"
            }
        }
        Element::H => "H1",
        _ => "H2",
    }
}
