//! Topological polar surface area from N and O environment contributions.

use std::fmt::Write;

use crate::chem::{BondOrder, Element, MolGraph};

/// Environment key of a polar atom, e.g. `N0H1s2` for a secondary amine
/// nitrogen or `n0H0a2` for a pyridine nitrogen. `None` for non-polar atoms.
pub fn environment(g: &MolGraph, atom: usize) -> Option<String> {
    let a = g.atom(atom);
    let symbol = match (a.element, a.is_aromatic) {
        (Element::N, false) => "N",
        (Element::N, true) => "n",
        (Element::O, false) => "O",
        (Element::O, true) => "o",
        _ => return None,
    };
    let charge = match a.formal_charge {
        0 => "0",
        c if c > 0 => "+",
        _ => "-",
    };
    let mut counts = [0u8; 4];
    for &(n, b) in g.neighbors(atom) {
        if g.atom(n).element == Element::H {
            continue;
        }
        let slot = match g.bonds()[b].order {
            BondOrder::Single => 0,
            BondOrder::Double => 1,
            BondOrder::Triple => 2,
            BondOrder::Aromatic => 3,
        };
        counts[slot] += 1;
    }
    let mut key = format!("{symbol}{charge}H{}", g.hydrogen_count(atom));
    for (count, tag) in counts.iter().zip(['s', 'd', 't', 'a']) {
        if *count > 0 {
            let _ = write!(key, "{tag}{count}");
        }
    }
    if g.ring_systems().iter().any(|r| r.len() == 3 && r.contains(&atom)) {
        key.push_str("r3");
    }
    Some(key)
}
