use crate::chem::{canonical_smiles, BondOrder, Element, MolGraph};

/// Canonical SMILES: identical for isomorphic graphs.
pub fn write_canonical(g: &MolGraph) -> String {
    canonical_smiles(g)
}

/// Write SMILES following a total atom ranking. Every traversal decision
/// (start atoms, neighbor order, ring-bond digits) is driven by `ranks`, so
/// relabeling the graph together with its ranks gives the same string.
pub fn write_ranked(g: &MolGraph, ranks: &[usize]) -> String {
    let n = g.atom_count();
    assert_eq!(ranks.len(), n, "one rank per atom");
    let mut writer = Writer {
        g,
        ranks,
        visited: vec![false; n],
        children: vec![Vec::new(); n],
        opens: vec![Vec::new(); n],
        closes: vec![Vec::new(); n],
        closure_seen: vec![false; g.bonds().len()],
    };

    let mut roots: Vec<usize> = Vec::new();
    let mut by_rank: Vec<usize> = (0..n).collect();
    by_rank.sort_by_key(|&a| ranks[a]);
    for &a in &by_rank {
        if !writer.visited[a] {
            roots.push(a);
            writer.discover(a, None);
        }
    }

    let mut out = String::new();
    let mut digits = DigitPool::default();
    let mut assigned = vec![0u32; g.bonds().len()];
    for (i, &root) in roots.iter().enumerate() {
        if i > 0 {
            out.push('.');
        }
        writer.emit(root, None, &mut out, &mut digits, &mut assigned);
    }
    out
}

struct Writer<'a> {
    g: &'a MolGraph,
    ranks: &'a [usize],
    visited: Vec<bool>,
    /// Tree children with the connecting bond, in emission order.
    children: Vec<Vec<(usize, usize)>>,
    /// Ring bonds opened at an atom (bond index, partner).
    opens: Vec<Vec<(usize, usize)>>,
    /// Ring bonds closed at an atom.
    closes: Vec<Vec<usize>>,
    closure_seen: Vec<bool>,
}

impl Writer<'_> {
    fn sorted_neighbors(&self, atom: usize) -> Vec<(usize, usize)> {
        let mut list = self.g.neighbors(atom).to_vec();
        list.sort_by_key(|&(n, _)| self.ranks[n]);
        list
    }

    fn discover(&mut self, atom: usize, parent_bond: Option<usize>) {
        // Explicit stack: deep chains must not overflow.
        let mut stack: Vec<(usize, Option<usize>, usize)> = vec![(atom, parent_bond, 0)];
        self.visited[atom] = true;
        while let Some(top) = stack.last_mut() {
            let (a, pb) = (top.0, top.1);
            let neighbors = self.sorted_neighbors(a);
            if top.2 >= neighbors.len() {
                stack.pop();
                continue;
            }
            let (nb, bond) = neighbors[top.2];
            top.2 += 1;
            if Some(bond) == pb {
                continue;
            }
            if self.visited[nb] {
                if !self.closure_seen[bond] {
                    self.closure_seen[bond] = true;
                    self.opens[nb].push((bond, a));
                    self.closes[a].push(bond);
                }
            } else {
                self.visited[nb] = true;
                self.closure_seen[bond] = true;
                self.children[a].push((nb, bond));
                stack.push((nb, Some(bond), 0));
            }
        }
    }

    fn emit(
        &self,
        root: usize,
        incoming: Option<usize>,
        out: &mut String,
        digits: &mut DigitPool,
        assigned: &mut [u32],
    ) {
        enum Step {
            Atom(usize, Option<usize>),
            Text(&'static str),
        }
        let mut work = vec![Step::Atom(root, incoming)];
        while let Some(step) = work.pop() {
            let (a, bond_in) = match step {
                Step::Text(t) => {
                    out.push_str(t);
                    continue;
                }
                Step::Atom(a, b) => (a, b),
            };
            if let Some(b) = bond_in {
                out.push_str(self.bond_symbol(b));
            }
            out.push_str(&atom_text(self.g, a));

            let mut released = Vec::new();
            for &bond in &self.closes[a] {
                let d = assigned[bond];
                out.push_str(self.bond_symbol_ring(bond));
                push_digit(out, d);
                released.push(d);
            }
            for &(bond, _) in &self.opens[a] {
                let d = digits.take();
                assigned[bond] = d;
                push_digit(out, d);
            }
            for d in released {
                digits.release(d);
            }

            let kids = &self.children[a];
            // Last child continues the chain; the others become branches.
            // Pushed in reverse so they pop in order.
            if let Some((&(last, last_bond), rest)) = kids.split_last() {
                work.push(Step::Atom(last, Some(last_bond)));
                for &(child, bond) in rest.iter().rev() {
                    work.push(Step::Text(")"));
                    work.push(Step::Atom(child, Some(bond)));
                    work.push(Step::Text("("));
                }
            }
        }
    }

    fn bond_symbol(&self, bond: usize) -> &'static str {
        let b = &self.g.bonds()[bond];
        let both_aromatic = self.g.atom(b.begin).is_aromatic && self.g.atom(b.end).is_aromatic;
        match b.order {
            BondOrder::Single if both_aromatic => "-",
            BondOrder::Single => "",
            BondOrder::Double => "=",
            BondOrder::Triple => "#",
            BondOrder::Aromatic if both_aromatic => "",
            BondOrder::Aromatic => ":",
        }
    }

    // Ring-bond order is written on the closing side only.
    fn bond_symbol_ring(&self, bond: usize) -> &'static str {
        self.bond_symbol(bond)
    }
}

#[derive(Default)]
struct DigitPool {
    used: Vec<u32>,
}

impl DigitPool {
    fn take(&mut self) -> u32 {
        let d = (1..).find(|d| !self.used.contains(d)).expect("digit");
        self.used.push(d);
        d
    }

    fn release(&mut self, d: u32) {
        self.used.retain(|&x| x != d);
    }
}

fn push_digit(out: &mut String, d: u32) {
    if d < 10 {
        out.push(char::from_digit(d, 10).unwrap());
    } else {
        out.push_str(&format!("%{d:02}"));
    }
}

/// Atom text: the bare organic-subset symbol when the parser would infer the
/// same hydrogens, otherwise a bracket atom.
pub(crate) fn atom_text(g: &MolGraph, atom: usize) -> String {
    let a = g.atom(atom);
    let h = g.hydrogen_count(atom);
    let symbol = if a.is_aromatic {
        a.element.symbol().to_ascii_lowercase()
    } else {
        a.element.symbol().to_string()
    };
    let plain = a.element.is_organic_subset()
        && a.formal_charge == 0
        && a.isotope.is_none()
        && h == g.default_implicit_hydrogens(atom);
    if plain {
        return symbol;
    }
    let mut text = String::from("[");
    if let Some(iso) = a.isotope {
        text.push_str(&iso.to_string());
    }
    text.push_str(&symbol);
    if h > 0 && a.element != Element::H {
        text.push('H');
        if h > 1 {
            text.push_str(&h.to_string());
        }
    }
    match a.formal_charge {
        0 => {}
        1 => text.push('+'),
        -1 => text.push('-'),
        c if c > 0 => text.push_str(&format!("+{c}")),
        c => text.push_str(&format!("-{}", -c)),
    }
    text.push(']');
    text
}
