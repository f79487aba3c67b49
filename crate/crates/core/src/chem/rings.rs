//! Smallest-set-of-smallest-rings perception.
//!
//! Candidate cycles follow Horton: for every atom `v` and bond `(x, y)`, the
//! cycle formed by the shortest paths `v..x`, `v..y` and the bond itself,
//! kept when the two paths only meet at `v`. Candidates are taken shortest
//! first and accepted when linearly independent over GF(2) in bond space,
//! which yields a minimum cycle basis.

use std::collections::{HashSet, VecDeque};

use super::graph::MolGraph;

type EdgeSet = Vec<u64>;

pub fn perceive_rings(mut graph: MolGraph) -> MolGraph {
    let n = graph.atom_count();
    let m = graph.bonds().len();
    let components = graph.components().len();
    let cyclomatic = (m + components).saturating_sub(n);
    if cyclomatic == 0 {
        let none = vec![false; m];
        graph.set_rings(Vec::new(), none);
        return graph;
    }

    let words = m.div_ceil(64);
    let mut candidates: Vec<(usize, Vec<usize>, EdgeSet)> = Vec::new();
    let mut seen: HashSet<EdgeSet> = HashSet::new();

    for root in 0..n {
        let (dist, parent) = bfs_tree(&graph, root);
        for (bond_index, bond) in graph.bonds().iter().enumerate() {
            let (x, y) = (bond.begin, bond.end);
            if dist[x] == usize::MAX || dist[y] == usize::MAX {
                continue;
            }
            // Tree edges give degenerate cycles.
            if parent[x] == Some((y, bond_index)) || parent[y] == Some((x, bond_index)) {
                continue;
            }
            let px = path_to_root(&parent, x);
            let py = path_to_root(&parent, y);
            // Paths must share only the root.
            let set_x: HashSet<usize> = px.iter().copied().collect();
            if py.iter().filter(|a| set_x.contains(a)).count() != 1 {
                continue;
            }
            let mut edges = vec![0u64; words];
            let mut cycle = Vec::with_capacity(px.len() + py.len());
            // px runs x..root, py runs y..root.
            for w in px.windows(2) {
                set_bit(&mut edges, bond_index_between(&graph, w[0], w[1]));
            }
            for w in py.windows(2) {
                set_bit(&mut edges, bond_index_between(&graph, w[0], w[1]));
            }
            set_bit(&mut edges, bond_index);
            // root..x, then y back towards the root.
            cycle.extend(px.iter().rev().copied());
            cycle.extend(py[..py.len() - 1].iter().copied());
            if seen.insert(edges.clone()) {
                let len = cycle.len();
                candidates.push((len, cycle, edges));
            }
        }
    }

    candidates.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.2.cmp(&b.2)));

    let mut basis: Vec<(usize, EdgeSet)> = Vec::new(); // (pivot bit, reduced row)
    let mut rings = Vec::new();
    let mut in_ring = vec![false; m];
    for (_, cycle, edges) in candidates {
        if rings.len() == cyclomatic {
            break;
        }
        let mut row = edges.clone();
        for (pivot, b) in &basis {
            if get_bit(&row, *pivot) {
                xor_into(&mut row, b);
            }
        }
        if let Some(pivot) = first_bit(&row) {
            basis.push((pivot, row));
            for (i, flag) in in_ring.iter_mut().enumerate() {
                if get_bit(&edges, i) {
                    *flag = true;
                }
            }
            rings.push(normalize_cycle(cycle));
        }
    }
    graph.set_rings(rings, in_ring);
    graph
}

fn bfs_tree(graph: &MolGraph, root: usize) -> (Vec<usize>, Vec<Option<(usize, usize)>>) {
    let n = graph.atom_count();
    let mut dist = vec![usize::MAX; n];
    let mut parent = vec![None; n];
    let mut queue = VecDeque::new();
    dist[root] = 0;
    queue.push_back(root);
    while let Some(a) = queue.pop_front() {
        // Deterministic tie-breaking by neighbor index.
        let mut neighbors: Vec<(usize, usize)> = graph.neighbors(a).to_vec();
        neighbors.sort_unstable();
        for (nb, bond) in neighbors {
            if dist[nb] == usize::MAX {
                dist[nb] = dist[a] + 1;
                parent[nb] = Some((a, bond));
                queue.push_back(nb);
            }
        }
    }
    (dist, parent)
}

fn path_to_root(parent: &[Option<(usize, usize)>], mut atom: usize) -> Vec<usize> {
    let mut path = vec![atom];
    while let Some((p, _)) = parent[atom] {
        path.push(p);
        atom = p;
    }
    path
}

fn bond_index_between(graph: &MolGraph, a: usize, b: usize) -> usize {
    graph
        .neighbors(a)
        .iter()
        .find(|(n, _)| *n == b)
        .map(|(_, bond)| *bond)
        .expect("path atoms are bonded")
}

/// Rotate so the smallest atom comes first and the smaller neighbor second.
fn normalize_cycle(cycle: Vec<usize>) -> Vec<usize> {
    let len = cycle.len();
    let start = (0..len).min_by_key(|&i| cycle[i]).unwrap_or(0);
    let mut rotated: Vec<usize> = (0..len).map(|k| cycle[(start + k) % len]).collect();
    if len > 2 && rotated[len - 1] < rotated[1] {
        rotated[1..].reverse();
    }
    rotated
}

fn set_bit(set: &mut EdgeSet, bit: usize) {
    set[bit / 64] |= 1 << (bit % 64);
}

fn get_bit(set: &EdgeSet, bit: usize) -> bool {
    set[bit / 64] >> (bit % 64) & 1 == 1
}

fn xor_into(target: &mut EdgeSet, other: &EdgeSet) {
    for (t, o) in target.iter_mut().zip(other) {
        *t ^= o;
    }
}

fn first_bit(set: &EdgeSet) -> Option<usize> {
    set.iter()
        .enumerate()
        .find(|(_, w)| **w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chem::{Atom, Bond, BondOrder, Element};

    fn carbon_graph(n: usize, edges: &[(usize, usize)], aromatic: bool) -> MolGraph {
        let atoms = vec![Atom::organic(Element::C, aromatic); n];
        let order = if aromatic {
            BondOrder::Aromatic
        } else {
            BondOrder::Single
        };
        let bonds = edges.iter().map(|&(a, b)| Bond::new(a, b, order)).collect();
        MolGraph::new(atoms, bonds).unwrap()
    }

    #[test]
    fn benzene_has_one_six_ring() {
        let g = carbon_graph(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0)], true);
        assert_eq!(g.ring_systems().len(), 1);
        assert_eq!(g.ring_systems()[0], vec![0, 1, 2, 3, 4, 5]);
        assert!(g.bonds().iter().all(|b| b.in_ring));
    }

    #[test]
    fn ethane_has_no_rings() {
        let g = carbon_graph(2, &[(0, 1)], false);
        assert!(g.ring_systems().is_empty());
        assert!(!g.bonds()[0].in_ring);
    }

    #[test]
    fn naphthalene_has_two_fused_six_rings() {
        let edges = [
            (0, 1),
            (1, 2),
            (2, 3),
            (3, 4),
            (4, 5),
            (5, 0),
            (4, 6),
            (6, 7),
            (7, 8),
            (8, 9),
            (9, 5),
        ];
        let g = carbon_graph(10, &edges, true);
        let rings = g.ring_systems();
        assert_eq!(rings.len(), 2);
        assert!(rings.iter().all(|r| r.len() == 6));
        let a: HashSet<_> = rings[0].iter().collect();
        let shared = rings[1].iter().filter(|x| a.contains(x)).count();
        assert_eq!(shared, 2);
    }

    #[test]
    fn ring_atoms_form_a_closed_walk() {
        // Cubane: 6 four-rings in the cycle space but only 5 in a basis.
        let edges = [
            (0, 1),
            (1, 2),
            (2, 3),
            (3, 0),
            (4, 5),
            (5, 6),
            (6, 7),
            (7, 4),
            (0, 4),
            (1, 5),
            (2, 6),
            (3, 7),
        ];
        let g = carbon_graph(8, &edges, false);
        assert_eq!(g.ring_systems().len(), 5);
        for ring in g.ring_systems() {
            assert_eq!(ring.len(), 4);
            for k in 0..ring.len() {
                assert!(g.bond_between(ring[k], ring[(k + 1) % ring.len()]).is_some());
            }
        }
    }
}
