#![allow(dead_code)]
//! Oracles shared by the integration tests and the acceptance suite.

use molrnn::chem::MolGraph;
use molrnn::descriptors::DescriptorRecord;
use molrnn::encode::OneHotBatch;
use molrnn::net::{LstmModel, ModelConfig, PARAM_NAMES};
use molrnn::smiles::{parse, write_ranked};
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn tiny_model(dropout: f64) -> (LstmModel, OneHotBatch) {
    let config = ModelConfig {
        vocab_size: 5,
        lstm_units: 4,
        dense_units: 4,
        dropout,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut model = LstmModel::new(config, &mut rng);
    // Non-zero biases so every gradient path is exercised.
    for mut t in model.params.tensors_mut() {
        if t.ndim() == 1 {
            t.mapv_inplace(|v| v + rng.random_range(-0.3..0.3));
        }
    }
    let idx = Array2::from_shape_fn((3, 6), |_| rng.random_range(0..5u8));
    (model, OneHotBatch::from_indices(idx, 5))
}

pub fn loss_with(model: &LstmModel, batch: &OneHotBatch, seed: Option<u64>) -> f64 {
    let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
    let rng = rng.as_mut().map(|r| r as &mut dyn RngCore);
    model.loss_and_grads(batch, rng).unwrap().0
}

/// Largest relative error between analytic and central-difference
/// gradients over every parameter of the tiny model.
pub fn worst_gradient_error(dropout: f64, seed: Option<u64>) -> f64 {
    let (model, batch) = tiny_model(dropout);
    let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
    let (_, grads) = model
        .loss_and_grads(&batch, rng.as_mut().map(|r| r as &mut dyn RngCore))
        .unwrap();
    let analytic: Vec<Vec<f64>> = grads
        .tensors()
        .iter()
        .map(|t| t.iter().copied().collect())
        .collect();
    let eps = 1e-5;
    let mut worst = 0.0f64;
    for (ti, name) in PARAM_NAMES.iter().enumerate() {
        for (k, &a) in analytic[ti].iter().enumerate() {
            let mut plus = model.clone();
            *plus.params.tensors_mut()[ti].iter_mut().nth(k).unwrap() += eps;
            let mut minus = model.clone();
            *minus.params.tensors_mut()[ti].iter_mut().nth(k).unwrap() -= eps;
            let numeric = (loss_with(&plus, &batch, seed) - loss_with(&minus, &batch, seed)) / (2.0 * eps);
            let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(rel);
            if rel >= 1e-4 {
                eprintln!("{name}[{k}]: analytic {a} numeric {numeric} rel {rel:.2e}");
            }
        }
    }
    worst
}

const FIXTURES: &str = include_str!("../fixtures/small_molecules.smi");

pub fn fixtures() -> Vec<(String, MolGraph)> {
    FIXTURES
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(|l| {
            let g = parse(l).unwrap_or_else(|e| panic!("fixture {l} failed: {e:?}"));
            (l.to_string(), g)
        })
        .collect()
}

pub fn atom_label(g: &MolGraph, i: usize) -> (u8, i8, bool, u8, Option<u16>) {
    let a = g.atom(i);
    (
        a.element.atomic_number(),
        a.formal_charge,
        a.is_aromatic,
        g.hydrogen_count(i),
        a.isotope,
    )
}

/// Exhaustive labeled-graph isomorphism by backtracking.
pub fn isomorphic(a: &MolGraph, b: &MolGraph) -> bool {
    if a.atom_count() != b.atom_count() || a.bonds().len() != b.bonds().len() {
        return false;
    }
    let mut map = vec![usize::MAX; a.atom_count()];
    let mut used = vec![false; b.atom_count()];
    extend(a, b, 0, &mut map, &mut used)
}

fn extend(a: &MolGraph, b: &MolGraph, i: usize, map: &mut [usize], used: &mut [bool]) -> bool {
    if i == a.atom_count() {
        return true;
    }
    for j in 0..b.atom_count() {
        if used[j] || atom_label(a, i) != atom_label(b, j) || a.degree(i) != b.degree(j) {
            continue;
        }
        let consistent = (0..i).all(|k| {
            let ab = a.bond_between(i, k).map(|x| x.order);
            let bb = b.bond_between(j, map[k]).map(|x| x.order);
            ab == bb
        });
        if !consistent {
            continue;
        }
        map[i] = j;
        used[j] = true;
        if extend(a, b, i + 1, map, used) {
            return true;
        }
        used[j] = false;
    }
    map[i] = usize::MAX;
    false
}

/// Fixtures plus re-parsed writings of each under random atom rankings.
pub fn fixtures_with_variants(per_molecule: usize) -> Vec<(String, MolGraph)> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut out = Vec::new();
    for (s, g) in fixtures() {
        for _ in 0..per_molecule {
            let mut ranks: Vec<usize> = (0..g.atom_count()).collect();
            ranks.shuffle(&mut rng);
            let text = write_ranked(&g, &ranks);
            let h = parse(&text).unwrap_or_else(|e| panic!("{s} rewritten as {text}: {e:?}"));
            out.push((text, h));
        }
        out.push((s, g));
    }
    out
}

pub const GOLDEN: &str = "tests/fixtures/golden_descriptors.csv";

/// Golden row: the SMILES, then float descriptors as raw bit patterns.
pub fn golden_line(s: &str, r: &DescriptorRecord) -> String {
    format!(
        "{s},{:016x},{:016x},{:016x},{},{},{},{:016x}",
        r.mw.to_bits(),
        r.logp.to_bits(),
        r.tpsa.to_bits(),
        r.hba,
        r.hbd,
        r.rot_bonds,
        r.sa_score.to_bits()
    )
}
