//! WebAssembly bindings for the static demo page in `www/`.

use std::sync::OnceLock;

use molrnn::corpus::{generate, CorpusKind};
use molrnn::descriptors::{describe as describe_graph, FragmentScoreTable};
use molrnn::sample::apply_temperature;
use molrnn::smiles::{parse, validate, write_canonical, Validity};
use wasm_bindgen::prelude::*;

// A smaller reference set than the command line uses, so the first SA score
// in the browser arrives in about a second.
const TABLE_MOLECULES: usize = 1500;

fn fragment_table() -> &'static FragmentScoreTable {
    static T: OnceLock<FragmentScoreTable> = OnceLock::new();
    T.get_or_init(|| {
        let mut graphs = Vec::new();
        for (kind, seed) in [(CorpusKind::Fragment, 1), (CorpusKind::DrugLike, 2)] {
            for s in generate(kind, TABLE_MOLECULES, seed) {
                graphs.push(parse(&s).expect("generated SMILES parse"));
            }
        }
        FragmentScoreTable::from_corpus(graphs.iter())
    })
}

/// Validate a SMILES string and describe it. Returns a JSON object.
#[wasm_bindgen]
pub fn describe(smiles: &str) -> String {
    let smiles = smiles.trim();
    if let Validity::Invalid(e) = validate(smiles) {
        return format!(
            r#"{{"valid":false,"error":"{}","position":{}}}"#,
            e.class, e.position
        );
    }
    let g = parse(smiles).expect("validated");
    match describe_graph(&g, fragment_table()) {
        Ok(r) => format!(
            r#"{{"valid":true,"canonical":"{}","mw":{:.3},"logp":{:.4},"tpsa":{:.2},"hba":{},"hbd":{},"rot_bonds":{},"sa_score":{:.3}}}"#,
            json_escape(&write_canonical(&g)),
            r.mw,
            r.logp,
            r.tpsa,
            r.hba,
            r.hbd,
            r.rot_bonds,
            r.sa_score
        ),
        Err(e) => format!(r#"{{"valid":false,"error":"{}","position":0}}"#, json_escape(&e.to_string())),
    }
}

/// Reshape a probability vector with a sampling temperature. Entries are
/// normalized first; returns an empty vector for bad input.
#[wasm_bindgen]
pub fn temperature(probs: Vec<f64>, t: f64) -> Vec<f64> {
    let total: f64 = probs.iter().sum();
    let usable = t > 0.0 && t.is_finite() && total > 0.0 && probs.iter().all(|p| *p >= 0.0);
    if !usable {
        return Vec::new();
    }
    let p: Vec<f64> = probs.iter().map(|x| x / total).collect();
    apply_temperature(&p, t)
}

/// Newline-separated molecules from the synthetic corpus generator.
#[wasm_bindgen]
pub fn sample_corpus(druglike: bool, n: usize, seed: u32) -> String {
    let kind = if druglike {
        CorpusKind::DrugLike
    } else {
        CorpusKind::Fragment
    };
    generate(kind, n.min(200), u64::from(seed)).join("\n")
}

fn json_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn describes_valid_and_invalid_input() {
        let ok = describe("OCC");
        assert!(ok.contains(r#""valid":true"#) && ok.contains(r#""canonical":"CCO""#), "{ok}");
        let bad = describe("C1CC");
        assert!(bad.starts_with(r#"{"valid":false"#), "{bad}");
    }

    #[test]
    fn temperature_normalizes_and_rejects_bad_input() {
        let q = temperature(vec![7.0, 2.0, 1.0], 0.5);
        assert!((q[0] - 0.49 / 0.54).abs() < 1e-12);
        assert!(temperature(vec![0.5, 0.5], 0.0).is_empty());
        assert!(temperature(vec![-1.0, 2.0], 1.0).is_empty());
    }

    #[test]
    fn corpus_sampling_is_seeded_and_capped() {
        assert_eq!(sample_corpus(false, 5, 3), sample_corpus(false, 5, 3));
        assert_eq!(sample_corpus(true, 1000, 1).lines().count(), 200);
    }
}
