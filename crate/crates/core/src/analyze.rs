//! Evaluation of generated sets: novelty against the training data, the
//! temperature sweep of malformed output, property histograms with
//! Kolmogorov-Smirnov distances, and SA-score percentile picks.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use crate::descriptors::{describe, DescriptorRecord, FragmentScoreTable};
use crate::encode::TokenVocab;
use crate::sample::{generate_batch, CharModel, SampleError, SamplerConfig};
use crate::smiles;

#[derive(Debug, thiserror::Error)]
pub enum AnalyzeError {
    #[error("{0}")]
    Precondition(String),
    #[error(transparent)]
    Sample(#[from] SampleError),
}

/// Canonical forms of the parseable lines, and the number of lines that
/// did not parse. Blank lines are ignored.
pub fn canonical_set<S: AsRef<str>>(lines: &[S]) -> (HashSet<String>, usize) {
    let mut set = HashSet::new();
    let mut invalid = 0;
    for line in lines {
        let s = line.as_ref().trim();
        if s.is_empty() {
            continue;
        }
        match smiles::canonicalize(s) {
            Ok(c) => {
                set.insert(c);
            }
            Err(_) => invalid += 1,
        }
    }
    (set, invalid)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoveltyReport {
    /// Non-blank generated lines.
    pub generated_count: usize,
    /// Distinct valid generated molecules.
    pub valid_count: usize,
    pub found_in_training: usize,
    pub novel_fraction: f64,
}

impl NoveltyReport {
    pub fn found_fraction(&self) -> f64 {
        1.0 - self.novel_fraction
    }

    pub fn to_csv(&self) -> String {
        format!(
            "generated,valid_unique,found_in_training,found_fraction,novel_fraction\n{},{},{},{:.6},{:.6}\n",
            self.generated_count,
            self.valid_count,
            self.found_in_training,
            self.found_fraction(),
            self.novel_fraction
        )
    }
}

/// Intersect canonicalized generated and training sets.
pub fn novelty<S: AsRef<str>, T: AsRef<str>>(generated: &[S], training: &[T]) -> NoveltyReport {
    let generated_count = generated.iter().filter(|s| !s.as_ref().trim().is_empty()).count();
    let (gen, _) = canonical_set(generated);
    let (train, _) = canonical_set(training);
    let found = gen.intersection(&train).count();
    let valid = gen.len();
    NoveltyReport {
        generated_count,
        valid_count: valid,
        found_in_training: found,
        novel_fraction: if valid == 0 {
            0.0
        } else {
            1.0 - found as f64 / valid as f64
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub temperature: f64,
    pub n: usize,
    pub malformed: usize,
    pub fraction: f64,
    /// 95% Wilson score interval for the malformed fraction.
    pub ci_low: f64,
    pub ci_high: f64,
}

/// 95% Wilson score interval for `k` successes out of `n`.
pub fn wilson_interval(k: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n = n as f64;
    let p = k as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Malformed fraction of `n` fresh samples at each temperature.
pub fn temperature_sweep<M: CharModel>(
    model: &M,
    vocab: &TokenVocab,
    temps: &[f64],
    n: usize,
    seed: u64,
) -> Result<Vec<SweepPoint>, AnalyzeError> {
    if n == 0 {
        return Err(AnalyzeError::Precondition("samples per temperature must be positive".into()));
    }
    let mut out = Vec::with_capacity(temps.len());
    for (i, &temperature) in temps.iter().enumerate() {
        let config = SamplerConfig {
            temperature,
            max_len: vocab.max_len(),
            seed: seed.wrapping_add(i as u64),
            count: n,
        };
        let (_, summary) = generate_batch(model, vocab, &config)?;
        let malformed = n - summary.valid;
        let (ci_low, ci_high) = wilson_interval(malformed, n);
        out.push(SweepPoint {
            temperature,
            n,
            malformed,
            fraction: malformed as f64 / n as f64,
            ci_low,
            ci_high,
        });
    }
    Ok(out)
}

pub fn sweep_csv(points: &[SweepPoint]) -> String {
    let mut out = String::from("temperature,n,malformed,fraction,ci_low,ci_high\n");
    for p in points {
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{:.6},{:.6}",
            p.temperature, p.n, p.malformed, p.fraction, p.ci_low, p.ci_high
        );
    }
    out
}

/// Descriptor records of the parseable lines, plus the count skipped.
pub fn describe_lines<S: AsRef<str>>(
    lines: &[S],
    fragments: &FragmentScoreTable,
) -> (Vec<(String, DescriptorRecord)>, usize) {
    let mut out = Vec::new();
    let mut skipped = 0;
    for line in lines {
        let s = line.as_ref().trim();
        if s.is_empty() {
            continue;
        }
        match smiles::parse(s).ok().and_then(|g| describe(&g, fragments).ok()) {
            Some(r) => out.push((s.to_string(), r)),
            None => skipped += 1,
        }
    }
    (out, skipped)
}

/// Two-sample Kolmogorov-Smirnov statistic: the largest gap between the
/// empirical distribution functions.
pub fn ks_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.len() == b.len() { 0.0 } else { 1.0 };
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[derive(Debug, Clone, PartialEq)]
pub struct HistogramSpec {
    pub property: String,
    /// `bins + 1` strictly increasing edges; the last bin is closed.
    pub edges: Vec<f64>,
    /// Counts per dataset label.
    pub counts: BTreeMap<String, Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KsEntry {
    pub property: String,
    pub label_a: String,
    pub label_b: String,
    pub distance: f64,
}

/// Histograms over shared edges for each property, and KS distances
/// between every pair of datasets.
pub fn property_histograms(
    datasets: &[(String, Vec<DescriptorRecord>)],
    properties: &[&str],
    bins: usize,
) -> Result<(Vec<HistogramSpec>, Vec<KsEntry>), AnalyzeError> {
    if bins == 0 {
        return Err(AnalyzeError::Precondition("bins must be positive".into()));
    }
    let mut hists = Vec::new();
    let mut ks = Vec::new();
    for &prop in properties {
        let values: Vec<(String, Vec<f64>)> = datasets
            .iter()
            .map(|(label, recs)| {
                let v = recs
                    .iter()
                    .map(|r| r.get(prop))
                    .collect::<Option<Vec<f64>>>()
                    .ok_or_else(|| AnalyzeError::Precondition(format!("unknown property `{prop}`")))?;
                Ok((label.clone(), v))
            })
            .collect::<Result<_, AnalyzeError>>()?;
        let all = values.iter().flat_map(|(_, v)| v.iter().copied());
        let (lo, hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x)));
        let (lo, hi) = if lo.is_finite() { (lo, hi) } else { (0.0, 1.0) };
        let hi = if hi > lo { hi } else { lo + 1.0 };
        let width = (hi - lo) / bins as f64;
        let edges: Vec<f64> = (0..=bins).map(|k| lo + width * k as f64).collect();
        let mut counts = BTreeMap::new();
        for (label, v) in &values {
            let mut c = vec![0usize; bins];
            for &x in v {
                let k = (((x - lo) / width) as usize).min(bins - 1);
                c[k] += 1;
            }
            counts.insert(label.clone(), c);
        }
        hists.push(HistogramSpec {
            property: prop.to_string(),
            edges,
            counts,
        });
        for i in 0..values.len() {
            for j in i + 1..values.len() {
                ks.push(KsEntry {
                    property: prop.to_string(),
                    label_a: values[i].0.clone(),
                    label_b: values[j].0.clone(),
                    distance: ks_distance(&values[i].1, &values[j].1),
                });
            }
        }
    }
    Ok((hists, ks))
}

pub fn histogram_csv(hists: &[HistogramSpec]) -> String {
    let mut out = String::from("property,label,bin_low,bin_high,count\n");
    for h in hists {
        for (label, counts) in &h.counts {
            for (k, c) in counts.iter().enumerate() {
                let _ = writeln!(out, "{},{},{},{},{}", h.property, label, h.edges[k], h.edges[k + 1], c);
            }
        }
    }
    out
}

pub fn ks_csv(entries: &[KsEntry]) -> String {
    let mut out = String::from("property,label_a,label_b,ks_distance\n");
    for e in entries {
        let _ = writeln!(out, "{},{},{},{:.6}", e.property, e.label_a, e.label_b, e.distance);
    }
    out
}

/// Nearest-rank percentile of ascending `sorted` values.
pub fn nearest_rank(sorted: &[f64], percentile: f64) -> f64 {
    assert!(!sorted.is_empty(), "percentile of an empty set");
    let rank = ((percentile / 100.0) * sorted.len() as f64).ceil() as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

#[derive(Debug, Clone, PartialEq)]
pub struct PercentilePick {
    pub percentile: f64,
    pub value: f64,
    pub picks: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SaSelection {
    pub picks: Vec<PercentilePick>,
    pub max_score: Option<(String, f64)>,
    /// Set when fewer than `k` novel compounds were available.
    pub short: bool,
}

/// For each percentile of the SA distribution of novel compounds, the `k`
/// compounds nearest to it (ties by canonical SMILES), plus the single
/// highest-scoring compound. Input SMILES must be canonical.
pub fn sa_percentile_pick(
    scored: &[(String, f64)],
    training: &HashSet<String>,
    percentiles: &[f64],
    k: usize,
) -> SaSelection {
    let mut novel: BTreeMap<&str, f64> = BTreeMap::new();
    for (s, v) in scored {
        if !training.contains(s) {
            novel.insert(s.as_str(), *v);
        }
    }
    let novel: Vec<(&str, f64)> = novel.into_iter().collect();
    let short = novel.len() < k;
    if short {
        log::warn!("only {} novel compounds for k = {k}", novel.len());
    }
    if novel.is_empty() {
        return SaSelection {
            picks: Vec::new(),
            max_score: None,
            short,
        };
    }
    let mut sorted: Vec<f64> = novel.iter().map(|x| x.1).collect();
    sorted.sort_by(f64::total_cmp);
    let picks = percentiles
        .iter()
        .map(|&p| {
            let value = nearest_rank(&sorted, p);
            let mut ranked = novel.clone();
            ranked.sort_by(|a, b| {
                (a.1 - value)
                    .abs()
                    .total_cmp(&(b.1 - value).abs())
                    .then_with(|| a.0.cmp(b.0))
            });
            PercentilePick {
                percentile: p,
                value,
                picks: ranked.into_iter().take(k).map(|(s, v)| (s.to_string(), v)).collect(),
            }
        })
        .collect();
    let max_score = novel
        .iter()
        .max_by(|a, b| a.1.total_cmp(&b.1).then_with(|| b.0.cmp(a.0)))
        .map(|&(s, v)| (s.to_string(), v));
    SaSelection {
        picks,
        max_score,
        short,
    }
}

pub fn selection_csv(sel: &SaSelection) -> String {
    let mut out = String::from("group,target,smiles,sa_score\n");
    for p in &sel.picks {
        for (s, v) in &p.picks {
            let _ = writeln!(out, "p{},{:.4},{},{:.4}", p.percentile, p.value, s, v);
        }
    }
    if let Some((s, v)) = &sel.max_score {
        let _ = writeln!(out, "max,{v:.4},{s},{v:.4}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn novelty_extremes() {
        let train = ["CCO", "c1ccccc1", "CC(=O)O"];
        let subset = ["OCC", "c1ccccc1"];
        let r = novelty(&subset, &train);
        assert_eq!((r.valid_count, r.found_in_training), (2, 2));
        assert_eq!(r.novel_fraction, 0.0);
        let disjoint = ["CCN", "C1CC1", "C(((", ""];
        let r = novelty(&disjoint, &train);
        assert_eq!((r.generated_count, r.valid_count), (3, 2));
        assert_eq!(r.novel_fraction, 1.0);
    }

    #[test]
    fn ks_of_identical_and_disjoint_samples() {
        let a = [1.0, 2.0, 2.0, 3.0];
        assert_eq!(ks_distance(&a, &a), 0.0);
        assert_eq!(ks_distance(&a, &[10.0, 11.0]), 1.0);
        assert!((ks_distance(&[1.0, 2.0], &[2.0, 3.0]) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn wilson_interval_brackets_the_estimate() {
        let (lo, hi) = wilson_interval(20, 1000);
        assert!(lo < 0.02 && 0.02 < hi);
        assert!((lo - 0.0130).abs() < 5e-4 && (hi - 0.0307).abs() < 5e-4);
        assert_eq!(wilson_interval(0, 10).0, 0.0);
    }

    #[test]
    fn percentile_pick_by_hand() {
        let scored: Vec<(String, f64)> = (1..=100).map(|i| (format!("C{i:03}"), i as f64)).collect();
        let sel = sa_percentile_pick(&scored, &HashSet::new(), &[50.0], 3);
        let mut got: Vec<f64> = sel.picks[0].picks.iter().map(|p| p.1).collect();
        got.sort_by(f64::total_cmp);
        assert_eq!(sel.picks[0].value, 50.0);
        assert_eq!(got, [49.0, 50.0, 51.0]);
        assert_eq!(sel.max_score.unwrap().1, 100.0);
        assert_eq!(nearest_rank(&[1.0, 2.0, 3.0, 4.0], 5.0), 1.0);
        assert_eq!(nearest_rank(&[1.0, 2.0, 3.0, 4.0], 95.0), 4.0);
    }

    #[test]
    fn training_members_are_never_picked() {
        let scored = vec![("CCO".to_string(), 2.0), ("CCN".to_string(), 2.1), ("CCC".to_string(), 9.0)];
        let training: HashSet<String> = ["CCC".to_string()].into();
        let sel = sa_percentile_pick(&scored, &training, &[5.0, 50.0, 95.0], 10);
        assert!(sel.short);
        for p in &sel.picks {
            assert_eq!(p.picks.len(), 2);
            assert!(p.picks.iter().all(|(s, _)| s != "CCC"));
        }
        assert_eq!(sel.max_score.unwrap().0, "CCN");
    }

    #[test]
    fn histograms_conserve_counts() {
        let rec = |mw: f64| DescriptorRecord {
            mw,
            logp: 0.0,
            tpsa: 0.0,
            hba: 0,
            hbd: 0,
            rot_bonds: 0,
            sa_score: 1.0,
        };
        let data = vec![
            ("train".to_string(), vec![rec(100.0), rec(150.0), rec(250.0)]),
            ("gen".to_string(), vec![rec(120.0), rec(300.0)]),
        ];
        let (h, ks) = property_histograms(&data, &["mw"], 4).unwrap();
        assert_eq!(h[0].counts["train"].iter().sum::<usize>(), 3);
        assert_eq!(h[0].counts["gen"].iter().sum::<usize>(), 2);
        assert!(h[0].edges.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(ks.len(), 1);
        assert!(property_histograms(&data, &["nope"], 4).is_err());
    }
}
